// Acceptance checks, one line per criterion. Arguments select criteria by
// number; the default runs all of them.
#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "cli.hpp"
#include "hanf/corpus.hpp"
#include "hanf/errors.hpp"
#include "hanf/eval.hpp"
#include "hanf/formula.hpp"
#include "hanf/hnf.hpp"
#include "hanf/sphere.hpp"
#include "support.hpp"

using namespace hanf;
using namespace hanf::test;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// One corpus formula normalized at one degree.
struct Compiled {
  std::string text;
  std::uint32_t f = 0;
  Formula phi;
  HnfFormula psi;
  NormalizationStats stats;
  double normalize_seconds = 0;
};

std::vector<std::string> soundness_corpus() {
  return read_lines(std::string(HANF_TEST_DATA) + "/soundness_corpus.txt");
}
std::vector<std::string> extended_corpus() {
  return read_lines(std::string(HANF_TEST_DATA) + "/extended_corpus.txt");
}

/// Soundness corpus at degrees 1 and 2, extended corpus at degree 1.
const std::vector<Compiled>& compiled_corpus() {
  static const std::vector<Compiled> all = [] {
    std::vector<Compiled> out;
    auto add = [&](const std::string& text, std::uint32_t f) {
      Compiled c;
      c.text = text;
      c.f = f;
      c.phi = parse_formula(text, sig_eu());
      NormalizationConfig cfg;
      cfg.f = f;
      Normalizer norm(sig_eu(), cfg);
      const auto start = Clock::now();
      c.psi = norm.normalize(c.phi);
      c.normalize_seconds = seconds_since(start);
      c.stats = norm.stats();
      out.push_back(std::move(c));
    };
    for (std::uint32_t f : {1u, 2u}) {
      for (const auto& t : soundness_corpus()) add(t, f);
    }
    for (const auto& t : extended_corpus()) add(t, 1);
    return out;
  }();
  return all;
}

std::uint64_t power(std::uint64_t base, std::uint32_t e) {
  std::uint64_t out = 1;
  while (e-- > 0) out *= base;
  return out;
}

/// Every assignment of `vars` into a structure of size n, in odometer order.
template <class Visit>
void for_each_assignment(const std::vector<Var>& vars, std::uint32_t n, Visit&& visit) {
  std::vector<Element> vals(vars.size(), 0);
  while (true) {
    Assignment asg;
    for (std::size_t i = 0; i < vars.size(); ++i) asg[vars[i]] = vals[i];
    visit(asg);
    std::size_t i = 0;
    while (i < vals.size() && ++vals[i] == n) vals[i++] = 0;
    if (i == vals.size()) return;
  }
}

// ---------------------------------------------------------------------------

Outcome soundness() {
  Outcome o;
  const auto start = Clock::now();
  std::size_t checks = 0;
  std::size_t structures = 0;
  std::size_t counterexamples = 0;
  for (const auto& c : compiled_corpus()) {
    EquivBudget budget;
    budget.seed = 1;
    auto v = check_f_equiv(c.phi, c.psi.formula, sig_eu(), c.f, budget);
    ++checks;
    structures += v.structures_checked;
    if (v.status != EquivStatus::Equivalent) {
      o.pass = false;
      ++counterexamples;
      o.detail += " counterexample for " + c.text + " at f=" + std::to_string(c.f) + ";";
    }
  }
  double normalize_total = 0;
  for (const auto& c : compiled_corpus()) normalize_total += c.normalize_seconds;
  const double total = seconds_since(start) + normalize_total;
  std::ostringstream os;
  os << soundness_corpus().size() << " formulas at f=1,2 and " << extended_corpus().size()
     << " more at f=1; " << checks << " equivalence checks over " << structures
     << " structures, " << counterexamples << " counterexamples; " << std::fixed
     << std::setprecision(0) << total << " s including normalization (target 600 s)";
  o.detail = os.str() + o.detail;
  return o;
}

Outcome radius_law() {
  Outcome o;
  std::size_t eliminations = 0;
  for (const auto& c : compiled_corpus()) {
    for (const auto& e : c.stats.eliminations) {
      ++eliminations;
      if (e.output_radius != 3 * std::max<std::uint32_t>(1, e.input_radius)) {
        o.pass = false;
        o.detail += " " + c.text + " at f=" + std::to_string(c.f) + ": radius " +
                    std::to_string(e.input_radius) + " -> " + std::to_string(e.output_radius) +
                    ";";
      }
    }
    const auto q = static_cast<std::uint32_t>(c.stats.eliminations.size());
    if (max_radius(c.psi.formula) > power(3, q)) {
      o.pass = false;
      o.detail += " " + c.text + ": final radius above 3^" + std::to_string(q) + ";";
    }
  }
  o.detail = std::to_string(eliminations) + " eliminations over " +
             std::to_string(compiled_corpus().size()) + " normalizations" + o.detail;
  return o;
}

/// Number of c in `a` with S_d(prefix c) isomorphic to `pattern`.
std::size_t brute_count(const Structure& a, std::vector<Element> prefix, const Sphere& pattern) {
  const auto d = pattern.declared_radius();
  prefix.push_back(0);
  std::size_t n = 0;
  for (Element c = 0; c < a.size(); ++c) {
    prefix.back() = c;
    if (is_isomorphic(extract_sphere(a, prefix, d), pattern)) ++n;
  }
  return n;
}

Outcome case_split() {
  Outcome o;
  const auto sig = sig_eu();
  std::map<std::string, std::size_t> tags;
  std::size_t guard_failures = 0;
  std::size_t failures = 0;
  const std::size_t instances = 600;
  auto fail = [&](std::size_t i, const std::string& what) {
    if (++failures <= 5) o.detail += " instance " + std::to_string(i) + ": " + what + ";";
    o.pass = false;
  };
  for (std::size_t i = 0; i < instances; ++i) {
    std::mt19937_64 rng(1000 + i);
    const std::uint32_t f = i % 2 == 0 ? 1 : 2;
    const std::uint32_t r = f == 1 && rng() % 2 == 0 ? 2 : 1;
    const std::uint32_t n = rng() % 2;
    const auto size = static_cast<std::uint32_t>(5 + rng() % 6);
    const auto a = random_structure(sig, size, f, rng());

    std::vector<Element> tuple;
    for (std::uint32_t k = 0; k <= n; ++k) tuple.push_back(rng() % size);
    const Element last = tuple.back();
    auto outer = make_pattern(extract_sphere(a, tuple, 3 * r));

    // The witness pattern: usually realized near `last`, sometimes
    // anywhere in `a`, sometimes from an unrelated structure.
    Sphere tau = [&] {
      const auto mode = rng() % 4;
      if (mode == 3) {
        const auto b = random_structure(sig, size, f, rng());
        std::vector<Element> centers;
        for (std::uint32_t k = 0; k < n + 2; ++k) centers.push_back(rng() % size);
        return extract_sphere(b, centers, r);
      }
      Element w = rng() % size;
      if (mode < 2) {
        const Element anchor = tuple[rng() % tuple.size()];
        const std::vector<Element> near = ball(a, std::span<const Element>(&anchor, 1), 2 * r);
        w = near[rng() % near.size()];
      }
      auto centers = tuple;
      centers.push_back(w);
      return extract_sphere(a, centers, r);
    }();
    const std::uint32_t m = 1 + rng() % 3;

    std::vector<Var> outer_context;
    for (std::uint32_t k = 0; k < n; ++k) outer_context.push_back(var("x" + std::to_string(k)));
    auto atom_context = outer_context;
    atom_context.push_back(var("y"));
    auto alpha = f_hanf(m, var("w"), make_pattern(tau), atom_context);

    EliminationCase ec;
    const auto rewritten = rewrite_hanf_atom(alpha, *outer, outer_context, &ec);
    const auto expected_tag = classify_pattern(tau);
    if (ec.tag != expected_tag) fail(i, "tag mismatch");

    // Guard: tau restricted to its first n+1 centers must be the
    // r-sphere of the tuple.
    const std::vector<Element> tau_prefix(tau.centers().begin(), tau.centers().end() - 1);
    const bool guard = is_isomorphic(extract_sphere(tau.carrier(), tau_prefix, r),
                                     extract_sphere(a, tuple, r));
    const auto tau_count = brute_count(a, tuple, tau);

    Assignment inner;
    Assignment outer_asg;
    for (std::uint32_t k = 0; k < n; ++k) {
      inner[outer_context[k]] = tuple[k];
      outer_asg[outer_context[k]] = tuple[k];
    }
    inner[var("y")] = last;
    if (eval_fo(a, inner, alpha) != eval_fo(a, outer_asg, rewritten)) fail(i, "truth value");

    if (!guard) {
      ++guard_failures;
      if (tau_count != 0) fail(i, "guard failed but tau is realized");
      if (rewritten->kind != Kind::False) fail(i, "guard failed but atom is not false");
      continue;
    }
    ++tags[to_string(ec.tag)];
    const auto region = ec.tag == CaseTag::Anchored ? CandidateRegion::AllCenters
                                                    : CandidateRegion::LastCenter;
    const std::vector<Element> region_centers =
        region == CandidateRegion::AllCenters ? outer->sphere.centers()
                                              : std::vector<Element>{outer->sphere.centers().back()};
    if (ec.p > ball(outer->sphere.carrier(), region_centers, 2 * r).size()) {
      fail(i, "p exceeds the candidate ball");
    }
    if (ec.tag == CaseTag::Disconnected) {
      if (!ec.sigma) {
        fail(i, "missing sigma");
        continue;
      }
      std::vector<Element> prefix(tuple.begin(), tuple.end() - 1);
      const auto sigma_count = brute_count(a, prefix, ec.sigma->sphere);
      if (tau_count + ec.p != sigma_count) fail(i, "tau count != sigma count - p");
      if (count_in_sphere(outer->sphere, *ec.sigma, CountMode::ReplaceLast) != ec.p) {
        fail(i, "count_in_sphere disagrees with the rewrite");
      }
    } else {
      if (tau_count != ec.p) fail(i, "p != witness count");
      if (count_in_sphere(outer->sphere, *alpha->pattern, CountMode::AppendCenter, region) !=
          ec.p) {
        fail(i, "count_in_sphere disagrees with the rewrite");
      }
    }
  }
  std::ostringstream os;
  os << instances << " instances (";
  for (const auto& [tag, k] : tags) os << tag << " " << k << ", ";
  os << "guard false " << guard_failures << "), " << failures << " failures";
  for (const char* tag : {"connected", "anchored", "disconnected"}) {
    if (tags[tag] == 0) {
      o.pass = false;
      os << "; no " << tag << " instance";
    }
  }
  o.detail = os.str() + o.detail;
  return o;
}

Outcome evaluator_cross_check() {
  Outcome o;
  const auto sig = sig_eu();
  std::size_t triples = 0;
  std::size_t failures = 0;
  // Structures of the soundness check up to size 6: one representative per
  // isomorphism class up to size 4, and the seeded samples up to size 6.
  std::map<std::uint32_t, std::vector<Structure>> structures;
  for (std::uint32_t f : {1u, 2u}) {
    auto& list = structures[f];
    enumerate_structures_up_to_isomorphism(sig, 4, f, [&](const Structure& s) {
      list.push_back(s);
      return true;
    });
    EquivBudget budget;
    budget.seed = 1;
    for (std::size_t i = 0; i < budget.sample_count; ++i) {
      auto s = equiv_sample(sig, f, budget, i);
      if (s.size() <= 6) list.push_back(std::move(s));
    }
  }
  for (const auto& c : compiled_corpus()) {
    const HnfEvaluator hnf(c.psi);
    const auto vars = free_variables(c.phi);
    for (const auto& s : structures[c.f]) {
      FoEvaluator fo(s);
      for_each_assignment(vars, s.size(), [&](const Assignment& asg) {
        ++triples;
        if (fo.eval(asg, c.psi.formula) != hnf.eval(s, asg)) {
          if (++failures <= 3) o.detail += " " + c.text + " at f=" + std::to_string(c.f) + ";";
        }
      });
    }
  }

  // Counting expansion on seeded Hanf atoms.
  std::size_t atoms = 0;
  std::size_t expansion_checks = 0;
  std::vector<Structure> small;
  enumerate_structures_up_to_isomorphism(sig, 4, 1, [&](const Structure& s) {
    small.push_back(s);
    return true;
  });
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<Sphere>> pools;
  for (std::uint32_t d : {1u, 2u}) {
    for (std::uint32_t k : {1u, 2u}) pools[{d, k}] = enumerate_spheres(sig, d, k, 1);
  }
  std::mt19937_64 rng(42);
  for (; atoms < 100; ++atoms) {
    const std::uint32_t d = 1 + rng() % 2;
    const std::uint32_t k = 1 + rng() % 2;
    const auto& pool = pools[{d, k}];
    const auto m = static_cast<std::uint32_t>(1 + rng() % 4);
    std::vector<Var> context;
    if (k == 2) context.push_back(var("x"));
    auto h = f_hanf(m, var("w"), make_pattern(pool[rng() % pool.size()]), context);
    auto expanded = expand_counting(h);
    for (const auto& s : small) {
      for_each_assignment(context, s.size(), [&](const Assignment& asg) {
        ++expansion_checks;
        if (eval_fo(s, asg, expanded) != eval_fo(s, asg, h)) {
          if (++failures <= 3) o.detail += " expansion of " + print_formula(h) + ";";
        }
      });
    }
  }
  o.pass = failures == 0;
  o.detail = std::to_string(triples) + " (HNF, structure, assignment) triples, " +
             std::to_string(atoms) + " atoms with m <= 4 over " +
             std::to_string(expansion_checks) + " evaluations, " + std::to_string(failures) +
             " mismatches" + o.detail;
  return o;
}

Structure colored_cycle(std::uint32_t n, bool all_u) {
  StructureBuilder b(sig_eu(), n);
  for (Element i = 0; i < n; ++i) {
    b.add("E", {i, (i + 1) % n});
    if (all_u) b.add("U", {i});
  }
  return b.build();
}

Outcome locality() {
  Outcome o;
  std::size_t sentences = 0;
  std::size_t checks = 0;
  for (const auto& c : compiled_corpus()) {
    if (c.f != 2 || !free_variables(c.phi).empty()) continue;
    ++sentences;
    const auto d = max_radius(c.psi.formula);
    const auto m = max_threshold(c.psi.formula);
    const auto n = std::max<std::uint32_t>({m, 2 * d + 1, 3});
    for (bool all_u : {false, true}) {
      const auto cn = colored_cycle(n, all_u);
      const auto twice = disjoint_union(cn, cn);
      const bool one = eval_hnf(cn, {}, c.psi);
      const bool two = eval_hnf(twice, {}, c.psi);
      const bool fo_one = eval_fo(cn, {}, c.phi);
      const bool fo_two = eval_fo(twice, {}, c.phi);
      ++checks;
      if (one != two || fo_one != fo_two || one != fo_one) {
        o.pass = false;
        o.detail += " " + c.text + " on C_" + std::to_string(n) + (all_u ? " (all U)" : "") + ";";
      }
    }
  }
  o.detail = std::to_string(sentences) + " sentences, " + std::to_string(checks) +
             " cycle pairs compared" + o.detail;
  if (sentences == 0) o.pass = false;
  return o;
}

// Sphere oracle: all labeled structures with centers at 0 (and 1), kept when
// the declared ball covers them, deduplicated exactly by minimizing the
// encoding over every permutation that fixes the centers.
struct Labeled {
  std::uint32_t k = 0;
  std::uint64_t edges = 0;  // bit i*k+j: E(i, j)
  std::uint32_t unary = 0;  // bit i: U(i)
};

class SphereOracle {
 public:
  SphereOracle(bool binary, std::uint32_t d, std::uint32_t n_centers, std::uint32_t f)
      : binary_(binary), d_(d), n_(n_centers), f_(f) {}

  /// Class representatives with their center tuples.
  std::vector<Sphere> run() {
    // Coincident centers are covered by the single-center layouts.
    std::vector<std::vector<Element>> layouts{{0}};
    if (n_ == 2) layouts = {{0, 0}, {0, 1}};
    for (const auto& centers : layouts) {
      const std::uint32_t distinct = centers.back() + 1;
      const std::uint32_t max_k = binary_ ? distinct * (1 + (d_ == 2 ? f_ : 0)) : distinct;
      for (std::uint32_t k = distinct; k <= max_k; ++k) enumerate(k, centers, distinct);
    }
    return std::move(reps_);
  }

  std::size_t labeled_count() const { return labeled_; }

 private:
  void enumerate(std::uint32_t k, const std::vector<Element>& centers, std::uint32_t distinct) {
    perms_.clear();
    std::vector<Element> p(k);
    std::iota(p.begin(), p.end(), 0);
    do perms_.push_back(p);
    while (std::next_permutation(p.begin() + distinct, p.end()));

    std::vector<std::pair<Element, Element>> pairs;
    for (Element i = 0; i < k; ++i) {
      for (Element j = i + 1; j < k; ++j) pairs.emplace_back(i, j);
    }
    if (!binary_) {
      for (std::uint32_t u = 0; u < (1u << k); ++u) visit({k, 0, u}, centers);
      return;
    }
    for (std::uint64_t g = 0; g < (std::uint64_t{1} << pairs.size()); ++g) {
      std::vector<std::uint32_t> deg(k, 0);
      std::vector<std::pair<Element, Element>> chosen;
      bool ok = true;
      for (std::size_t e = 0; e < pairs.size() && ok; ++e) {
        if (!(g >> e & 1)) continue;
        chosen.push_back(pairs[e]);
        ok = ++deg[pairs[e].first] <= f_ && ++deg[pairs[e].second] <= f_;
      }
      if (!ok || !covered(k, chosen, distinct)) continue;
      // Each Gaifman edge as i->j, j->i or both; loops independently.
      std::uint64_t orientations = power(3, static_cast<std::uint32_t>(chosen.size()));
      for (std::uint64_t o = 0; o < orientations; ++o) {
        std::uint64_t edges = 0;
        std::uint64_t code = o;
        for (const auto& [i, j] : chosen) {
          const auto dir = code % 3;
          code /= 3;
          if (dir != 1) edges |= std::uint64_t{1} << (i * k + j);
          if (dir != 0) edges |= std::uint64_t{1} << (j * k + i);
        }
        for (std::uint32_t loops = 0; loops < (1u << k); ++loops) {
          std::uint64_t with_loops = edges;
          for (Element i = 0; i < k; ++i) {
            if (loops >> i & 1) with_loops |= std::uint64_t{1} << (i * k + i);
          }
          visit({k, with_loops, 0}, centers);
        }
      }
    }
  }

  bool covered(std::uint32_t k, const std::vector<std::pair<Element, Element>>& edges,
               std::uint32_t distinct) const {
    std::vector<std::uint32_t> dist(k, UINT32_MAX);
    std::vector<Element> frontier;
    for (Element c = 0; c < distinct; ++c) {
      dist[c] = 0;
      frontier.push_back(c);
    }
    for (std::uint32_t step = 1; step < d_; ++step) {
      std::vector<Element> next;
      for (auto x : frontier) {
        for (const auto& [i, j] : edges) {
          const Element y = i == x ? j : j == x ? i : x;
          if (y != x && dist[y] == UINT32_MAX) {
            dist[y] = step;
            next.push_back(y);
          }
        }
      }
      frontier = std::move(next);
    }
    return std::all_of(dist.begin(), dist.end(), [](auto v) { return v != UINT32_MAX; });
  }

  void visit(const Labeled& s, const std::vector<Element>& centers) {
    ++labeled_;
    std::uint64_t best_edges = UINT64_MAX;
    std::uint32_t best_unary = UINT32_MAX;
    for (const auto& p : perms_) {
      std::uint64_t e = 0;
      std::uint32_t u = 0;
      for (Element i = 0; i < s.k; ++i) {
        if (s.unary >> i & 1) u |= 1u << p[i];
        for (Element j = 0; j < s.k; ++j) {
          if (s.edges >> (i * s.k + j) & 1) e |= std::uint64_t{1} << (p[i] * s.k + p[j]);
        }
      }
      if (std::pair(e, u) < std::pair(best_edges, best_unary)) {
        best_edges = e;
        best_unary = u;
      }
    }
    const std::string key = std::to_string(s.k) + ":" + std::to_string(centers.size()) + ":" +
                            std::to_string(centers.back()) + ":" + std::to_string(best_edges) +
                            ":" + std::to_string(best_unary);
    if (!seen_.insert(key).second) return;
    StructureBuilder b(binary_ ? sig_e() : sig_u(), s.k);
    for (Element i = 0; i < s.k; ++i) {
      if (s.unary >> i & 1) b.add("U", {i});
      for (Element j = 0; j < s.k; ++j) {
        if (s.edges >> (i * s.k + j) & 1) b.add("E", {i, j});
      }
    }
    auto carrier = b.build();
    if (degree(carrier) > f_) return;
    reps_.emplace_back(std::move(carrier), centers, d_);
  }

  bool binary_;
  std::uint32_t d_;
  std::uint32_t n_;
  std::uint32_t f_;
  std::vector<std::vector<Element>> perms_;
  std::unordered_set<std::string> seen_;
  std::vector<Sphere> reps_;
  std::size_t labeled_ = 0;
};

Outcome sphere_goldens() {
  Outcome o;
  std::size_t configs = 0;
  std::size_t classes = 0;
  std::size_t labeled = 0;
  for (bool binary : {false, true}) {
    const auto sig = binary ? sig_e() : sig_u();
    for (std::uint32_t f = 0; f <= 2; ++f) {
      for (std::uint32_t d = 1; d <= 2; ++d) {
        for (std::uint32_t n = 1; n <= 2; ++n) {
          ++configs;
          const auto name = std::string(binary ? "{E}" : "{U}") + " f=" + std::to_string(f) +
                            " d=" + std::to_string(d) + " n=" + std::to_string(n);
          SphereOracle oracle(binary, d, n, f);
          const auto reps = oracle.run();
          labeled += oracle.labeled_count();
          const auto enumerated = enumerate_spheres(sig, d, n, f);
          classes += enumerated.size();
          std::map<std::string, const Sphere*> by_code;
          for (const auto& s : enumerated) by_code[canonical_form(s)] = &s;
          bool ok = reps.size() == enumerated.size() && by_code.size() == enumerated.size();
          for (const auto& s : reps) {
            auto it = by_code.find(canonical_form(s));
            ok = ok && it != by_code.end() && is_isomorphic(s, *it->second);
          }
          // Pairwise non-isomorphism of the oracle's representatives.
          if (reps.size() <= 400) {
            for (std::size_t i = 0; i < reps.size() && ok; ++i) {
              for (std::size_t j = i + 1; j < reps.size() && ok; ++j) {
                ok = !is_isomorphic(reps[i], reps[j]);
              }
            }
          }
          if (!ok) {
            o.pass = false;
            o.detail += " " + name + ": oracle " + std::to_string(reps.size()) +
                        ", enumerated " + std::to_string(enumerated.size()) + ";";
          }
        }
      }
    }
  }
  o.detail = std::to_string(configs) + " configurations, " + std::to_string(classes) +
             " classes from " + std::to_string(labeled) + " labeled structures" + o.detail;
  return o;
}

Outcome scaling() {
  Outcome o;
  auto phi = parse_formula("(exists x (and (rel U x) (rel E x x)))", sig_eu());
  NormalizationConfig cfg;
  cfg.f = 2;
  const auto psi = normalize(phi, sig_eu(), cfg);
  const HnfEvaluator eval(psi);
  auto cycle = [](std::uint32_t n) {
    StructureBuilder b(sig_eu(), n);
    for (Element i = 0; i < n; ++i) {
      b.add("E", {i, (i + 1) % n});
      if (i % 7 == 3) b.add("U", {i});
      if (i % 11 == 5) b.add("E", {i, i});
    }
    return b.build();
  };
  std::vector<double> times;
  std::ostringstream os;
  os << std::setprecision(3);
  for (std::uint32_t n : {1000u, 10000u, 100000u}) {
    const auto s = cycle(n);
    double best = 1e300;
    for (int rep = 0; rep < 3; ++rep) {
      const auto start = Clock::now();
      const bool value = eval.eval(s, {});
      best = std::min(best, seconds_since(start));
      if (value != eval_fo(cycle(std::min<std::uint32_t>(n, 1000)), {}, phi)) o.pass = false;
    }
    times.push_back(best);
    os << "N=" << n << " " << best * 1000 << " ms; ";
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double ratio = times[i] / times[i - 1];
    os << "ratio " << ratio << (i + 1 < times.size() ? ", " : "");
    if (ratio > 20) o.pass = false;
  }
  os << " (HNF with " << hanf_atom_count(psi.formula) << " atoms)";
  o.detail = os.str();
  return o;
}

Outcome determinism() {
  Outcome o;
  const auto dir = fs::temp_directory_path() / "hanf_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto file = [&](const std::string& name) { return (dir / name).string(); };
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(file(name), std::ios::binary) << text;
  };
  write("sig.txt", "rel E 2\nrel U 1\n");
  write("phi.txt", "(exists y (and (rel E x y) (rel U y)))\n");
  write("other.txt", "(exists y (rel E x y))\n");

  struct Result {
    int code;
    std::string out;
    std::string err;
    std::map<std::string, std::string> files;
  };
  auto run = [&](const std::vector<std::string>& args, const std::vector<std::string>& outputs) {
    std::ostringstream out;
    std::ostringstream err;
    Result r{cli::run(args, out, err), out.str(), err.str(), {}};
    for (const auto& name : outputs) {
      r.files[name] = read_text(file(name));
      fs::remove(file(name));
    }
    return r;
  };
  auto normalize_args = std::vector<std::string>{
      "normalize", "--sig", file("sig.txt"), "--formula", file("phi.txt"), "--degree", "1",
      "--out", file("hnf.txt"), "--report", file("report.json"), "--trace"};
  auto equiv_args = std::vector<std::string>{
      "equiv", "--sig", file("sig.txt"), "--a", file("phi.txt"), "--b", file("other.txt"),
      "--degree", "1", "--seed", "17", "--samples", "50", "--report", file("equiv.json"),
      "--counterexample", file("cex.txt")};
  auto hnf_equiv_args = std::vector<std::string>{
      "equiv", "--sig", file("sig.txt"), "--a", file("phi.txt"), "--b", file("hnf_keep.txt"),
      "--degree", "1", "--seed", "17", "--samples", "50", "--report", file("equiv.json")};

  std::size_t compared = 0;
  auto same = [&](const Result& a, const Result& b, const std::string& what, int expect) {
    ++compared;
    if (a.code != expect || b.code != expect || a.out != b.out || a.err != b.err ||
        a.files != b.files) {
      o.pass = false;
      o.detail += " " + what + " differs or failed (exit " + std::to_string(a.code) + ");";
    }
    for (const auto& [name, text] : a.files) {
      if (text.empty()) {
        o.pass = false;
        o.detail += " " + what + " wrote no " + name + ";";
      }
    }
  };
  const auto n1 = run(normalize_args, {"hnf.txt", "report.json"});
  const auto n2 = run(normalize_args, {"hnf.txt", "report.json"});
  same(n1, n2, "normalize", cli::kOk);
  write("hnf_keep.txt", n1.files.count("hnf.txt") ? n1.files.at("hnf.txt") : "");
  same(run(equiv_args, {"equiv.json", "cex.txt"}), run(equiv_args, {"equiv.json", "cex.txt"}),
       "equiv with a counterexample", cli::kCounterexample);
  same(run(hnf_equiv_args, {"equiv.json"}), run(hnf_equiv_args, {"equiv.json"}),
       "equiv of a formula and its HNF", cli::kOk);
  fs::remove_all(dir);
  o.detail = std::to_string(compared) + " command pairs byte-identical in stdout, stderr and "
             "output files" + o.detail;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, Outcome (*)()>> criteria{
      {1, soundness},    {2, radius_law},  {3, case_split}, {4, evaluator_cross_check},
      {5, locality},     {6, sphere_goldens}, {7, scaling}, {8, determinism}};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));
  bool all = true;
  for (const auto& [n, check] : criteria) {
    if (!selected.empty() && !selected.count(n)) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << " (" << std::fixed
              << std::setprecision(1) << seconds_since(start) << " s) " << o.detail << "\n"
              << std::flush;
  }
  return all ? 0 : 1;
}
