#include "hanf/hnf.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "hanf/errors.hpp"
#include "hanf/eval.hpp"

namespace hanf {

const char* to_string(CaseTag tag) {
  switch (tag) {
    case CaseTag::Connected:
      return "connected";
    case CaseTag::Anchored:
      return "anchored";
    case CaseTag::Disconnected:
      return "disconnected";
  }
  return "?";
}

std::optional<HnfFormula> as_hnf(const Formula& f) {
  std::optional<std::vector<Var>> ctx;
  bool ok = true;
  std::function<void(const Formula&)> walk = [&](const Formula& g) {
    if (!ok) return;
    switch (g->kind) {
      case Kind::True:
      case Kind::False:
        return;
      case Kind::Not:
      case Kind::And:
      case Kind::Or:
        for (const auto& c : g->children) walk(c);
        return;
      case Kind::Hanf:
        if (!ctx) {
          ctx = g->vars;
        } else if (*ctx != g->vars) {
          ok = false;
        }
        return;
      default:
        ok = false;
    }
  };
  walk(f);
  if (!ok) return std::nullopt;
  return HnfFormula{f, ctx ? *ctx : std::vector<Var>{}};
}

void validate_hnf(const HnfFormula& psi) {
  std::function<void(const Formula&)> walk = [&](const Formula& f) {
    switch (f->kind) {
      case Kind::True:
      case Kind::False:
        return;
      case Kind::Not:
      case Kind::And:
      case Kind::Or:
        for (const auto& c : f->children) walk(c);
        return;
      case Kind::Hanf:
        if (f->vars != psi.context) {
          throw Error("hanf atom " + print_formula(f) + " is not over the full context");
        }
        for (auto v : psi.context) {
          if (v == f->witness) throw Error("hanf atom witness coincides with a context variable");
        }
        return;
      default:
        throw Error("not in Hanf normal form: " + print_formula(f));
    }
  };
  walk(psi.formula);
}

namespace {

std::string code_at(const Structure& a, std::span<const Element> centers, std::uint32_t r) {
  auto s = extract_sphere(a, centers, r);
  return canonical_form(s);
}

std::vector<Element> head(const std::vector<Element>& v, std::size_t n) {
  return std::vector<Element>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n));
}

/// Per outer sphere τ′: restriction codes and candidate code tallies, filled
/// lazily per radius.
class OuterSphere {
 public:
  explicit OuterSphere(const Sphere& s) : s_(s) {}

  const Sphere& sphere() const { return s_; }

  /// Code of S_r(c̄ c_{n+1}) inside τ′.
  const std::string& restriction(std::uint32_t r) {
    auto it = restriction_.find(r);
    if (it == restriction_.end()) {
      it = restriction_.emplace(r, code_at(s_.carrier(), s_.centers(), r)).first;
    }
    return it->second;
  }

  std::uint32_t count(std::uint32_t r, CountMode mode, CandidateRegion region,
                      const std::string& code) {
    auto key = std::make_tuple(r, static_cast<int>(mode), static_cast<int>(region));
    auto it = tallies_.find(key);
    if (it == tallies_.end()) it = tallies_.emplace(key, tally(r, mode, region)).first;
    auto hit = it->second.find(code);
    return hit == it->second.end() ? 0 : hit->second;
  }

 private:
  std::unordered_map<std::string, std::uint32_t> tally(std::uint32_t r, CountMode mode,
                                                       CandidateRegion region) const {
    const auto& centers = s_.centers();
    const auto n1 = centers.size();
    std::vector<Element> around =
        region == CandidateRegion::LastCenter ? std::vector<Element>{centers.back()} : centers;
    std::vector<Element> probe = mode == CountMode::AppendCenter ? centers : head(centers, n1 - 1);
    probe.push_back(0);
    std::unordered_map<std::string, std::uint32_t> out;
    for (auto c : ball(s_.carrier(), around, 2 * r)) {
      probe.back() = c;
      ++out[code_at(s_.carrier(), probe, r)];
    }
    return out;
  }

  const Sphere& s_;
  std::unordered_map<std::uint32_t, std::string> restriction_;
  std::map<std::tuple<std::uint32_t, int, int>, std::unordered_map<std::string, std::uint32_t>>
      tallies_;
};

/// Data of a Hanf atom that does not depend on the outer sphere.
struct AtomInfo {
  CaseTag tag;
  std::uint32_t radius;
  std::string tau1_code;
  PatternPtr sigma;
  bool realizable = true;
};

AtomInfo atom_info(const Node& alpha, std::optional<std::uint32_t> f) {
  const auto& tau = alpha.pattern->sphere;
  const auto k = tau.n_centers();
  if (k < 2) throw Error("hanf atom has no center for the eliminated variable");
  AtomInfo info;
  info.radius = tau.declared_radius();
  info.tag = classify_pattern(tau);
  info.tau1_code = code_at(tau.carrier(), head(tau.centers(), k - 1), info.radius);
  if (info.tag == CaseTag::Disconnected) {
    auto centers = head(tau.centers(), k - 2);
    centers.push_back(tau.centers().back());
    info.sigma = make_pattern(extract_sphere(tau.carrier(), centers, info.radius));
  }
  if (f && degree(tau.carrier()) > *f) info.realizable = false;
  return info;
}

Formula rewrite(const Node& alpha, const AtomInfo& info, OuterSphere& outer,
                const std::vector<Var>& context, EliminationCase* out_case) {
  EliminationCase c;
  c.tag = info.tag;
  c.sigma = info.sigma;
  Formula result = f_false();
  if (info.realizable && outer.restriction(info.radius) == info.tau1_code) {
    switch (info.tag) {
      case CaseTag::Connected:
        c.p = outer.count(info.radius, CountMode::AppendCenter, CandidateRegion::LastCenter,
                          alpha.pattern->code);
        result = c.p >= alpha.threshold ? f_true() : f_false();
        break;
      case CaseTag::Anchored:
        c.p = outer.count(info.radius, CountMode::AppendCenter, CandidateRegion::AllCenters,
                          alpha.pattern->code);
        result = c.p >= alpha.threshold ? f_true() : f_false();
        break;
      case CaseTag::Disconnected:
        c.p = outer.count(info.radius, CountMode::ReplaceLast, CandidateRegion::LastCenter,
                          info.sigma->code);
        result = f_hanf(alpha.threshold + c.p, alpha.witness, info.sigma, context);
        break;
    }
  }
  if (out_case) *out_case = c;
  return result;
}

}  // namespace

CaseTag classify_pattern(const Sphere& tau) {
  const auto& cs = tau.centers();
  const auto k = cs.size();
  if (k < 2) throw Error("case split needs at least two centers");
  const auto r = tau.declared_radius();
  const auto w = cs[k - 1];
  auto joined = [&](Element a) {
    const std::vector<Element> pair{a, w};
    return is_connected(extract_sphere(tau.carrier(), pair, r));
  };
  if (joined(cs[k - 2])) return CaseTag::Connected;
  for (std::size_t i = 0; i + 2 < k; ++i) {
    if (joined(cs[i])) return CaseTag::Anchored;
  }
  return CaseTag::Disconnected;
}

std::uint32_t count_in_sphere(const Sphere& outer, const Pattern& pattern, CountMode mode,
                              CandidateRegion region) {
  const auto need = outer.n_centers() + (mode == CountMode::AppendCenter ? 1 : 0);
  if (pattern.sphere.n_centers() != need) {
    throw Error("pattern has " + std::to_string(pattern.sphere.n_centers()) +
                " centers, expected " + std::to_string(need));
  }
  OuterSphere o(outer);
  return o.count(pattern.sphere.declared_radius(), mode, region, pattern.code);
}

Formula rewrite_hanf_atom(const Formula& alpha, const Pattern& outer,
                          const std::vector<Var>& context, EliminationCase* out_case) {
  if (alpha->kind != Kind::Hanf) throw Error("rewrite_hanf_atom needs a hanf atom");
  const auto r = alpha->pattern->sphere.declared_radius();
  if (outer.sphere.declared_radius() < 3 * r) {
    throw Error("outer sphere radius " + std::to_string(outer.sphere.declared_radius()) +
                " is below three times the pattern radius " + std::to_string(r));
  }
  if (alpha->pattern->sphere.n_centers() != outer.sphere.n_centers() + 1 ||
      context.size() + 1 != outer.sphere.n_centers()) {
    throw Error("center counts of atom, outer sphere and context do not line up");
  }
  auto info = atom_info(*alpha, std::nullopt);
  OuterSphere o(outer.sphere);
  return rewrite(*alpha, info, o, context, out_case);
}

std::string NormalizationStats::summary() const {
  std::ostringstream os;
  os << base_cases << " base cases, " << eliminations.size() << " eliminations";
  for (const auto& e : eliminations) {
    os << "; [n=" << e.context_size << " r=" << e.input_radius << "->" << e.output_radius
       << " spheres=" << e.outer_spheres << " disjuncts=" << e.disjuncts << "]";
  }
  return os.str();
}

namespace {

/// Substitutes rewritten atoms into φ for one outer sphere at a time.
/// Atoms are bucketed by (radius, code of their restriction to c̄ c_{n+1});
/// an outer sphere activates one bucket per radius and every atom outside
/// the active buckets rewrites to false, so only nodes above active atoms
/// are visited.
class Substituter {
 public:
  Substituter(const Formula& phi, std::optional<std::uint32_t> f) : root_(phi) {
    analyse(phi, f);
    std::sort(radii_.begin(), radii_.end());
    radii_.erase(std::unique(radii_.begin(), radii_.end()), radii_.end());
  }

  std::size_t atom_count() const { return atoms_.size(); }

  Formula apply(OuterSphere& outer, const std::vector<Var>& context) {
    active_.clear();
    for (auto r : radii_) {
      auto it = bucket_ids_.find({r, outer.restriction(r)});
      if (it != bucket_ids_.end()) active_.push_back(it->second);
    }
    memo_.clear();
    outer_ = &outer;
    context_ = &context;
    return visit(root_);
  }

 private:
  struct NodeInfo {
    std::vector<int> buckets;
    bool bottom = false;
    std::unordered_map<int, std::vector<std::uint32_t>> by_bucket;
    std::uint32_t absorbing = 0;
    std::unordered_map<int, std::uint32_t> absorbing_by_bucket;
  };

  const NodeInfo& analyse(const Formula& g, std::optional<std::uint32_t> f) {
    if (auto it = info_.find(g.get()); it != info_.end()) return it->second;
    NodeInfo ni;
    switch (g->kind) {
      case Kind::True:
        ni.bottom = true;
        break;
      case Kind::False:
        break;
      case Kind::Hanf: {
        auto a = atom_info(*g, f);
        if (a.realizable) {
          auto key = std::make_pair(a.radius, a.tau1_code);
          auto [it, fresh] = bucket_ids_.emplace(key, static_cast<int>(bucket_ids_.size()));
          ni.buckets.push_back(it->second);
          radii_.push_back(a.radius);
        }
        atoms_.emplace(g.get(), std::move(a));
        break;
      }
      case Kind::Not: {
        const auto& c = analyse(g->children[0], f);
        ni.buckets = c.buckets;
        ni.bottom = !c.bottom;
        break;
      }
      case Kind::And:
      case Kind::Or: {
        const bool is_and = g->kind == Kind::And;
        ni.bottom = is_and;
        for (std::uint32_t i = 0; i < g->children.size(); ++i) {
          const auto& c = analyse(g->children[i], f);
          // A child whose bottom value absorbs (false under And, true under Or).
          const bool absorbs = c.bottom != is_and;
          if (absorbs) {
            ni.bottom = !is_and;
            ++ni.absorbing;
          }
          for (auto b : c.buckets) {
            ni.by_bucket[b].push_back(i);
            if (absorbs) ++ni.absorbing_by_bucket[b];
            ni.buckets.push_back(b);
          }
        }
        std::sort(ni.buckets.begin(), ni.buckets.end());
        ni.buckets.erase(std::unique(ni.buckets.begin(), ni.buckets.end()), ni.buckets.end());
        break;
      }
      default:
        throw Error("not in Hanf normal form: " + print_formula(g));
    }
    return info_.emplace(g.get(), std::move(ni)).first->second;
  }

  bool touches(const NodeInfo& ni) const {
    for (auto b : active_) {
      if (std::binary_search(ni.buckets.begin(), ni.buckets.end(), b)) return true;
    }
    return false;
  }

  Formula visit(const Formula& g) {
    if (auto it = memo_.find(g.get()); it != memo_.end()) return it->second;
    const auto& ni = info_.at(g.get());
    Formula out;
    if (!touches(ni)) {
      out = ni.bottom ? f_true() : f_false();
    } else {
      switch (g->kind) {
        case Kind::Hanf:
          out = rewrite(*g, atoms_.at(g.get()), *outer_, *context_, nullptr);
          break;
        case Kind::Not:
          out = f_not(visit(g->children[0]));
          break;
        case Kind::And:
        case Kind::Or: {
          const bool is_and = g->kind == Kind::And;
          std::vector<std::uint32_t> idx;
          for (auto b : active_) {
            auto it = ni.by_bucket.find(b);
            if (it != ni.by_bucket.end()) idx.insert(idx.end(), it->second.begin(), it->second.end());
          }
          std::sort(idx.begin(), idx.end());
          idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
          std::uint32_t active_absorbing = 0;
          for (auto i : idx) {
            const auto& c = info_.at(g->children[i].get());
            if (c.bottom != is_and) ++active_absorbing;
          }
          if (ni.absorbing > active_absorbing) {
            out = is_and ? f_false() : f_true();
            break;
          }
          std::vector<Formula> cs;
          cs.reserve(idx.size());
          for (auto i : idx) cs.push_back(visit(g->children[i]));
          out = is_and ? f_and(std::move(cs)) : f_or(std::move(cs));
          break;
        }
        default:
          out = g;
      }
    }
    memo_.emplace(g.get(), out);
    return out;
  }

  Formula root_;
  std::unordered_map<const Node*, NodeInfo> info_;
  std::unordered_map<const Node*, AtomInfo> atoms_;
  std::map<std::pair<std::uint32_t, std::string>, int> bucket_ids_;
  std::vector<std::uint32_t> radii_;
  std::vector<int> active_;
  std::unordered_map<const Node*, Formula> memo_;
  OuterSphere* outer_ = nullptr;
  const std::vector<Var>* context_ = nullptr;
};

}  // namespace

Normalizer::Normalizer(SignaturePtr sig, NormalizationConfig cfg)
    : sig_(std::move(sig)), cfg_(cfg) {}

Normalizer::~Normalizer() = default;

const std::vector<PatternPtr>& Normalizer::spheres(std::uint32_t d, std::uint32_t n_centers) {
  auto key = std::make_pair(d, n_centers);
  auto it = sphere_cache_.find(key);
  if (it != sphere_cache_.end()) return it->second;
  std::vector<Sphere> raw;
  try {
    raw = enumerate_spheres(sig_, d, n_centers, cfg_.f, cfg_.spheres);
  } catch (const BudgetExceeded& e) {
    throw BudgetExceeded(e.what(), stats_.summary() + "; enumerating " + std::to_string(d) +
                                       "-spheres with " + std::to_string(n_centers) +
                                       " centers: " + e.partial());
  }
  std::vector<PatternPtr> out;
  out.reserve(raw.size());
  for (auto& s : raw) out.push_back(make_pattern(std::move(s)));
  return sphere_cache_.emplace(key, std::move(out)).first->second;
}

Var Normalizer::witness_for(const std::vector<Var>& context) const {
  auto taken = [&](Var v) { return std::find(context.begin(), context.end(), v) != context.end(); };
  auto w = var("w");
  for (std::size_t i = 1; taken(w); ++i) w = var("w_" + std::to_string(i));
  return w;
}

HnfFormula Normalizer::base_case_qf(const Formula& phi, const std::vector<Var>& context) {
  if (!is_quantifier_free(phi)) throw Error("base case needs a quantifier-free formula");
  for (auto v : free_variables(phi)) {
    if (std::find(context.begin(), context.end(), v) == context.end()) {
      throw Error("free variable " + var_name(v) + " is not in the context");
    }
  }
  if (phi->kind == Kind::True) return {phi, context};
  const auto n = static_cast<std::uint32_t>(context.size());
  const auto w = witness_for(context);
  std::vector<Formula> atoms;
  if (phi->kind != Kind::False) {
    for (const auto& tau : spheres(1, n + 1)) {
      Assignment asg;
      for (std::uint32_t i = 0; i < n; ++i) asg[context[i]] = tau->sphere.centers()[i];
      if (eval_fo(tau->sphere.carrier(), asg, phi)) atoms.push_back(f_hanf(1, w, tau, context));
    }
  }
  ++stats_.base_cases;
  stats_.base_case_atoms += atoms.size();
  if (cfg_.trace) {
    *cfg_.trace << "base case: context " << n << ", " << atoms.size() << " atoms\n";
  }
  return {simplify(f_or(std::move(atoms))), context};
}

HnfFormula Normalizer::eliminate_exists(const HnfFormula& phi) {
  if (phi.context.empty()) throw Error("nothing to eliminate from an empty context");
  validate_hnf(phi);
  const auto start = std::chrono::steady_clock::now();
  const auto y = phi.context.back();
  const std::vector<Var> context(phi.context.begin(), phi.context.end() - 1);
  const auto n = static_cast<std::uint32_t>(context.size());
  const auto d = std::max<std::uint32_t>(1, max_radius(phi.formula));
  const auto e = 3 * d;

  EliminationStats st;
  st.context_size = n;
  st.input_radius = d;
  const auto& outers = spheres(e, n + 1);
  st.outer_spheres = outers.size();

  Substituter sub(phi.formula, cfg_.f);
  st.atoms_in = sub.atom_count();
  std::vector<Formula> disjuncts;
  for (const auto& tp : outers) {
    OuterSphere outer(tp->sphere);
    auto local = simplify(sub.apply(outer, context));
    if (local->kind == Kind::False) continue;
    auto guard = f_hanf(1, y, tp, context);
    disjuncts.push_back(local->kind == Kind::True ? guard : simplify(f_and({guard, local})));
    if (disjuncts.size() > cfg_.max_disjuncts) {
      throw BudgetExceeded("elimination produced more than " +
                               std::to_string(cfg_.max_disjuncts) + " disjuncts",
                           stats_.summary());
    }
  }
  st.disjuncts = disjuncts.size();
  auto out = simplify(f_or(std::move(disjuncts)));
  st.output_radius = max_radius(out);
  st.atoms_out = hanf_atom_count(out);
  st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  stats_.eliminations.push_back(st);
  if (cfg_.trace) {
    *cfg_.trace << "eliminate " << var_name(y) << ": context " << n << ", radius " << d << " -> "
                << st.output_radius << ", " << st.outer_spheres << " outer spheres, "
                << st.disjuncts << " disjuncts\n";
  }
  return {out, context};
}

HnfFormula Normalizer::run(const Formula& phi, const std::vector<Var>& context) {
  if (is_quantifier_free(phi)) return base_case_qf(phi, context);
  switch (phi->kind) {
    case Kind::Not:
      return {simplify(f_not(run(phi->children[0], context).formula)), context};
    case Kind::And:
    case Kind::Or: {
      std::vector<Formula> cs;
      for (const auto& c : phi->children) cs.push_back(run(c, context).formula);
      auto f = phi->kind == Kind::And ? f_and(std::move(cs)) : f_or(std::move(cs));
      return {simplify(f), context};
    }
    case Kind::Exists:
    case Kind::Forall: {
      const auto v = phi->vars[0];
      if (std::find(context.begin(), context.end(), v) != context.end()) {
        throw Error("bound variable " + var_name(v) + " clashes with the context");
      }
      auto inner_context = context;
      inner_context.push_back(v);
      if (phi->kind == Kind::Exists) return eliminate_exists(run(phi->children[0], inner_context));
      auto negated = run(simplify(f_not(phi->children[0])), inner_context);
      return {simplify(f_not(eliminate_exists(negated).formula)), context};
    }
    case Kind::Hanf:
      if (phi->vars != context) {
        throw Error("input hanf atom " + print_formula(phi) +
                    " must be over exactly the enclosing variables");
      }
      if (degree(phi->pattern->sphere.carrier()) > cfg_.f) return {f_false(), context};
      return {simplify(phi), context};
    default:
      throw Error("cannot normalize " + print_formula(phi));
  }
}

HnfFormula Normalizer::normalize(const Formula& phi) { return normalize(phi, free_variables(phi)); }

HnfFormula Normalizer::normalize(const Formula& phi, const std::vector<Var>& context) {
  for (auto v : free_variables(phi)) {
    if (std::find(context.begin(), context.end(), v) == context.end()) {
      throw Error("free variable " + var_name(v) + " is not in the context");
    }
  }
  auto out = run(phi, context);
  validate_hnf(out);
  return out;
}

HnfFormula normalize(const Formula& phi, const SignaturePtr& sig, const NormalizationConfig& cfg) {
  return Normalizer(sig, cfg).normalize(phi);
}

}  // namespace hanf
