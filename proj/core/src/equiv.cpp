#include <algorithm>
#include <atomic>
#include <bit>
#include <random>
#include <thread>
#include <unordered_set>

#include "hanf/errors.hpp"
#include "hanf/eval.hpp"
#include "hanf/hnf.hpp"

namespace hanf {

namespace {

struct Candidates {
  std::vector<std::pair<std::uint32_t, std::vector<Element>>> free;
  std::vector<std::pair<std::uint32_t, std::vector<Element>>> covering;
};

Candidates candidate_tuples(const Signature& sig, std::uint32_t size) {
  Candidates out;
  for (std::uint32_t r = 0; r < sig.size(); ++r) {
    const auto arity = sig[r].arity;
    std::vector<Element> t(arity, 0);
    while (true) {
      const bool single = std::all_of(t.begin(), t.end(), [&](Element e) { return e == t[0]; });
      (single ? out.free : out.covering).emplace_back(r, t);
      std::uint32_t i = arity;
      while (i > 0 && ++t[i - 1] == size) t[--i] = 0;
      if (i == 0) break;
    }
  }
  return out;
}

/// Adds the Gaifman edges of `t` to `adj`; false if some degree exceeds f.
bool add_edges(std::vector<std::vector<bool>>& adj, std::vector<std::uint32_t>& deg,
               const std::vector<Element>& t, std::uint32_t f, bool commit) {
  std::vector<std::pair<Element, Element>> fresh;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = i + 1; j < t.size(); ++j) {
      auto u = std::min(t[i], t[j]);
      auto v = std::max(t[i], t[j]);
      if (u == v || adj[u][v]) continue;
      if (std::find(fresh.begin(), fresh.end(), std::make_pair(u, v)) == fresh.end()) {
        fresh.emplace_back(u, v);
      }
    }
  }
  std::vector<std::uint32_t> extra(deg.size(), 0);
  for (auto [u, v] : fresh) {
    if (deg[u] + ++extra[u] > f || deg[v] + ++extra[v] > f) return false;
  }
  if (commit) {
    for (auto [u, v] : fresh) {
      adj[u][v] = adj[v][u] = true;
      ++deg[u];
      ++deg[v];
    }
  }
  return true;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

void enumerate_structures(const SignaturePtr& sig, std::uint32_t max_size, std::uint32_t f,
                          const std::function<bool(const Structure&)>& visit,
                          std::uint32_t max_bits) {
  for (std::uint32_t size = 1; size <= max_size; ++size) {
    const auto cand = candidate_tuples(*sig, size);
    const auto cn = cand.covering.size();
    const auto fn = cand.free.size();
    if (cn + fn > max_bits || size > 64) {
      throw BudgetExceeded("structures of size " + std::to_string(size) + " need " +
                           std::to_string(cn + fn) + " bits, cap is " + std::to_string(max_bits));
    }
    // Gaifman edges of each covering tuple as (u, v) bitmasks.
    std::vector<std::vector<std::pair<Element, Element>>> edges(cn);
    for (std::size_t i = 0; i < cn; ++i) {
      const auto& t = cand.covering[i].second;
      for (std::size_t a = 0; a < t.size(); ++a) {
        for (std::size_t b = 0; b < t.size(); ++b) {
          if (t[a] != t[b]) edges[i].emplace_back(t[a], t[b]);
        }
      }
    }
    std::vector<std::uint64_t> adj(size);
    for (std::uint64_t cm = 0; cm < (std::uint64_t{1} << cn); ++cm) {
      std::fill(adj.begin(), adj.end(), 0);
      for (std::size_t i = 0; i < cn; ++i) {
        if (cm >> i & 1) {
          for (auto [u, v] : edges[i]) adj[u] |= std::uint64_t{1} << v;
        }
      }
      bool ok = true;
      for (auto m : adj) {
        if (static_cast<std::uint32_t>(std::popcount(m)) > f) ok = false;
      }
      if (!ok) continue;
      for (std::uint64_t fm = 0; fm < (std::uint64_t{1} << fn); ++fm) {
        std::vector<std::vector<Element>> tuples(sig->size());
        for (std::size_t i = 0; i < cn; ++i) {
          if (cm >> i & 1) {
            const auto& [r, t] = cand.covering[i];
            tuples[r].insert(tuples[r].end(), t.begin(), t.end());
          }
        }
        for (std::size_t i = 0; i < fn; ++i) {
          if (fm >> i & 1) {
            const auto& [r, t] = cand.free[i];
            tuples[r].insert(tuples[r].end(), t.begin(), t.end());
          }
        }
        if (!visit(Structure(sig, size, std::move(tuples)))) return;
      }
    }
  }
}

void enumerate_structures_up_to_isomorphism(const SignaturePtr& sig, std::uint32_t max_size,
                                            std::uint32_t f,
                                            const std::function<bool(const Structure&)>& visit,
                                            std::uint32_t max_bits) {
  std::unordered_set<std::string> seen;
  std::uint32_t current = 0;
  enumerate_structures(
      sig, max_size, f,
      [&](const Structure& a) {
        if (a.size() != current) {
          seen.clear();
          current = a.size();
        }
        if (!seen.insert(canonical_form(a, {})).second) return true;
        return visit(a);
      },
      max_bits);
}

Structure random_structure(const SignaturePtr& sig, std::uint32_t size, std::uint32_t f,
                           std::uint64_t seed) {
  if (size < 1) throw Error("structures need at least one element");
  std::mt19937_64 rng(seed);
  auto cand = candidate_tuples(*sig, size);
  auto all = std::move(cand.covering);
  all.insert(all.end(), cand.free.begin(), cand.free.end());
  std::sort(all.begin(), all.end());
  // Fisher-Yates with the engine's raw output so the order is portable.
  for (std::size_t i = all.size(); i > 1; --i) std::swap(all[i - 1], all[rng() % i]);
  std::vector<std::vector<bool>> adj(size, std::vector<bool>(size, false));
  std::vector<std::uint32_t> deg(size, 0);
  std::vector<std::vector<Element>> tuples(sig->size());
  for (const auto& [r, t] : all) {
    if ((rng() & 1) == 0) continue;
    if (!add_edges(adj, deg, t, f, true)) continue;
    tuples[r].insert(tuples[r].end(), t.begin(), t.end());
  }
  return Structure(sig, size, std::move(tuples));
}

Structure equiv_sample(const SignaturePtr& sig, std::uint32_t f, const EquivBudget& budget,
                       std::size_t i) {
  if (budget.sample_min_size < 1 || budget.sample_min_size > budget.sample_max_size) {
    throw Error("bad sample size range");
  }
  const auto h = splitmix(budget.seed ^ splitmix(i));
  const auto span = budget.sample_max_size - budget.sample_min_size + 1;
  const auto size = budget.sample_min_size + static_cast<std::uint32_t>(h % span);
  return random_structure(sig, size, f, splitmix(h));
}

namespace {

class Side {
 public:
  explicit Side(const Formula& f) : f_(f) {
    if (auto psi = as_hnf(f)) hnf_.emplace(*psi);
  }

  bool eval(const Structure& a, const Assignment& asg, std::unique_ptr<FoEvaluator>& fo) const {
    if (hnf_) return hnf_->eval(a, asg);
    if (!fo) fo = std::make_unique<FoEvaluator>(a);
    return fo->eval(asg, f_);
  }

 private:
  Formula f_;
  std::optional<HnfEvaluator> hnf_;
};

struct Outcome {
  bool agree = true;
  Assignment assignment;
  std::size_t assignments = 0;
};

Outcome check_structure(const Structure& a, const std::vector<Var>& vars, const Side& lhs,
                        const Side& rhs) {
  Outcome out;
  std::unique_ptr<FoEvaluator> fl;
  std::unique_ptr<FoEvaluator> fr;
  std::vector<Element> values(vars.size(), 0);
  while (true) {
    Assignment asg;
    for (std::size_t i = 0; i < vars.size(); ++i) asg[vars[i]] = values[i];
    ++out.assignments;
    if (lhs.eval(a, asg, fl) != rhs.eval(a, asg, fr)) {
      out.agree = false;
      out.assignment = std::move(asg);
      return out;
    }
    std::size_t i = vars.size();
    while (i > 0 && ++values[i - 1] == a.size()) values[--i] = 0;
    if (i == 0) break;
  }
  return out;
}

}  // namespace

EquivVerdict check_f_equiv(const Formula& lhs, const Formula& rhs, const SignaturePtr& sig,
                           std::uint32_t f, const EquivBudget& budget) {
  auto fl = free_variables(lhs);
  auto fr = free_variables(rhs);
  auto contains = [](const std::vector<Var>& big, const std::vector<Var>& small) {
    return std::all_of(small.begin(), small.end(), [&](Var v) {
      return std::find(big.begin(), big.end(), v) != big.end();
    });
  };
  if (!contains(fl, fr) && !contains(fr, fl)) {
    throw Error("the two formulas have incomparable free variables");
  }
  auto vars = fl.size() >= fr.size() ? fl : fr;
  const Side left(lhs);
  const Side right(rhs);

  EquivVerdict verdict;
  auto record = [&](const Structure& a) {
    auto o = check_structure(a, vars, left, right);
    ++verdict.structures_checked;
    verdict.assignments_checked += o.assignments;
    if (!o.agree) {
      verdict.status = EquivStatus::Counterexample;
      verdict.structure = a;
      verdict.assignment = std::move(o.assignment);
      return false;
    }
    return true;
  };

  const auto jobs = std::max<std::uint32_t>(1, budget.jobs);
  if (jobs == 1) {
    enumerate_structures(sig, budget.exhaustive_max_size, f, record);
    for (std::size_t i = 0; i < budget.sample_count && verdict.status == EquivStatus::Equivalent; ++i) {
      record(equiv_sample(sig, f, budget, i));
    }
    return verdict;
  }

  std::vector<Structure> all;
  enumerate_structures(sig, budget.exhaustive_max_size, f, [&](const Structure& a) {
    all.push_back(a);
    return true;
  });
  for (std::size_t i = 0; i < budget.sample_count; ++i) all.push_back(equiv_sample(sig, f, budget, i));
  // Workers take structures round-robin; the lowest failing index wins.
  std::atomic<std::size_t> first_bad{all.size()};
  std::vector<std::thread> pool;
  for (std::uint32_t w = 0; w < jobs; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < all.size(); i += jobs) {
        if (i > first_bad.load()) return;
        if (!check_structure(all[i], vars, left, right).agree) {
          auto cur = first_bad.load();
          while (i < cur && !first_bad.compare_exchange_weak(cur, i)) {
          }
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  const auto bad = first_bad.load();
  for (std::size_t i = 0; i < std::min(bad, all.size()); ++i) {
    std::size_t n = 1;
    for (std::size_t k = 0; k < vars.size(); ++k) n *= all[i].size();
    ++verdict.structures_checked;
    verdict.assignments_checked += n;
  }
  if (bad < all.size()) record(all[bad]);
  return verdict;
}

}  // namespace hanf
