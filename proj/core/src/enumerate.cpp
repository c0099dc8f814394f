#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hanf/errors.hpp"
#include "hanf/sphere.hpp"

namespace hanf {
namespace {

using Mask = std::uint64_t;

Mask bit(std::uint32_t i) { return Mask{1} << i; }

/// Enumerates d-spheres by growing Gaifman skeletons layer by layer outward
/// from the distinct centers, then decorating each skeleton with every tuple
/// set whose Gaifman graph is exactly that skeleton.
class SphereEnumerator {
 public:
  SphereEnumerator(const SignaturePtr& sig, std::uint32_t d, std::uint32_t n, std::uint32_t f,
                   const EnumerationBudget& budget)
      : sig_(sig), d_(d), n_(n), f_(f), budget_(budget) {}

  std::vector<Sphere> run() {
    std::vector<Element> rgs(n_, 0);
    for_each_partition(rgs, 1, 0);
    std::vector<Sphere> out;
    out.reserve(found_.size());
    for (auto& [code, s] : found_) out.push_back(std::move(s));
    return out;
  }

 private:
  /// Restricted growth strings assign each center position a distinct-center id.
  void for_each_partition(std::vector<Element>& rgs, std::uint32_t pos, Element max_id) {
    if (pos == n_) {
      centers_ = rgs;
      const auto c = max_id + 1;
      std::vector<Mask> adj(c, 0);
      choose_intra_edges(adj, 0, c, [&](std::vector<Mask>& a) { grow(a, 0, 0, c); });
      return;
    }
    for (Element v = 0; v <= max_id + 1; ++v) {
      rgs[pos] = v;
      for_each_partition(rgs, pos + 1, std::max(max_id, v));
    }
  }

  std::uint32_t deg(const std::vector<Mask>& adj, Element u) const {
    return static_cast<std::uint32_t>(std::popcount(adj[u]));
  }

  /// Every edge set among [lo, hi) keeping all degrees <= f.
  void choose_intra_edges(std::vector<Mask>& adj, Element lo, Element hi,
                          const std::function<void(std::vector<Mask>&)>& next) {
    std::vector<std::pair<Element, Element>> pairs;
    for (Element u = lo; u < hi; ++u) {
      for (Element v = u + 1; v < hi; ++v) pairs.emplace_back(u, v);
    }
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == pairs.size()) {
        next(adj);
        return;
      }
      rec(i + 1);
      auto [u, v] = pairs[i];
      if (deg(adj, u) < f_ && deg(adj, v) < f_) {
        adj[u] |= bit(v);
        adj[v] |= bit(u);
        rec(i + 1);
        adj[u] &= ~bit(v);
        adj[v] &= ~bit(u);
      }
    };
    rec(0);
  }

  /// Layer `layer` occupies [lo, hi). Adds the next layer as a multiset of
  /// attachment masks in non-decreasing order, or stops growing.
  void grow(std::vector<Mask>& adj, std::uint32_t layer, Element lo, Element hi) {
    if (layer + 1 == d_) {
      decorate(adj);
      return;
    }
    std::vector<Mask> attach;
    std::vector<std::uint32_t> used(adj.size(), 0);
    std::function<void(Mask)> rec = [&](Mask from) {
      if (attach.empty()) {
        decorate(adj);
      } else {
        const auto k = static_cast<Element>(adj.size());
        for (auto m : attach) {
          const auto w = static_cast<Element>(adj.size());
          adj.push_back(m);
          for (Element u = lo; u < hi; ++u) {
            if (m & bit(u)) adj[u] |= bit(w);
          }
        }
        choose_intra_edges(adj, k, static_cast<Element>(adj.size()),
                           [&](std::vector<Mask>& a) { grow(a, layer + 1, k, static_cast<Element>(a.size())); });
        for (Element w = static_cast<Element>(adj.size()); w-- > k;) {
          for (Element u = lo; u < hi; ++u) adj[u] &= ~bit(w);
        }
        adj.resize(k);
      }
      Mask avail = 0;
      for (Element u = lo; u < hi; ++u) {
        if (deg(adj, u) + used[u] < f_) avail |= bit(u);
      }
      if (avail == 0) return;
      if (adj.size() + attach.size() + 1 > budget_.max_carrier) {
        throw BudgetExceeded("sphere carrier exceeds " + std::to_string(budget_.max_carrier) +
                                 " elements",
                             std::to_string(found_.size()) + " spheres found");
      }
      // Nonempty submasks of avail in increasing order.
      for (Mask m = (Mask{0} - avail) & avail; m != 0; m = (m - avail) & avail) {
        if (m < from || static_cast<std::uint32_t>(std::popcount(m)) > f_) continue;
        for (Element u = lo; u < hi; ++u) {
          if (m & bit(u)) ++used[u];
        }
        attach.push_back(m);
        rec(m);
        attach.pop_back();
        for (Element u = lo; u < hi; ++u) {
          if (m & bit(u)) --used[u];
        }
      }
    };
    rec(0);
  }

  void decorate(const std::vector<Mask>& adj) {
    const auto k = static_cast<Element>(adj.size());
    const auto& sig = *sig_;
    struct Candidate {
      std::uint32_t relation;
      std::vector<Element> tuple;
      std::vector<std::uint32_t> edges;
    };
    std::vector<std::pair<Element, Element>> edges;
    std::vector<std::vector<std::uint32_t>> edge_id(k, std::vector<std::uint32_t>(k, 0));
    for (Element u = 0; u < k; ++u) {
      for (Element v = u + 1; v < k; ++v) {
        if (adj[u] & bit(v)) {
          edge_id[u][v] = edge_id[v][u] = static_cast<std::uint32_t>(edges.size());
          edges.emplace_back(u, v);
        }
      }
    }
    std::vector<Candidate> free_tuples;
    std::vector<Candidate> covering;
    for (std::uint32_t r = 0; r < sig.size(); ++r) {
      const auto arity = sig[r].arity;
      std::vector<Element> t(arity, 0);
      while (true) {
        bool clique = true;
        std::vector<std::uint32_t> covered;
        for (std::uint32_t i = 0; i < arity && clique; ++i) {
          for (std::uint32_t j = 0; j < arity; ++j) {
            if (t[i] == t[j]) continue;
            if (!(adj[t[i]] & bit(t[j]))) {
              clique = false;
              break;
            }
            if (t[i] < t[j]) covered.push_back(edge_id[t[i]][t[j]]);
          }
        }
        if (clique) {
          std::sort(covered.begin(), covered.end());
          covered.erase(std::unique(covered.begin(), covered.end()), covered.end());
          (covered.empty() ? free_tuples : covering).push_back({r, t, std::move(covered)});
        }
        std::uint32_t i = 0;
        while (i < arity && ++t[i] == k) t[i++] = 0;
        if (i == arity) break;
      }
    }
    if (free_tuples.size() > 30 || covering.size() > 62) {
      throw BudgetExceeded("too many candidate tuples on a " + std::to_string(k) +
                               "-element skeleton",
                           std::to_string(found_.size()) + " spheres found");
    }
    // last_cover[e]: index of the last covering tuple that covers edge e.
    std::vector<std::size_t> last_cover(edges.size(), covering.size());
    for (std::size_t i = 0; i < covering.size(); ++i) {
      for (auto e : covering[i].edges) last_cover[e] = i;
    }
    // A skeleton edge no tuple can realize makes the skeleton unrealizable.
    for (auto i : last_cover) {
      if (i == covering.size()) return;
    }
    std::vector<std::uint32_t> cover_count(edges.size(), 0);
    std::vector<const Candidate*> chosen;
    auto emit = [&]() {
      const std::size_t free_n = free_tuples.size();
      for (std::uint64_t sub = 0; sub < (std::uint64_t{1} << free_n); ++sub) {
        if (++candidates_ > budget_.max_candidates) {
          throw BudgetExceeded("sphere enumeration examined more than " +
                                   std::to_string(budget_.max_candidates) + " candidates",
                               std::to_string(found_.size()) + " spheres found");
        }
        std::vector<std::vector<Element>> tuples(sig.size());
        for (const auto* c : chosen) {
          tuples[c->relation].insert(tuples[c->relation].end(), c->tuple.begin(), c->tuple.end());
        }
        for (std::size_t i = 0; i < free_n; ++i) {
          if (sub & (std::uint64_t{1} << i)) {
            const auto& c = free_tuples[i];
            tuples[c.relation].insert(tuples[c.relation].end(), c.tuple.begin(), c.tuple.end());
          }
        }
        Structure carrier(sig_, k, std::move(tuples));
        auto code = canonical_form(carrier, centers_);
        if (found_.find(code) != found_.end()) continue;
        if (found_.size() >= budget_.max_spheres) {
          throw BudgetExceeded("more than " + std::to_string(budget_.max_spheres) + " spheres",
                               std::to_string(found_.size()) + " spheres found");
        }
        found_.emplace(std::move(code),
                       Sphere(Sphere::Unchecked{}, std::move(carrier), centers_, d_));
      }
    };
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == covering.size()) {
        emit();
        return;
      }
      const auto& c = covering[i];
      chosen.push_back(&c);
      for (auto e : c.edges) ++cover_count[e];
      rec(i + 1);
      for (auto e : c.edges) --cover_count[e];
      chosen.pop_back();
      for (auto e : c.edges) {
        if (last_cover[e] == i && cover_count[e] == 0) return;
      }
      rec(i + 1);
    };
    rec(0);
  }

  SignaturePtr sig_;
  std::uint32_t d_;
  std::uint32_t n_;
  std::uint32_t f_;
  EnumerationBudget budget_;
  std::vector<Element> centers_;
  std::map<std::string, Sphere> found_;
  std::size_t candidates_ = 0;
};

}  // namespace

std::vector<Sphere> enumerate_spheres(const SignaturePtr& sig, std::uint32_t d,
                                      std::uint32_t n_centers, std::uint32_t f,
                                      const EnumerationBudget& budget) {
  if (d < 1) throw Error("sphere radius must be at least 1");
  if (n_centers < 1) throw Error("spheres need at least one center");
  if (budget.max_carrier > 64) throw Error("carrier cap above 64 is not supported");
  return SphereEnumerator(sig, d, n_centers, f, budget).run();
}

}  // namespace hanf
