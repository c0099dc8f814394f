#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "hanf/sphere.hpp"

namespace hanf {
namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  v *= 0xff51afd7ed558ccdull;
  v ^= v >> 33;
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

/// Individualize-and-refine search for the lexicographically least encoding
/// over all labelings compatible with the initial (center) colouring.
class Canonizer {
 public:
  Canonizer(const Structure& a, std::span<const Element> centers) : a_(a), centers_(centers) {}

  std::string run() {
    const auto k = a_.size();
    std::vector<std::uint32_t> col(k, 0);
    std::vector<Element> first;
    for (auto c : centers_) {
      if (std::find(first.begin(), first.end(), c) == first.end()) first.push_back(c);
    }
    for (Element v = 0; v < k; ++v) col[v] = static_cast<std::uint32_t>(first.size());
    for (std::size_t i = 0; i < first.size(); ++i) col[first[i]] = static_cast<std::uint32_t>(i);
    search(std::move(col));
    return render();
  }

 private:
  /// Returns the number of colour classes; colours stay dense 0..classes-1
  /// and the refined partition is ordered consistently with the input one.
  std::uint32_t refine(std::vector<std::uint32_t>& col) {
    const auto k = a_.size();
    std::uint32_t classes = count_classes(col);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> keys(k);
    std::vector<std::uint64_t> parts;
    while (classes < k) {
      for (Element v = 0; v < k; ++v) {
        parts.clear();
        for (const auto inc : a_.incidences(v)) {
          auto t = a_.tuple(inc.relation, inc.tuple);
          std::uint64_t h = mix(inc.relation + 1, t.size());
          for (auto e : t) h = mix(h, e == v ? 0xffffffffull : col[e]);
          parts.push_back(h);
        }
        std::sort(parts.begin(), parts.end());
        std::uint64_t h = parts.size();
        for (auto p : parts) h = mix(h, p);
        keys[v] = {col[v], h};
      }
      auto sorted = keys;
      std::sort(sorted.begin(), sorted.end());
      sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
      if (sorted.size() == classes) break;
      for (Element v = 0; v < k; ++v) {
        col[v] = static_cast<std::uint32_t>(
            std::lower_bound(sorted.begin(), sorted.end(), keys[v]) - sorted.begin());
      }
      classes = static_cast<std::uint32_t>(sorted.size());
    }
    return classes;
  }

  static std::uint32_t count_classes(const std::vector<std::uint32_t>& col) {
    std::uint32_t m = 0;
    for (auto c : col) m = std::max(m, c + 1);
    return m;
  }

  void search(std::vector<std::uint32_t> col) {
    const auto k = a_.size();
    if (refine(col) == k) {
      leaf(col);
      return;
    }
    // First colour with more than one member.
    std::vector<std::uint32_t> members(k, 0);
    for (auto c : col) ++members[c];
    std::uint32_t cell = 0;
    while (members[cell] < 2) ++cell;
    for (Element v = 0; v < k; ++v) {
      if (col[v] != cell) continue;
      auto next = col;
      for (Element w = 0; w < k; ++w) {
        if (col[w] > cell || (col[w] == cell && w != v)) ++next[w];
      }
      search(std::move(next));
    }
  }

  void leaf(const std::vector<std::uint32_t>& lab) {
    std::vector<std::uint32_t> code;
    code.push_back(a_.size());
    code.push_back(static_cast<std::uint32_t>(centers_.size()));
    for (auto c : centers_) code.push_back(lab[c]);
    std::vector<std::uint32_t> rel;
    for (std::size_t r = 0; r < a_.signature().size(); ++r) {
      const auto arity = a_.arity(r);
      const auto n = a_.tuple_count(r);
      code.push_back(static_cast<std::uint32_t>(n));
      rel.clear();
      for (auto e : a_.tuples(r)) rel.push_back(lab[e]);
      std::vector<std::uint32_t> order(n);
      for (std::uint32_t i = 0; i < n; ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](auto x, auto y) {
        return std::lexicographical_compare(rel.begin() + x * arity, rel.begin() + (x + 1) * arity,
                                            rel.begin() + y * arity, rel.begin() + (y + 1) * arity);
      });
      for (auto i : order) code.insert(code.end(), rel.begin() + i * arity, rel.begin() + (i + 1) * arity);
      if (!best_.empty() && std::lexicographical_compare(best_.begin(), best_.end(), code.begin(), code.end())) {
        return;
      }
    }
    if (best_.empty() || code < best_) best_ = std::move(code);
  }

  std::string render() const {
    // k;centers;rel0;rel1... with tuples joined by '.' and separated by ','.
    std::string out;
    std::size_t pos = 0;
    out += std::to_string(best_[pos++]);
    const auto n = best_[pos++];
    out += ';';
    for (std::uint32_t i = 0; i < n; ++i) {
      if (i) out += ',';
      out += std::to_string(best_[pos++]);
    }
    for (std::size_t r = 0; r < a_.signature().size(); ++r) {
      out += ';';
      const auto count = best_[pos++];
      const auto arity = a_.arity(r);
      for (std::uint32_t t = 0; t < count; ++t) {
        if (t) out += ',';
        for (std::uint32_t j = 0; j < arity; ++j) {
          if (j) out += '.';
          out += std::to_string(best_[pos++]);
        }
      }
    }
    return out;
  }

  const Structure& a_;
  std::span<const Element> centers_;
  std::vector<std::uint32_t> best_;
};

}  // namespace

std::string canonical_form(const Structure& carrier, std::span<const Element> centers) {
  return Canonizer(carrier, centers).run();
}

std::string canonical_form(const Sphere& s) { return canonical_form(s.carrier(), s.centers()); }

}  // namespace hanf
