#include "hanf/corpus.hpp"

#include <random>
#include <unordered_map>

#include "hanf/errors.hpp"

namespace hanf {

SignaturePtr tree_signature() {
  static const SignaturePtr sig = make_signature({{"S0", 2}, {"S1", 2}, {"U", 1}});
  return sig;
}

SignaturePtr cycle_signature() {
  static const SignaturePtr sig = make_signature({{"E", 2}});
  return sig;
}

std::function<bool(const std::string&)> color_addresses(std::set<std::string> addresses) {
  return [set = std::move(addresses)](const std::string& a) { return set.count(a) > 0; };
}

std::function<bool(const std::string&)> random_coloring(std::uint64_t seed) {
  // Stateless per address so the coloring does not depend on visit order.
  return [seed](const std::string& a) {
    std::seed_seq seq(a.begin(), a.end());
    std::vector<std::uint32_t> out(1);
    seq.generate(out.begin(), out.end());
    std::mt19937_64 rng(seed ^ (std::uint64_t{out[0]} << 20) ^ a.size());
    return (rng() & 1) == 1;
  };
}

Structure make_tree(const TreeSpec& spec) {
  if (spec.height > 20) throw Error("tree height above 20");
  const auto sig = tree_signature();
  const std::uint32_t n = (1u << (spec.height + 1)) - 1;
  StructureBuilder b(sig, n);
  for (std::uint32_t depth = 0; depth <= spec.height; ++depth) {
    for (std::uint32_t value = 0; value < (1u << depth); ++value) {
      const auto index = (1u << depth) - 1 + value;
      std::string addr;
      for (std::uint32_t i = depth; i-- > 0;) addr += (value >> i & 1) ? '1' : '0';
      if (spec.coloring && spec.coloring(addr)) b.add(2, {index});
      if (depth < spec.height) {
        const auto child0 = (1u << (depth + 1)) - 1 + 2 * value;
        b.add(0, {index, child0});
        b.add(1, {index, child0 + 1});
      }
    }
  }
  return b.build();
}

Structure disjoint_union(const Structure& a, const Structure& b) {
  if (!(a.signature() == b.signature())) throw Error("disjoint union of different signatures");
  auto tuples = a.all_tuples();
  for (std::size_t r = 0; r < b.signature().size(); ++r) {
    for (auto e : b.tuples(r)) tuples[r].push_back(e + a.size());
  }
  return Structure(a.signature_ptr(), a.size() + b.size(), std::move(tuples));
}

Structure make_forest(const std::vector<TreeSpec>& specs) {
  if (specs.empty()) throw Error("a forest needs at least one tree");
  auto out = make_tree(specs[0]);
  for (std::size_t i = 1; i < specs.size(); ++i) out = disjoint_union(out, make_tree(specs[i]));
  return out;
}

Structure make_cycle(std::uint32_t k) {
  if (k < 3) throw Error("cycles need at least 3 elements");
  StructureBuilder b(cycle_signature(), k);
  for (std::uint32_t i = 0; i < k; ++i) {
    const auto j = (i + 1) % k;
    b.add(0, {i, j});
    b.add(0, {j, i});
  }
  return b.build();
}

namespace {

class Distinguisher {
 public:
  explicit Distinguisher(std::uint32_t h) : h_(h), sig_(tree_signature()) {}

  Formula build() {
    auto x = var("x_");
    auto y = var("y_");
    auto body = f_and({f_not(f_eq(x, y)), root(x, "px"), root(y, "py"), pair(x, y, "")});
    return f_not(f_exists(x, f_exists(y, std::move(body))));
  }

 private:
  Formula edge(int i, Var a, Var b) { return f_rel(*sig_, i == 0 ? "S0" : "S1", {a, b}); }

  Formula root(Var x, const std::string& tag) {
    auto p = var(tag);
    return f_not(f_exists(p, f_or({edge(0, p, x), edge(1, p, x)})));
  }

  Formula leaf(Var x, const std::string& tag) {
    auto c = var(tag);
    return f_not(f_exists(c, f_or({edge(0, x, c), edge(1, x, c)})));
  }

  /// x and y are the nodes at `addr` of two trees being compared.
  Formula pair(Var x, Var y, const std::string& addr) {
    auto ux = f_rel(*sig_, "U", {x});
    auto uy = f_rel(*sig_, "U", {y});
    std::vector<Formula> parts{f_or({f_and({ux, uy}), f_and({f_not(ux), f_not(uy)})})};
    if (addr.size() == h_) {
      parts.push_back(leaf(x, "cx_" + addr));
      parts.push_back(leaf(y, "cy_" + addr));
    } else {
      for (int i = 0; i < 2; ++i) {
        const auto child = addr + static_cast<char>('0' + i);
        auto xc = var("x_" + child);
        auto yc = var("y_" + child);
        parts.push_back(f_exists(
            xc, f_and({edge(i, x, xc),
                       f_exists(yc, f_and({edge(i, y, yc), pair(xc, yc, child)}))})));
      }
    }
    return f_and(std::move(parts));
  }

  std::uint32_t h_;
  SignaturePtr sig_;
};

}  // namespace

Formula tree_iso_distinguisher(std::uint32_t h) {
  if (h > 3) throw Error("tree_iso_distinguisher supports heights up to 3");
  return Distinguisher(h).build();
}

}  // namespace hanf
