#include "hanf/eval.hpp"

#include <algorithm>
#include <unordered_map>

#include "hanf/errors.hpp"
#include "hanf/hnf.hpp"

namespace hanf {

namespace {

struct VecHash {
  std::size_t operator()(const std::pair<std::uint32_t, std::vector<Element>>& k) const noexcept {
    std::size_t h = k.first * 0x9e3779b97f4a7c15ull;
    for (auto e : k.second) h = (h ^ e) * 0x100000001b3ull;
    return h;
  }
};

struct Extracted {
  Sphere sphere;
  std::uint64_t invariant;
};

/// S_r(tuple·b) for every b, with witnesses grouped by invariant.
struct WitnessSpheres {
  std::vector<Extracted> all;
  std::unordered_map<std::uint64_t, std::vector<Element>> by_invariant;
};

}  // namespace

struct FoEvaluator::Impl {
  const Structure& a;
  std::unordered_map<Var, Element> env;
  /// (radius, context tuple) -> S_r(tuple·b) for every b.
  std::unordered_map<std::pair<std::uint32_t, std::vector<Element>>, WitnessSpheres, VecHash>
      witnesses;
  std::pair<std::uint32_t, std::vector<Element>> last_key{0, {}};
  const WitnessSpheres* last = nullptr;
  /// (radius, full tuple) -> S_r(tuple).
  std::unordered_map<std::pair<std::uint32_t, std::vector<Element>>, Extracted, VecHash> single;

  explicit Impl(const Structure& s) : a(s) {}

  Element lookup(Var v) const {
    auto it = env.find(v);
    if (it == env.end()) throw Error("unassigned variable " + var_name(v));
    return it->second;
  }

  std::vector<Element> values(const std::vector<Var>& vs) const {
    std::vector<Element> out;
    out.reserve(vs.size());
    for (auto v : vs) out.push_back(lookup(v));
    return out;
  }

  void check_pattern(const Pattern& p) const {
    if (!(p.sphere.signature() == a.signature())) {
      throw Error("sphere atom over a different signature than the structure");
    }
  }

  bool eval(const Formula& f) {
    switch (f->kind) {
      case Kind::True:
        return true;
      case Kind::False:
        return false;
      case Kind::Rel: {
        if (f->relation >= a.signature().size() ||
            a.signature()[f->relation].name != f->relation_name) {
          throw Error("relation " + f->relation_name + " is not in the structure's signature");
        }
        auto t = values(f->vars);
        return a.holds(f->relation, t);
      }
      case Kind::Eq:
        return lookup(f->vars[0]) == lookup(f->vars[1]);
      case Kind::Not:
        return !eval(f->children[0]);
      case Kind::And:
        for (const auto& c : f->children) {
          if (!eval(c)) return false;
        }
        return true;
      case Kind::Or:
        for (const auto& c : f->children) {
          if (eval(c)) return true;
        }
        return false;
      case Kind::Exists:
      case Kind::Forall: {
        const auto v = f->vars[0];
        const bool want = f->kind == Kind::Exists;
        auto saved = env.find(v) == env.end() ? std::optional<Element>{} : std::optional<Element>{env[v]};
        bool result = !want;
        for (Element b = 0; b < a.size(); ++b) {
          env[v] = b;
          if (eval(f->children[0]) == want) {
            result = want;
            break;
          }
        }
        if (saved) {
          env[v] = *saved;
        } else {
          env.erase(v);
        }
        return result;
      }
      case Kind::Sph: {
        check_pattern(*f->pattern);
        const auto r = f->pattern->sphere.declared_radius();
        auto key = std::make_pair(r, values(f->vars));
        auto it = single.find(key);
        if (it == single.end()) {
          auto s = extract_sphere(a, key.second, r);
          auto inv = sphere_invariant(s);
          it = single.emplace(std::move(key), Extracted{std::move(s), inv}).first;
        }
        return it->second.invariant == f->pattern->invariant &&
               is_isomorphic(it->second.sphere, f->pattern->sphere);
      }
      case Kind::Hanf: {
        if (f->threshold == 0) return true;
        check_pattern(*f->pattern);
        const auto r = f->pattern->sphere.declared_radius();
        auto key = std::make_pair(r, values(f->vars));
        if (last == nullptr || key != last_key) {
          auto it = witnesses.find(key);
          if (it == witnesses.end()) {
            WitnessSpheres ws;
            ws.all.reserve(a.size());
            auto probe = key.second;
            probe.push_back(0);
            for (Element b = 0; b < a.size(); ++b) {
              probe.back() = b;
              auto s = extract_sphere(a, probe, r);
              auto inv = sphere_invariant(s);
              ws.by_invariant[inv].push_back(b);
              ws.all.push_back({std::move(s), inv});
            }
            it = witnesses.emplace(key, std::move(ws)).first;
          }
          last_key = std::move(key);
          last = &it->second;
        }
        auto bucket = last->by_invariant.find(f->pattern->invariant);
        if (bucket == last->by_invariant.end() || bucket->second.size() < f->threshold) return false;
        std::uint32_t count = 0;
        for (auto b : bucket->second) {
          if (is_isomorphic(last->all[b].sphere, f->pattern->sphere)) {
            if (++count >= f->threshold) return true;
          }
        }
        return false;
      }
    }
    return false;
  }
};

FoEvaluator::FoEvaluator(const Structure& a) : impl_(std::make_unique<Impl>(a)) {}
FoEvaluator::~FoEvaluator() = default;

bool FoEvaluator::eval(const Assignment& asg, const Formula& f) {
  impl_->env.clear();
  for (const auto& [v, e] : asg) {
    if (e >= impl_->a.size()) throw Error("variable " + var_name(v) + " assigned outside the universe");
    impl_->env[v] = e;
  }
  return impl_->eval(f);
}

bool eval_fo(const Structure& a, const Assignment& asg, const Formula& f) {
  return FoEvaluator(a).eval(asg, f);
}

struct HnfEvaluator::Impl {
  struct CNode {
    Kind kind;
    int atom = -1;
    std::vector<int> children;
    /// For Or nodes: children reachable through a guard atom, by key.
    std::unordered_map<int, std::vector<int>> guarded;
    std::vector<int> unguarded;
    bool use_index = false;
  };
  struct Atom {
    int key;
    std::uint32_t threshold;
  };

  std::vector<Var> context;
  SignaturePtr sig;
  std::vector<CNode> nodes;
  std::vector<Atom> atoms;
  /// radius -> code -> key
  std::map<std::uint32_t, std::unordered_map<std::string, int>> keys;
  int key_count = 0;
  int root = 0;

  int key_of(const Pattern& p) {
    auto& by_code = keys[p.sphere.declared_radius()];
    auto [it, fresh] = by_code.emplace(p.code, key_count);
    if (fresh) ++key_count;
    return it->second;
  }

  int compile(const Formula& f, std::unordered_map<const Node*, int>& memo) {
    if (auto it = memo.find(f.get()); it != memo.end()) return it->second;
    CNode n;
    n.kind = f->kind;
    if (f->kind == Kind::Hanf) {
      if (!sig) sig = f->pattern->sphere.carrier().signature_ptr();
      n.atom = static_cast<int>(atoms.size());
      atoms.push_back({key_of(*f->pattern), f->threshold});
    }
    for (const auto& c : f->children) n.children.push_back(compile(c, memo));
    if (f->kind == Kind::Or) {
      for (std::size_t i = 0; i < f->children.size(); ++i) {
        const auto& c = f->children[i];
        const Node* guard = nullptr;
        if (c->kind == Kind::Hanf && c->threshold >= 1) {
          guard = c.get();
        } else if (c->kind == Kind::And) {
          for (const auto& g : c->children) {
            if (g->kind == Kind::Hanf && g->threshold >= 1) {
              guard = g.get();
              break;
            }
          }
        }
        if (guard) {
          n.guarded[key_of(*guard->pattern)].push_back(n.children[i]);
        } else {
          n.unguarded.push_back(n.children[i]);
        }
      }
      n.use_index = n.children.size() > 8;
    }
    nodes.push_back(std::move(n));
    const int id = static_cast<int>(nodes.size()) - 1;
    memo.emplace(f.get(), id);
    return id;
  }

  bool eval(int id, const std::vector<std::uint32_t>& counts, const std::vector<int>& present) const {
    const auto& n = nodes[id];
    switch (n.kind) {
      case Kind::True:
        return true;
      case Kind::False:
        return false;
      case Kind::Hanf: {
        const auto& at = atoms[n.atom];
        return counts[at.key] >= at.threshold;
      }
      case Kind::Not:
        return !eval(n.children[0], counts, present);
      case Kind::And:
        for (auto c : n.children) {
          if (!eval(c, counts, present)) return false;
        }
        return true;
      case Kind::Or:
        if (!n.use_index) {
          for (auto c : n.children) {
            if (eval(c, counts, present)) return true;
          }
          return false;
        }
        for (auto c : n.unguarded) {
          if (eval(c, counts, present)) return true;
        }
        // A guarded child is false unless its guard sphere occurs.
        for (auto k : present) {
          auto it = n.guarded.find(k);
          if (it == n.guarded.end()) continue;
          for (auto c : it->second) {
            if (eval(c, counts, present)) return true;
          }
        }
        return false;
      default:
        return false;
    }
  }
};

HnfEvaluator::HnfEvaluator(const HnfFormula& psi) : impl_(std::make_unique<Impl>()) {
  validate_hnf(psi);
  impl_->context = psi.context;
  std::unordered_map<const Node*, int> memo;
  impl_->root = impl_->compile(psi.formula, memo);
}

HnfEvaluator::~HnfEvaluator() = default;
HnfEvaluator::HnfEvaluator(HnfEvaluator&&) noexcept = default;
HnfEvaluator& HnfEvaluator::operator=(HnfEvaluator&&) noexcept = default;

bool HnfEvaluator::eval(const Structure& a, const Assignment& asg) const {
  const auto& im = *impl_;
  if (im.sig && !(*im.sig == a.signature())) {
    throw Error("formula and structure use different signatures");
  }
  std::vector<Element> probe;
  for (auto v : im.context) {
    auto it = asg.find(v);
    if (it == asg.end()) throw Error("unassigned variable " + var_name(v));
    if (it->second >= a.size()) throw Error("variable " + var_name(v) + " assigned outside the universe");
    probe.push_back(it->second);
  }
  probe.push_back(0);
  std::vector<std::uint32_t> counts(im.key_count, 0);
  std::vector<int> present;
  for (const auto& [r, by_code] : im.keys) {
    for (Element b = 0; b < a.size(); ++b) {
      probe.back() = b;
      auto s = extract_sphere(a, probe, r);
      auto it = by_code.find(canonical_form(s));
      if (it != by_code.end() && counts[it->second]++ == 0) present.push_back(it->second);
    }
  }
  return im.eval(im.root, counts, present);
}

bool eval_hnf(const Structure& a, const Assignment& asg, const HnfFormula& psi) {
  return HnfEvaluator(psi).eval(a, asg);
}

std::map<std::string, std::size_t> sphere_histogram(const Structure& a, std::uint32_t d,
                                                    std::size_t cap) {
  if (d < 1) throw Error("histogram radius must be at least 1");
  if (cap < 1) throw Error("histogram cap must be at least 1");
  std::map<std::string, std::size_t> out;
  for (Element b = 0; b < a.size(); ++b) {
    const Element c[1] = {b};
    auto& slot = out[canonical_form(extract_sphere(a, c, d))];
    if (slot < cap) ++slot;
  }
  return out;
}

}  // namespace hanf
