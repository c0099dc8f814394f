#include "hanf/formula.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

#include "hanf/errors.hpp"

namespace hanf {

namespace {

struct VarTable {
  std::mutex mu;
  std::deque<std::string> names;
  std::unordered_map<std::string_view, std::uint32_t> ids;
};

VarTable& var_table() {
  static VarTable table;
  return table;
}

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
}

std::size_t hash_string(std::string_view s) { return std::hash<std::string_view>{}(s); }

Formula finish(Node n) {
  std::size_t h = static_cast<std::size_t>(n.kind) + 1;
  h = mix(h, n.relation);
  for (auto v : n.vars) h = mix(h, v.id);
  for (const auto& c : n.children) h = mix(h, c->hash);
  h = mix(h, n.threshold);
  h = mix(h, n.witness.id);
  if (n.pattern) {
    h = mix(h, hash_string(n.pattern->code));
    h = mix(h, n.pattern->sphere.declared_radius());
  }
  n.hash = h;
  return std::make_shared<const Node>(std::move(n));
}

Formula constant(bool value) {
  Node n;
  n.kind = value ? Kind::True : Kind::False;
  return finish(std::move(n));
}

}  // namespace

Var var(std::string_view name) {
  auto& t = var_table();
  std::lock_guard lock(t.mu);
  if (auto it = t.ids.find(name); it != t.ids.end()) return Var{it->second};
  const auto id = static_cast<std::uint32_t>(t.names.size());
  t.names.emplace_back(name);
  t.ids.emplace(t.names.back(), id);
  return Var{id};
}

const std::string& var_name(Var v) {
  auto& t = var_table();
  std::lock_guard lock(t.mu);
  return t.names.at(v.id);
}

PatternPtr make_pattern(Sphere s) {
  auto code = canonical_form(s);
  auto inv = sphere_invariant(s);
  return std::make_shared<const Pattern>(Pattern{std::move(s), std::move(code), inv});
}

Formula f_true() {
  static const Formula t = constant(true);
  return t;
}

Formula f_false() {
  static const Formula f = constant(false);
  return f;
}

Formula f_rel(const Signature& sig, std::string_view name, std::vector<Var> args) {
  const auto r = sig.index_of(name);
  if (sig[r].arity != args.size()) {
    throw Error("relation " + std::string(name) + " has arity " + std::to_string(sig[r].arity) +
                ", got " + std::to_string(args.size()) + " arguments");
  }
  return f_rel(static_cast<std::uint32_t>(r), std::string(name), std::move(args));
}

Formula f_rel(std::uint32_t relation, std::string name, std::vector<Var> args) {
  Node n;
  n.kind = Kind::Rel;
  n.relation = relation;
  n.relation_name = std::move(name);
  n.vars = std::move(args);
  return finish(std::move(n));
}

Formula f_eq(Var x, Var y) {
  Node n;
  n.kind = Kind::Eq;
  n.vars = {x, y};
  return finish(std::move(n));
}

Formula f_not(Formula f) {
  Node n;
  n.kind = Kind::Not;
  n.children = {std::move(f)};
  return finish(std::move(n));
}

Formula f_and(std::vector<Formula> children) {
  Node n;
  n.kind = Kind::And;
  n.children = std::move(children);
  return finish(std::move(n));
}

Formula f_or(std::vector<Formula> children) {
  Node n;
  n.kind = Kind::Or;
  n.children = std::move(children);
  return finish(std::move(n));
}

Formula f_exists(Var v, Formula body) {
  Node n;
  n.kind = Kind::Exists;
  n.vars = {v};
  n.children = {std::move(body)};
  return finish(std::move(n));
}

Formula f_forall(Var v, Formula body) {
  Node n;
  n.kind = Kind::Forall;
  n.vars = {v};
  n.children = {std::move(body)};
  return finish(std::move(n));
}

Formula f_hanf(std::uint32_t threshold, Var witness, PatternPtr pattern, std::vector<Var> context) {
  if (pattern->sphere.n_centers() != context.size() + 1) {
    throw Error("hanf atom over " + std::to_string(context.size()) +
                " context variables needs a sphere with " + std::to_string(context.size() + 1) +
                " centers, got " + std::to_string(pattern->sphere.n_centers()));
  }
  Node n;
  n.kind = Kind::Hanf;
  n.threshold = threshold;
  n.witness = witness;
  n.pattern = std::move(pattern);
  n.vars = std::move(context);
  return finish(std::move(n));
}

Formula f_sph(PatternPtr pattern, std::vector<Var> vars) {
  if (pattern->sphere.n_centers() != vars.size()) {
    throw Error("sphere atom needs one variable per center");
  }
  Node n;
  n.kind = Kind::Sph;
  n.pattern = std::move(pattern);
  n.vars = std::move(vars);
  return finish(std::move(n));
}

bool structurally_equal(const Formula& a, const Formula& b) {
  if (a == b) return true;
  if (a->hash != b->hash || a->kind != b->kind || a->relation != b->relation ||
      a->vars != b->vars || a->threshold != b->threshold || a->witness != b->witness ||
      a->children.size() != b->children.size()) {
    return false;
  }
  if (a->pattern || b->pattern) {
    if (!a->pattern || !b->pattern) return false;
    if (a->pattern != b->pattern &&
        (a->pattern->code != b->pattern->code ||
         a->pattern->sphere.declared_radius() != b->pattern->sphere.declared_radius())) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a->children.size(); ++i) {
    if (!structurally_equal(a->children[i], b->children[i])) return false;
  }
  return true;
}

std::vector<Var> free_variables(const Formula& f) {
  std::vector<Var> out;
  std::vector<Var> bound;
  auto note = [&](Var v) {
    if (std::find(bound.begin(), bound.end(), v) != bound.end()) return;
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  };
  std::function<void(const Formula&)> walk = [&](const Formula& g) {
    switch (g->kind) {
      case Kind::True:
      case Kind::False:
        return;
      case Kind::Rel:
      case Kind::Eq:
      case Kind::Sph:
      case Kind::Hanf:
        for (auto v : g->vars) note(v);
        return;
      case Kind::Not:
      case Kind::And:
      case Kind::Or:
        for (const auto& c : g->children) walk(c);
        return;
      case Kind::Exists:
      case Kind::Forall:
        bound.push_back(g->vars[0]);
        walk(g->children[0]);
        bound.pop_back();
        return;
    }
  };
  walk(f);
  return out;
}

std::uint32_t quantifier_rank(const Formula& f) {
  std::uint32_t inner = 0;
  for (const auto& c : f->children) inner = std::max(inner, quantifier_rank(c));
  switch (f->kind) {
    case Kind::Exists:
    case Kind::Forall:
      return inner + 1;
    case Kind::Hanf:
      return 1;
    default:
      return inner;
  }
}

namespace {

std::uint64_t sphere_cost(const Sphere& s) {
  std::uint64_t cost = 1 + s.carrier().size();
  for (std::size_t r = 0; r < s.signature().size(); ++r) cost += s.carrier().tuple_count(r);
  return cost;
}

}  // namespace

FormulaSize formula_size(const Formula& f) {
  std::unordered_map<const Node*, FormulaSize> memo;
  std::function<FormulaSize(const Formula&)> walk = [&](const Formula& g) -> FormulaSize {
    if (auto it = memo.find(g.get()); it != memo.end()) return it->second;
    FormulaSize s{1, 1};
    for (const auto& c : g->children) {
      auto cs = walk(c);
      s.ast += cs.ast;
      s.expanded += cs.expanded;
    }
    if (g->kind == Kind::Hanf) {
      const std::uint64_t m = g->threshold;
      // m binders, the conjunction, m(m-1)/2 negated equalities, the guard
      // (forall, implication as or+not, the disjunction of m equalities)
      // and the sphere atom.
      s.expanded = m + 1 + m * (m - 1) + 3 + 1 + m + sphere_cost(g->pattern->sphere);
    } else if (g->kind == Kind::Sph) {
      s.expanded = sphere_cost(g->pattern->sphere);
    }
    memo.emplace(g.get(), s);
    return s;
  };
  return walk(f);
}

bool is_quantifier_free(const Formula& f) {
  switch (f->kind) {
    case Kind::Exists:
    case Kind::Forall:
    case Kind::Hanf:
    case Kind::Sph:
      return false;
    default:
      return std::all_of(f->children.begin(), f->children.end(),
                         [](const Formula& c) { return is_quantifier_free(c); });
  }
}

namespace {

std::unordered_set<Var> all_variables(const Formula& f) {
  std::unordered_set<Var> out;
  std::function<void(const Formula&)> walk = [&](const Formula& g) {
    for (auto v : g->vars) out.insert(v);
    if (g->kind == Kind::Hanf) out.insert(g->witness);
    for (const auto& c : g->children) walk(c);
  };
  walk(f);
  return out;
}

Var fresh(std::string_view base, std::unordered_set<Var>& taken) {
  for (std::size_t i = 1;; ++i) {
    auto v = var(std::string(base) + "_" + std::to_string(i));
    if (taken.insert(v).second) return v;
  }
}

}  // namespace

Formula expand_counting(const Formula& h) {
  if (h->kind != Kind::Hanf) throw Error("expand_counting needs a hanf atom");
  if (h->threshold == 0) throw Error("expand_counting needs a threshold of at least 1");
  auto taken = all_variables(h);
  const auto m = h->threshold;
  std::vector<Var> witnesses;
  for (std::uint32_t i = 0; i < m; ++i) witnesses.push_back(fresh(var_name(h->witness), taken));
  const auto x = fresh(var_name(h->witness), taken);

  std::vector<Formula> distinct;
  for (std::uint32_t i = 0; i < m; ++i) {
    for (std::uint32_t j = i + 1; j < m; ++j) distinct.push_back(f_not(f_eq(witnesses[i], witnesses[j])));
  }
  std::vector<Formula> equal_some;
  for (auto w : witnesses) equal_some.push_back(f_eq(x, w));
  auto centers = h->vars;
  centers.push_back(x);
  auto guard = f_forall(x, f_or({f_not(f_or(std::move(equal_some))), f_sph(h->pattern, centers)}));
  distinct.push_back(std::move(guard));
  Formula body = f_and(std::move(distinct));
  for (std::uint32_t i = m; i-- > 0;) body = f_exists(witnesses[i], std::move(body));
  return body;
}

std::uint32_t max_radius(const Formula& f) {
  std::unordered_set<const Node*> seen;
  std::uint32_t best = 0;
  std::function<void(const Formula&)> walk = [&](const Formula& g) {
    if (!seen.insert(g.get()).second) return;
    if (g->pattern) best = std::max(best, g->pattern->sphere.declared_radius());
    for (const auto& c : g->children) walk(c);
  };
  walk(f);
  return best;
}

std::uint32_t max_threshold(const Formula& f) {
  std::unordered_set<const Node*> seen;
  std::uint32_t best = 0;
  std::function<void(const Formula&)> walk = [&](const Formula& g) {
    if (!seen.insert(g.get()).second) return;
    if (g->kind == Kind::Hanf) best = std::max(best, g->threshold);
    for (const auto& c : g->children) walk(c);
  };
  walk(f);
  return best;
}

std::size_t hanf_atom_count(const Formula& f) {
  std::unordered_map<const Node*, std::size_t> memo;
  std::function<std::size_t(const Formula&)> walk = [&](const Formula& g) -> std::size_t {
    if (auto it = memo.find(g.get()); it != memo.end()) return it->second;
    std::size_t n = g->kind == Kind::Hanf ? 1 : 0;
    for (const auto& c : g->children) n += walk(c);
    memo.emplace(g.get(), n);
    return n;
  };
  return walk(f);
}

}  // namespace hanf
