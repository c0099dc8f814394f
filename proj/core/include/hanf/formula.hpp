#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hanf/sphere.hpp"
#include "hanf/structure.hpp"

namespace hanf {

/// Interned variable name. Ids are process-wide and stable for the lifetime
/// of the process; ordering by id is not meaningful across runs.
struct Var {
  std::uint32_t id = 0;

  friend bool operator==(Var, Var) = default;
  friend auto operator<=>(Var, Var) = default;
};

Var var(std::string_view name);
const std::string& var_name(Var v);

/// A sphere with its canonical code and invariant computed once.
struct Pattern {
  Sphere sphere;
  std::string code;
  std::uint64_t invariant;
};
using PatternPtr = std::shared_ptr<const Pattern>;

PatternPtr make_pattern(Sphere s);

enum class Kind : std::uint8_t { True, False, Rel, Eq, Not, And, Or, Exists, Forall, Hanf, Sph };

struct Node;
using Formula = std::shared_ptr<const Node>;

/// Immutable formula node. Which fields are meaningful depends on `kind`:
///   Rel     relation, relation_name, vars = arguments
///   Eq      vars = {x, y}
///   Not     children = {F}
///   And/Or  children
///   Exists/Forall  vars = {bound}, children = {F}
///   Hanf    threshold, witness, pattern, vars = context centers; the
///           witness is bound to the pattern's last center
///   Sph     pattern, vars = one variable per center
struct Node {
  Kind kind = Kind::True;
  std::uint32_t relation = 0;
  std::string relation_name;
  std::vector<Var> vars;
  std::vector<Formula> children;
  std::uint32_t threshold = 0;
  Var witness;
  PatternPtr pattern;
  std::size_t hash = 0;
};

Formula f_true();
Formula f_false();
Formula f_rel(const Signature& sig, std::string_view name, std::vector<Var> args);
Formula f_rel(std::uint32_t relation, std::string name, std::vector<Var> args);
Formula f_eq(Var x, Var y);
Formula f_not(Formula f);
Formula f_and(std::vector<Formula> children);
Formula f_or(std::vector<Formula> children);
Formula f_exists(Var v, Formula body);
Formula f_forall(Var v, Formula body);
/// ∃^{≥m} witness: sph(context·witness). Throws hanf::Error unless the
/// pattern has exactly context.size()+1 centers.
Formula f_hanf(std::uint32_t threshold, Var witness, PatternPtr pattern, std::vector<Var> context);
Formula f_sph(PatternPtr pattern, std::vector<Var> vars);

bool structurally_equal(const Formula& a, const Formula& b);

struct FormulaHash {
  std::size_t operator()(const Formula& f) const noexcept { return f->hash; }
};
struct FormulaEqual {
  bool operator()(const Formula& a, const Formula& b) const { return structurally_equal(a, b); }
};

/// Parses the s-expression grammar. Bound variables that clash with a free
/// variable or with another binder are renamed apart.
Formula parse_formula(std::string_view text, const SignaturePtr& sig);
/// Single line unless `pretty`, which puts every And/Or child on its own line.
std::string print_formula(const Formula& f, bool pretty = false);

/// Free variables in order of first occurrence.
std::vector<Var> free_variables(const Formula& f);
std::uint32_t quantifier_rank(const Formula& f);

struct FormulaSize {
  std::uint64_t ast = 0;
  /// Hanf atoms priced as their counting expansion, sph as its carrier size.
  std::uint64_t expanded = 0;
};
/// Sizes count shared subtrees once per occurrence.
FormulaSize formula_size(const Formula& f);

/// No quantifiers, Hanf atoms or sphere atoms.
bool is_quantifier_free(const Formula& f);

/// The first-order skeleton of a Hanf atom: m pairwise distinct witnesses,
/// and every element equal to one of them satisfies the sphere atom.
/// Throws hanf::Error for m = 0 or a non-Hanf node.
Formula expand_counting(const Formula& hanf_atom);

/// Largest declared radius over Hanf and sphere atoms; 0 when there are none.
std::uint32_t max_radius(const Formula& f);
std::uint32_t max_threshold(const Formula& f);
std::size_t hanf_atom_count(const Formula& f);

/// Constant propagation, And/Or flattening and duplicate removal. Hanf atoms
/// with threshold 0 become true.
Formula simplify(const Formula& f);

}  // namespace hanf

template <>
struct std::hash<hanf::Var> {
  std::size_t operator()(hanf::Var v) const noexcept { return v.id; }
};
