#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "hanf/formula.hpp"
#include "hanf/sphere.hpp"

namespace hanf {

struct NormalizationConfig {
  std::uint32_t f = 1;
  /// Applied to every sphere enumeration.
  EnumerationBudget spheres;
  /// Cap on disjuncts produced by a single elimination.
  std::size_t max_disjuncts = 5'000'000;
  /// One line per base case and elimination, when set.
  std::ostream* trace = nullptr;
};

/// Boolean combination of Hanf atoms whose center variables equal `context`.
struct HnfFormula {
  Formula formula;
  std::vector<Var> context;
};

/// Throws hanf::Error naming the first violation of the HNF shape.
void validate_hnf(const HnfFormula& psi);

/// `f` with the context read off its atoms when `f` has HNF shape.
/// Constants get the empty context.
std::optional<HnfFormula> as_hnf(const Formula& f);

/// How a Hanf atom over context x̄·x_{n+1} with witness x_{n+2} is rewritten
/// once x_{n+1} is eliminated.
///   Connected     the witness is near x_{n+1}: a local count decides it.
///   Anchored      the witness is far from x_{n+1} but near some x_i: a
///                 local count around all centers decides it.
///   Disconnected  the witness is far from every center: a shifted
///                 threshold on the sphere around x̄ and the witness.
enum class CaseTag { Connected, Anchored, Disconnected };

const char* to_string(CaseTag tag);

struct EliminationCase {
  CaseTag tag = CaseTag::Connected;
  std::uint32_t p = 0;
  /// Present iff tag == Disconnected.
  PatternPtr sigma;
};

/// Case of a pattern with n+2 centers (the last two being the eliminated
/// variable and the witness), judged at the pattern's declared radius.
CaseTag classify_pattern(const Sphere& tau);

enum class CountMode {
  /// S_d(c̄ c_{n+1} c) ≅ pattern
  AppendCenter,
  /// S_d(c̄ c) ≅ pattern
  ReplaceLast,
};

enum class CandidateRegion {
  /// c ranges over B_{2d}(c_{n+1})
  LastCenter,
  /// c ranges over B_{2d}(c̄ c_{n+1})
  AllCenters,
};

/// Number of candidates c inside `outer` whose extracted d-sphere is
/// isomorphic to `pattern`, d being the pattern's declared radius.
std::uint32_t count_in_sphere(const Sphere& outer, const Pattern& pattern, CountMode mode,
                              CandidateRegion region = CandidateRegion::LastCenter);

/// Rewrites `alpha` (a Hanf atom with n+2 centers over context x̄·x_{n+1})
/// for the e-sphere `outer` with n+1 centers, into a formula over x̄.
/// `context` names x̄. Throws hanf::Error when outer's radius is below
/// three times the pattern radius.
Formula rewrite_hanf_atom(const Formula& alpha, const Pattern& outer,
                          const std::vector<Var>& context, EliminationCase* out_case = nullptr);

struct EliminationStats {
  std::size_t context_size = 0;
  std::uint32_t input_radius = 0;
  std::uint32_t output_radius = 0;
  std::size_t outer_spheres = 0;
  std::size_t disjuncts = 0;
  std::size_t atoms_in = 0;
  std::size_t atoms_out = 0;
  double seconds = 0;
};

struct NormalizationStats {
  std::vector<EliminationStats> eliminations;
  std::size_t base_cases = 0;
  std::size_t base_case_atoms = 0;

  std::string summary() const;
};

/// Runs the inductive construction. Sphere enumerations are cached across
/// calls on the same Normalizer.
class Normalizer {
 public:
  Normalizer(SignaturePtr sig, NormalizationConfig cfg);
  ~Normalizer();

  /// Context is free_variables(phi).
  HnfFormula normalize(const Formula& phi);
  /// Context must contain the free variables of phi.
  HnfFormula normalize(const Formula& phi, const std::vector<Var>& context);

  /// Disjunction of ∃^{≥1} w: sph_τ over 1-spheres τ with n+1 centers whose
  /// first n centers satisfy phi.
  HnfFormula base_case_qf(const Formula& phi, const std::vector<Var>& context);

  /// Eliminates ∃ over the last context variable of phi.
  HnfFormula eliminate_exists(const HnfFormula& phi);

  /// Cached enumerate_spheres with the configured degree and budget.
  const std::vector<PatternPtr>& spheres(std::uint32_t d, std::uint32_t n_centers);

  const NormalizationStats& stats() const noexcept { return stats_; }
  const NormalizationConfig& config() const noexcept { return cfg_; }

 private:
  HnfFormula run(const Formula& phi, const std::vector<Var>& context);
  Var witness_for(const std::vector<Var>& context) const;

  SignaturePtr sig_;
  NormalizationConfig cfg_;
  NormalizationStats stats_;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<PatternPtr>> sphere_cache_;
};

HnfFormula normalize(const Formula& phi, const SignaturePtr& sig,
                     const NormalizationConfig& cfg = {});

}  // namespace hanf
