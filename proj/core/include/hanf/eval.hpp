#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hanf/formula.hpp"
#include "hanf/structure.hpp"

namespace hanf {

struct HnfFormula;

using Assignment = std::map<Var, Element>;

/// Tarskian evaluation by brute force. Hanf and sphere atoms are decided by
/// extracting spheres and testing isomorphism with is_isomorphic.
/// Throws hanf::Error for an unassigned free variable.
bool eval_fo(const Structure& a, const Assignment& asg, const Formula& f);

/// Reusable brute-force evaluator bound to one structure; caches extracted
/// spheres across calls.
class FoEvaluator {
 public:
  explicit FoEvaluator(const Structure& a);
  ~FoEvaluator();
  FoEvaluator(const FoEvaluator&) = delete;
  FoEvaluator& operator=(const FoEvaluator&) = delete;

  bool eval(const Assignment& asg, const Formula& f);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// An HNF compiled for repeated evaluation. Each distinct radius costs one
/// pass over the universe; Or nodes whose children are guarded by a positive
/// Hanf atom only visit children whose guard sphere occurs.
class HnfEvaluator {
 public:
  /// Throws hanf::Error when `psi` is not a valid HNF over its context.
  explicit HnfEvaluator(const HnfFormula& psi);
  ~HnfEvaluator();
  HnfEvaluator(HnfEvaluator&&) noexcept;
  HnfEvaluator& operator=(HnfEvaluator&&) noexcept;

  /// Thread-safe; `asg` must cover the context.
  bool eval(const Structure& a, const Assignment& asg) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

bool eval_hnf(const Structure& a, const Assignment& asg, const HnfFormula& psi);

/// Canonical code of S_d(a) for every element a, tallied and capped at `cap`.
std::map<std::string, std::size_t> sphere_histogram(const Structure& a, std::uint32_t d,
                                                    std::size_t cap);

/// Calls `visit` on every labeled structure with 1..max_size elements and
/// degree <= f, in a fixed order, until it returns false. Throws
/// BudgetExceeded when one size has more than 2^max_bits interpretations.
void enumerate_structures(const SignaturePtr& sig, std::uint32_t max_size, std::uint32_t f,
                          const std::function<bool(const Structure&)>& visit,
                          std::uint32_t max_bits = 26);

/// Like enumerate_structures but visits only the first structure of each
/// isomorphism class.
void enumerate_structures_up_to_isomorphism(const SignaturePtr& sig, std::uint32_t max_size,
                                            std::uint32_t f,
                                            const std::function<bool(const Structure&)>& visit,
                                            std::uint32_t max_bits = 26);

/// Candidate tuples in seeded random order, each kept with probability 1/2
/// when the degree bound still holds. Same seed, same structure.
Structure random_structure(const SignaturePtr& sig, std::uint32_t size, std::uint32_t f,
                           std::uint64_t seed);

struct EquivBudget {
  std::uint32_t exhaustive_max_size = 4;
  std::size_t sample_count = 200;
  std::uint32_t sample_min_size = 5;
  std::uint32_t sample_max_size = 8;
  std::uint64_t seed = 1;
  std::uint32_t jobs = 1;
};

enum class EquivStatus { Equivalent, Counterexample };

struct EquivVerdict {
  EquivStatus status = EquivStatus::Equivalent;
  std::optional<Structure> structure;
  Assignment assignment;
  std::size_t structures_checked = 0;
  std::size_t assignments_checked = 0;
};

/// Bounded f-equivalence check: every structure up to exhaustive_max_size,
/// then sample_count seeded samples, every assignment of the union of free
/// variables. The first disagreement in enumeration order is reported.
/// Throws hanf::Error unless one free-variable set contains the other.
EquivVerdict check_f_equiv(const Formula& lhs, const Formula& rhs, const SignaturePtr& sig,
                           std::uint32_t f, const EquivBudget& budget = {});

/// The i-th sampled structure of check_f_equiv for a budget.
Structure equiv_sample(const SignaturePtr& sig, std::uint32_t f, const EquivBudget& budget,
                       std::size_t i);

}  // namespace hanf
