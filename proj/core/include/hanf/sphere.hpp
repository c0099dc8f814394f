#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hanf/structure.hpp"

namespace hanf {

/// A structure together with an ordered tuple of centers whose
/// `declared_radius`-ball covers the whole carrier.
///
/// Centers may repeat. The declared radius is the d of "d-sphere" and is the
/// radius used when a sphere is matched against a structure; radius_of()
/// gives the least radius that would also cover the carrier.
class Sphere {
 public:
  struct Unchecked {};

  Sphere(Structure carrier, std::vector<Element> centers, std::uint32_t declared_radius);
  /// Skips the covering check; for callers that built the carrier as a ball.
  Sphere(Unchecked, Structure carrier, std::vector<Element> centers,
         std::uint32_t declared_radius);

  const Structure& carrier() const noexcept { return carrier_; }
  const std::vector<Element>& centers() const noexcept { return centers_; }
  std::size_t n_centers() const noexcept { return centers_.size(); }
  std::uint32_t declared_radius() const noexcept { return declared_radius_; }
  const Signature& signature() const noexcept { return carrier_.signature(); }

 private:
  Structure carrier_;
  std::vector<Element> centers_;
  std::uint32_t declared_radius_;
};

/// S_d^A(centers): the substructure induced on the d-ball, centers renamed.
Sphere extract_sphere(const Structure& a, std::span<const Element> centers, std::uint32_t d);

/// Least d >= 1 whose ball around the centers is the whole carrier.
std::uint32_t radius_of(const Sphere& s);

/// Center-preserving isomorphism by backtracking search. Throws hanf::Error
/// when the center counts or signatures differ.
bool is_isomorphic(const Sphere& s, const Sphere& t);

/// Byte string that is equal for two spheres iff they are isomorphic.
/// The declared radius is not part of the code.
std::string canonical_form(const Sphere& s);
/// Same as canonical_form() for a carrier/center pair that need not be
/// wrapped in a Sphere.
std::string canonical_form(const Structure& carrier, std::span<const Element> centers);

/// Gaifman graph of the carrier has a single component.
bool is_connected(const Sphere& s);

/// Cheap isomorphism invariant used to reject most non-isomorphic pairs
/// before a full search.
std::uint64_t sphere_invariant(const Sphere& s);

struct EnumerationBudget {
  std::size_t max_spheres = 1'000'000;
  std::uint32_t max_carrier = 64;
  std::size_t max_candidates = 100'000'000;
};

/// One representative per isomorphism class of d-spheres with `n_centers`
/// centers and carrier degree <= f, sorted by canonical_form. Throws
/// BudgetExceeded when a cap in `budget` is hit.
std::vector<Sphere> enumerate_spheres(const SignaturePtr& sig, std::uint32_t d,
                                      std::uint32_t n_centers, std::uint32_t f,
                                      const EnumerationBudget& budget = {});

/// Line format: `sphere <radius> <n_centers> <carrier-size>`, then
/// `center <i> <element>` lines, then fact lines.
std::string print_sphere(const Sphere& s);
Sphere parse_sphere(std::string_view text, SignaturePtr sig);

}  // namespace hanf
