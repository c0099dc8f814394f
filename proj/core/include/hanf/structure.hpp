#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hanf {

/// Universe elements are dense indices 0..size-1.
using Element = std::uint32_t;

struct RelationSymbol {
  std::string name;
  std::uint32_t arity = 1;

  friend bool operator==(const RelationSymbol&, const RelationSymbol&) = default;
};

/// A finite, purely relational vocabulary.
class Signature {
 public:
  Signature() = default;
  explicit Signature(std::vector<RelationSymbol> relations);

  std::size_t size() const noexcept { return relations_.size(); }
  const RelationSymbol& operator[](std::size_t i) const { return relations_[i]; }
  const std::vector<RelationSymbol>& relations() const noexcept { return relations_; }

  std::optional<std::size_t> find(std::string_view name) const;
  /// Like find() but throws hanf::Error for an unknown symbol.
  std::size_t index_of(std::string_view name) const;

  friend bool operator==(const Signature&, const Signature&) = default;

 private:
  std::vector<RelationSymbol> relations_;
};

using SignaturePtr = std::shared_ptr<const Signature>;

SignaturePtr make_signature(std::vector<RelationSymbol> relations);

/// Reads `rel <name> <arity>` lines; `#` starts a comment line.
SignaturePtr parse_signature(std::string_view text);
std::string print_signature(const Signature& sig);

/// Position of a tuple inside a structure: relation index and tuple index.
struct Incidence {
  std::uint32_t relation;
  std::uint32_t tuple;
};

/// A finite structure over a Signature. Immutable after construction.
///
/// Each relation is stored as a flat, lexicographically sorted array of
/// tuples without duplicates. The Gaifman graph and a per-element incidence
/// index are built once at construction.
class Structure {
 public:
  /// `tuples[r]` holds the tuples of relation r flattened (arity-many
  /// entries per tuple). Duplicates are removed; order is irrelevant.
  Structure(SignaturePtr sig, std::uint32_t size,
            std::vector<std::vector<Element>> tuples);

  const Signature& signature() const noexcept { return *sig_; }
  const SignaturePtr& signature_ptr() const noexcept { return sig_; }
  std::uint32_t size() const noexcept { return size_; }

  std::uint32_t arity(std::size_t rel) const { return (*sig_)[rel].arity; }
  std::size_t tuple_count(std::size_t rel) const {
    return tuples_[rel].size() / arity(rel);
  }
  std::span<const Element> tuples(std::size_t rel) const { return tuples_[rel]; }
  std::span<const Element> tuple(std::size_t rel, std::size_t i) const {
    const auto k = arity(rel);
    return std::span<const Element>(tuples_[rel]).subspan(i * k, k);
  }
  const std::vector<std::vector<Element>>& all_tuples() const noexcept {
    return tuples_;
  }

  bool holds(std::size_t rel, std::span<const Element> tuple) const;
  bool holds(std::size_t rel, std::initializer_list<Element> tuple) const {
    return holds(rel, std::span<const Element>(tuple.begin(), tuple.size()));
  }

  /// Gaifman neighbours of `a`, sorted, excluding `a` itself.
  std::span<const Element> neighbors(Element a) const {
    return std::span<const Element>(adjacency_).subspan(
        adjacency_offsets_[a], adjacency_offsets_[a + 1] - adjacency_offsets_[a]);
  }
  /// Every tuple that mentions `a`, listed once per tuple.
  std::span<const Incidence> incidences(Element a) const {
    return std::span<const Incidence>(incidences_).subspan(
        incidence_offsets_[a], incidence_offsets_[a + 1] - incidence_offsets_[a]);
  }

  friend bool operator==(const Structure& a, const Structure& b) {
    return a.size_ == b.size_ && *a.sig_ == *b.sig_ && a.tuples_ == b.tuples_;
  }

 private:
  SignaturePtr sig_;
  std::uint32_t size_;
  std::vector<std::vector<Element>> tuples_;
  std::vector<std::uint32_t> adjacency_offsets_;
  std::vector<Element> adjacency_;
  std::vector<std::uint32_t> incidence_offsets_;
  std::vector<Incidence> incidences_;
};

/// Incremental construction helper.
class StructureBuilder {
 public:
  StructureBuilder(SignaturePtr sig, std::uint32_t size);

  StructureBuilder& add(std::size_t rel, std::span<const Element> tuple);
  StructureBuilder& add(std::size_t rel, std::initializer_list<Element> tuple) {
    return add(rel, std::span<const Element>(tuple.begin(), tuple.size()));
  }
  StructureBuilder& add(std::string_view rel, std::initializer_list<Element> tuple);

  Structure build() const;

 private:
  SignaturePtr sig_;
  std::uint32_t size_;
  std::vector<std::vector<Element>> tuples_;
};

/// Gaifman distance; std::nullopt stands for infinity.
using Distance = std::optional<std::uint32_t>;

bool gaifman_adjacent(const Structure& a, Element x, Element y);
Distance distance(const Structure& a, Element x, Element y);

/// B_d(centers): elements at distance < d from some center, sorted.
std::vector<Element> ball(const Structure& a, std::span<const Element> centers,
                          std::uint32_t d);

/// Maximum number of Gaifman neighbours over all elements.
std::uint32_t degree(const Structure& a);

struct InducedSubstructure {
  Structure structure;
  /// `original[i]` is the element of the source structure renamed to i.
  std::vector<Element> original;
};

/// Restriction to `subset` (any order, duplicates ignored). Elements are
/// renumbered in increasing original order.
InducedSubstructure induced_substructure(const Structure& a,
                                         std::span<const Element> subset);

/// Structure text format: `structure <size>` then one fact per line.
Structure parse_structure(std::string_view text, SignaturePtr sig);
std::string print_structure(const Structure& a);

}  // namespace hanf
