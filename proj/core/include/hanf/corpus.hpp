#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "hanf/formula.hpp"
#include "hanf/structure.hpp"

namespace hanf {

/// {S0/2, S1/2, U/1}: S_i(u, ui) links a node to its i-th child.
SignaturePtr tree_signature();
/// {E/2}
SignaturePtr cycle_signature();

/// A complete binary tree. Node addresses are bit strings, "" being the
/// root; `coloring` selects the nodes in U.
struct TreeSpec {
  std::uint32_t height = 0;
  std::function<bool(const std::string&)> coloring = [](const std::string&) { return false; };
};

/// Coloring that selects exactly the listed addresses.
std::function<bool(const std::string&)> color_addresses(std::set<std::string> addresses);
/// Seeded coloring, each node in U with probability 1/2.
std::function<bool(const std::string&)> random_coloring(std::uint64_t seed);

/// Nodes are numbered breadth-first: the node with address a gets index
/// 2^|a| - 1 + value(a).
Structure make_tree(const TreeSpec& spec);
Structure make_forest(const std::vector<TreeSpec>& specs);
/// Elements of `b` are shifted by a.size(). Throws on a signature mismatch.
Structure disjoint_union(const Structure& a, const Structure& b);
/// Symmetric E on 0..k-1. Throws for k < 3.
Structure make_cycle(std::uint32_t k);

/// Sentence over tree_signature() that holds in a forest of binary trees
/// iff no two components that are complete trees of height h are
/// isomorphic. Quantifies over every node address, so its size grows
/// exponentially in h. Throws for h > 3.
Formula tree_iso_distinguisher(std::uint32_t h);

}  // namespace hanf
