#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "ustlab/combinatorics.hpp"
#include "ustlab/lattice.hpp"

namespace ustlab {

// Brute-force ground truth on tiny wired grids. Trees are spanning trees of
// the graph with all boundary vertices identified, given as edge id lists.

inline constexpr int kOracleInteriorLimit = 20;
inline constexpr std::size_t kOracleTreeLimit = 1'000'000;

struct TreeEnumeration {
  std::vector<std::vector<int>> trees;
  std::vector<Rational> weights;  // Π c(e) per tree
  Rational total_weight = 0;

  std::size_t count() const { return trees.size(); }
};

// Deletion-contraction with connectivity pruning. Throws std::length_error when
// the grid exceeds kOracleInteriorLimit or the tree count exceeds the limit.
void for_each_spanning_tree(const GridModel& g, const std::function<void(const std::vector<int>&)>& visit,
                            std::size_t limit = kOracleTreeLimit);
TreeEnumeration enumerate_spanning_trees(const GridModel& g, std::size_t limit = kOracleTreeLimit);

// Weighted tree count from the matrix-tree theorem: det of the interior Laplacian.
Rational matrix_tree_weight(const GridModel& g);

// Boundary branch of a tree from an interior vertex: the edges walked in order,
// ending with the boundary edge through which it reaches the boundary.
std::vector<int> boundary_branch(const GridModel& g, const std::vector<int>& tree, int start_vertex);

// Weighted fraction of trees in which every branch from the interior endpoint
// of edges[a-1] reaches the boundary through edges[b-1], over the pairs (a, b).
Rational exact_connectivity_bruteforce(const GridModel& g, const OrientedLinkPattern& a, const std::vector<int>& edges);

// Conditional probability, given that the branch from in° exits through out,
// that it uses the unit-distance edges joining the interior endpoints of each
// pair (in the given order along the branch).
Rational visit_probability_bruteforce(const GridModel& g, int in_edge, int out_edge,
                                      const std::vector<std::pair<int, int>>& visit_pairs);

// Free spanning tree on the dual graph (faces = domain squares). A boundary
// face is named by the flanking pair (k, k+1) of boundary edges on its sides.
// Returns the probability that one component of the interior forest touches
// the boundary exactly at the given faces.
Rational free_subtree_bruteforce(const GridModel& g, const std::vector<int>& face_first_edges);

// H_v(target) at every interior vertex, by Cramer's rule with fraction-free
// determinants. Limited to kExactSolveLimit interior vertices.
std::vector<Rational> rational_harmonic_measure(const GridModel& g, int target);

}  // namespace ustlab
