#pragma once

#include <optional>
#include <vector>

#include "ustlab/combinatorics.hpp"
#include "ustlab/lattice.hpp"

namespace ustlab {

// Determinant of ( K(a_k, b_l) ) over the left-to-right orientation of b:
// rows are entrances, columns exits. K must have exactly 2N labels.
template <class T>
T lp_determinant(const DyckPath& b, const KernelMatrix<T>& k);

template <class T>
struct FominContribution {
  DyckPath beta;
  Rational coefficient;  // number of cover-inclusive tilings of alpha/beta
  T determinant;
};

template <class T>
struct InverseFominSum {
  DyckPath alpha;
  T value{};
  std::vector<FominContribution<T>> contributions;
};

// Z_alpha = Σ_{beta ⪰ alpha} #C(alpha/beta) Δ_beta, for N ≤ 6.
template <class T>
InverseFominSum<T> connectivity_probability(const DyckPath& alpha, const KernelMatrix<T>& k);

// A pattern with disjoint collapsed label pairs (j, j+1), none of them linked.
struct CollapsedSpec {
  DyckPath alpha;
  std::vector<int> pair_starts;  // j_s, 1-based

  void validate() const;  // throws std::invalid_argument
};

// Z_alpha of a kernel whose collapsed slots were already replaced by
// derivative rows; the caller supplies the scale factor.
template <class T>
T collapsed_value(const CollapsedSpec& spec, const KernelMatrix<T>& replaced);

// Marked edges for a boundary-visit event, by label (1-based, ccw from e_in).
struct VisitSetup {
  VisitOrder omega;
  VisitEncoding encoding;
  std::vector<int> edges;                         // boundary edge index per label
  int in_edge = 0;
  int out_edge = 0;
  std::vector<std::pair<int, int>> visit_pairs;   // flanking pair (ccw-first, ccw-next) per visit, in visiting order
};

// From explicit boundary edge indices. visit_first_edges[s] is the ccw-first
// edge of the flanking pair of the s-th visited edge. The visit order ω is
// read off the geometry (+ for pairs on the ccw arc from e_in to e_out);
// when omega is given it must agree.
VisitSetup visit_setup(const GridModel& g, int in_edge, int out_edge, const std::vector<int>& visit_first_edges,
                       const std::optional<VisitOrder>& omega = std::nullopt);
// From the grid's marks: one in, one out, visits in mark order.
VisitSetup visit_setup(const GridModel& g, const std::optional<VisitOrder>& omega = std::nullopt);

template <class T>
struct VisitProbability {
  T direct{};         // Z_{alpha(omega)} / K(e_in, e_out)
  T replacing{};      // δ^{N'} Z_{alpha(omega)}(replaced kernel) / K(e_in, e_out)
  T conditioning{};   // K(e_in, e_out)
  T replaced_amplitude{};  // Z_{alpha(omega)} of the replaced kernel
};

VisitProbability<Rational> boundary_visit_probability_rational(const GridModel& g, const VisitSetup& setup);
VisitProbability<double> boundary_visit_probability(const GridModel& g, const VisitSetup& setup);

// Labels for the free spanning tree formula: faces in ccw order, each named by
// the ccw-first edge k of its flanking pair (k, k+1); e_1 is face 1's
// ccw-later edge.
std::vector<int> free_subtree_edges(const GridModel& g, const std::vector<int>& face_first_edges);
// 2^N Z_unnested(e_1, ..., e_2N).
Rational free_subtree_probability_rational(const GridModel& g, const std::vector<int>& face_first_edges);
double free_subtree_probability(const GridModel& g, const std::vector<int>& face_first_edges);

// The completely unnested pattern ()()...() of size n.
DyckPath unnested_pattern(int n);

}  // namespace ustlab
