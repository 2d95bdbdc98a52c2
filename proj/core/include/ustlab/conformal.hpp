#pragma once

#include <vector>

#include "ustlab/combinatorics.hpp"
#include "ustlab/continuum.hpp"
#include "ustlab/lattice.hpp"

namespace ustlab {

// Complete elliptic integral of the first kind K(k) by the arithmetic-geometric mean.
double elliptic_k(double k);

// Conformal map φ from the rectangle [0, W] x [0, H] onto the upper half-plane,
// φ(z) = sn(K z / W, k)^2 with K(k) / K(k') = W / H. Corners go to
// (0,0) -> 0, (W,0) -> 1, (W,H) -> 1/k^2, (0,H) -> ∞, so φ increases along
// the counterclockwise boundary from (0,H) round to (0,H) again.
class ConformalMap {
 public:
  ConformalMap(double width, double height, double corner_exclusion);

  double width() const { return width_; }
  double height() const { return height_; }
  double aspect() const { return width_ / height_; }
  double modulus() const { return k_; }
  double complementary_modulus() const { return kp_; }
  double quarter_period() const { return big_k_; }

  // Boundary points only; throws std::invalid_argument off the boundary or
  // within corner_exclusion of a corner.
  double phi(Point p) const;
  // Derivative of φ along the counterclockwise tangent (> 0).
  double dphi(Point p) const;

 private:
  enum class Side { bottom, right, top, left };
  Side side_of(Point p) const;

  double width_, height_, exclusion_;
  double k_, kp_, big_k_, big_kp_, scale_;
};

// aspect = W / H ∈ [0.2, 5]; the rectangle has the given height.
ConformalMap rectangle_halfplane_map(double aspect, double height = 1.0, double corner_exclusion = 1e-9);

// Möbius chart x -> -1/(x - x0) that makes cyclically increasing real points
// (one wrap through ∞ allowed) increasing with the first point smallest;
// the identity when they already are.
MobiusMap increasing_chart(const std::vector<double>& cyclic_points);

// (1/π) |φ'(p1)| |φ'(p2)| 𝒦(φ(p1), φ(p2)): the limit of δ^{-2} K^δ(e1, e2).
double kernel_scaling_limit(const ConformalMap& map, Point p1, Point p2);

// π^{-N} Π |φ'(p_i)| 𝒵_α(φ(p_1), ..., φ(p_2N)), points in counterclockwise order:
// the limit of δ^{-2N} Z_α.
double partition_scaling_limit(const ConformalMap& map, const DyckPath& alpha, const std::vector<Point>& points);

// π^{-N'} Π |φ'(p̂_s)|^3 ζ_ω(φ(p_in); φ(p̂); φ(p_out)) (φ(p_out) - φ(p_in))^2:
// the limit of δ^{-3N'} times the conditional visit probability. Visits are
// listed in visiting order.
double visit_scaling_limit(const ConformalMap& map, const VisitOrder& w, Point p_in, const std::vector<Point>& visits,
                           Point p_out);

}  // namespace ustlab
