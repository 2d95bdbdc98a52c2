#include "ustlab/conformal.hpp"

#include <boost/math/special_functions/jacobi_elliptic.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ustlab {

double elliptic_k(double k) {
  if (!(k >= 0 && k < 1)) throw std::invalid_argument("elliptic modulus must lie in [0, 1)");
  double a = 1, b = std::sqrt(1 - k * k);
  for (int i = 0; i < 64 && std::abs(a - b) > 1e-16 * a; ++i) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return std::numbers::pi / (2 * a);
}

namespace {

// K(k)/K(k') grows from 0 to ∞ on (0, 1); bisect in k for the target ratio.
double modulus_for_aspect(double aspect) {
  double lo = 0, hi = 1;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double kp = std::sqrt((1 - mid) * (1 + mid));
    const double ratio = elliptic_k(mid) / elliptic_k(kp);
    (ratio < aspect ? lo : hi) = mid;
    if (hi - lo < 1e-16) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ConformalMap::ConformalMap(double width, double height, double corner_exclusion)
    : width_(width), height_(height), exclusion_(corner_exclusion) {
  if (!(width > 0 && height > 0)) throw std::invalid_argument("rectangle sides must be positive");
  const double aspect = width / height;
  if (aspect < 0.2 || aspect > 5) throw std::invalid_argument("aspect ratio must lie in [0.2, 5]");
  k_ = std::abs(aspect - 1) < 1e-15 ? std::sqrt(0.5) : modulus_for_aspect(aspect);
  kp_ = std::sqrt((1 - k_) * (1 + k_));
  big_k_ = elliptic_k(k_);
  big_kp_ = elliptic_k(kp_);
  scale_ = big_k_ / width_;
}

ConformalMap::Side ConformalMap::side_of(Point p) const {
  const double tol = 1e-12 * std::max(width_, height_);
  const bool on_bottom = std::abs(p.y) <= tol, on_top = std::abs(p.y - height_) <= tol;
  const bool on_left = std::abs(p.x) <= tol, on_right = std::abs(p.x - width_) <= tol;
  const bool in_x = p.x >= -tol && p.x <= width_ + tol, in_y = p.y >= -tol && p.y <= height_ + tol;
  if (!((on_bottom || on_top) && in_x) && !((on_left || on_right) && in_y))
    throw std::invalid_argument("point is not on the rectangle boundary");
  for (Point c : {Point{0, 0}, Point{width_, 0}, Point{width_, height_}, Point{0, height_}})
    if (std::hypot(p.x - c.x, p.y - c.y) < exclusion_) throw std::invalid_argument("point inside a corner exclusion zone");
  if (on_bottom) return Side::bottom;
  if (on_right) return Side::right;
  if (on_top) return Side::top;
  return Side::left;
}

double ConformalMap::phi(Point p) const {
  using boost::math::jacobi_elliptic;
  double cn = 0, dn = 0;
  switch (side_of(p)) {
    case Side::bottom: {
      const double sn = jacobi_elliptic(k_, scale_ * p.x, &cn, &dn);
      return sn * sn;
    }
    case Side::right: {
      jacobi_elliptic(kp_, scale_ * p.y, &cn, &dn);
      return 1 / (dn * dn);
    }
    case Side::top: {
      const double sn = jacobi_elliptic(k_, scale_ * p.x, &cn, &dn);
      return 1 / (k_ * k_ * sn * sn);
    }
    case Side::left: {
      const double sn = jacobi_elliptic(kp_, scale_ * p.y, &cn, &dn);
      return -(sn * sn) / (cn * cn);
    }
  }
  return 0;
}

double ConformalMap::dphi(Point p) const {
  using boost::math::jacobi_elliptic;
  double cn = 0, dn = 0;
  switch (side_of(p)) {
    case Side::bottom: {
      const double sn = jacobi_elliptic(k_, scale_ * p.x, &cn, &dn);
      return 2 * scale_ * sn * cn * dn;
    }
    case Side::right: {
      const double sn = jacobi_elliptic(kp_, scale_ * p.y, &cn, &dn);
      return 2 * scale_ * kp_ * kp_ * sn * cn / (dn * dn * dn);
    }
    case Side::top: {
      const double sn = jacobi_elliptic(k_, scale_ * p.x, &cn, &dn);
      return 2 * scale_ * cn * dn / (k_ * k_ * sn * sn * sn);
    }
    case Side::left: {
      const double sn = jacobi_elliptic(kp_, scale_ * p.y, &cn, &dn);
      return 2 * scale_ * (sn / cn) * dn / (cn * cn);
    }
  }
  return 0;
}

ConformalMap rectangle_halfplane_map(double aspect, double height, double corner_exclusion) {
  return ConformalMap(aspect * height, height, corner_exclusion);
}

MobiusMap increasing_chart(const std::vector<double>& x) {
  int wraps = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (x[i] == x[i - 1]) throw std::invalid_argument("coincident boundary images");
    wraps += x[i] < x[i - 1];
  }
  if (wraps == 0) return MobiusMap::identity();
  if (wraps > 1 || x.back() >= x.front()) throw std::invalid_argument("points are not in cyclic order");
  const double x0 = 0.5 * (x.back() + x.front());
  return MobiusMap{0, -1, 1, -x0};
}

double kernel_scaling_limit(const ConformalMap& map, Point p1, Point p2) {
  return map.dphi(p1) * map.dphi(p2) * DerivKernel::eval(map.phi(p1), map.phi(p2)) / std::numbers::pi;
}

double partition_scaling_limit(const ConformalMap& map, const DyckPath& alpha, const std::vector<Point>& points) {
  if (points.size() != static_cast<std::size_t>(alpha.length())) throw std::invalid_argument("need 2N points");
  std::vector<double> phis;
  for (Point p : points) phis.push_back(map.phi(p));
  const MobiusMap mu = increasing_chart(phis);
  std::vector<double> chart;
  double factor = 1;
  for (std::size_t i = 0; i < points.size(); ++i) {
    chart.push_back(mu(phis[i]));
    factor *= mu.derivative(phis[i]) * map.dphi(points[i]);
  }
  return factor * std::pow(std::numbers::pi, -alpha.size()) * pure_partition_function(alpha, chart);
}

double visit_scaling_limit(const ConformalMap& map, const VisitOrder& w, Point p_in, const std::vector<Point>& visits,
                           Point p_out) {
  if (visits.size() != w.size()) throw std::invalid_argument("one visit point per entry of the visit order");
  // boundary order: in, + visits, out, - visits reversed
  std::vector<double> cyclic{map.phi(p_in)};
  for (std::size_t s = 0; s < w.size(); ++s)
    if (w[s] > 0) cyclic.push_back(map.phi(visits[s]));
  cyclic.push_back(map.phi(p_out));
  for (std::size_t s = w.size(); s-- > 0;)
    if (w[s] < 0) cyclic.push_back(map.phi(visits[s]));
  const MobiusMap mu = increasing_chart(cyclic);
  auto chart = [&](Point p) { return mu(map.phi(p)); };
  VisitConfig c{chart(p_in), {}, chart(p_out)};
  double factor = std::pow(c.x_out - c.x_in, 2);
  for (Point v : visits) {
    const double x = map.phi(v);
    c.visits.push_back(mu(x));
    factor *= std::pow(mu.derivative(x) * map.dphi(v), 3) / std::numbers::pi;
  }
  return factor * zeta_omega(w, c);
}

}  // namespace ustlab
