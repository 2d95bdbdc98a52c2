#include "ustlab/continuum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <type_traits>

#include "ustlab/exact.hpp"

namespace ustlab {

double DerivKernel::eval(double x, double y, int order_x, int order_y) {
  if (order_x < 0 || order_x > 1 || order_y < 0 || order_y > 1) throw std::invalid_argument("kernel derivative order must be 0 or 1");
  const double d = y - x;
  if (d == 0) throw std::invalid_argument("kernel evaluated at coincident points");
  switch (2 * order_x + order_y) {
    case 0: return 1.0 / (d * d);
    case 1: return -2.0 / (d * d * d);
    case 2: return 2.0 / (d * d * d);
    default: return -6.0 / (d * d * d * d);
  }
}

namespace {

template <class T>
T kernel_entry(const T& x, const T& y, int ox, int oy) {
  const T d = y - x;
  if (d == 0) throw std::invalid_argument("kernel evaluated at coincident points");
  switch (2 * ox + oy) {
    case 0: return T(1) / (d * d);
    case 1: return T(-2) / (d * d * d);
    case 2: return T(2) / (d * d * d);
    default: return T(-6) / (d * d * d * d);
  }
}

template <class T>
KernelMatrix<T> kernel_matrix(const std::vector<double>& points, const std::vector<bool>& derivative,
                              const std::vector<int>& zeroed_pair_starts) {
  const std::size_t n = points.size();
  if (!derivative.empty() && derivative.size() != n) throw std::invalid_argument("derivative flags do not match the points");
  KernelMatrix<T> k;
  k.backend = std::is_same_v<T, Rational> ? Backend::rational : Backend::floating;
  k.edges.resize(n);
  std::iota(k.edges.begin(), k.edges.end(), 0);
  k.values = Matrix<T>(n, n);
  k.derivative = derivative.empty() ? std::vector<bool>(n, false) : derivative;
  std::vector<bool> zero_next(n, false);
  for (int j : zeroed_pair_starts) {
    if (j < 1 || static_cast<std::size_t>(j) >= n) throw std::out_of_range("zeroed pair outside the labels");
    zero_next[static_cast<std::size_t>(j - 1)] = true;
  }
  std::vector<T> p;
  for (double x : points) p.push_back(T(x));  // exact for Rational
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const bool zeroed = b == a + 1 && zero_next[a];
      const T v = zeroed ? T(0) : kernel_entry<T>(p[a], p[b], k.derivative[a], k.derivative[b]);
      k.values(a, b) = k.values(b, a) = v;
    }
  return k;
}

template <class T>
double inverse_fomin(const DyckPath& alpha, const KernelMatrix<T>& k) {
  return to_double(connectivity_probability(alpha, k).value);
}

double evaluate(const DyckPath& alpha, const std::vector<double>& points, const std::vector<bool>& derivative,
                const std::vector<int>& zeroed, Backend backend) {
  if (backend == Backend::rational) return inverse_fomin(alpha, kernel_matrix<Rational>(points, derivative, zeroed));
  return inverse_fomin(alpha, kernel_matrix<double>(points, derivative, zeroed));
}

}  // namespace

KernelMatrix<double> continuum_kernel(const std::vector<double>& points, const std::vector<bool>& derivative,
                                      const std::vector<int>& zeroed_pair_starts) {
  return kernel_matrix<double>(points, derivative, zeroed_pair_starts);
}

namespace {

void require_increasing(const std::vector<double>& p, const char* what) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i])) throw std::invalid_argument(std::string(what) + " must be finite");
    if (i > 0 && !(p[i - 1] < p[i])) throw std::invalid_argument(std::string(what) + " must be strictly increasing");
  }
}

std::vector<double> all_points(const ContinuumConfig& c) {
  std::vector<double> p = c.x;
  p.insert(p.end(), c.xhat.begin(), c.xhat.end());
  return p;
}

double min_gap(std::vector<double> p) {
  std::sort(p.begin(), p.end());
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < p.size(); ++i) g = std::min(g, p[i] - p[i - 1]);
  return g;
}

}  // namespace

double pure_partition_function(const DyckPath& alpha, const std::vector<double>& points, Backend backend) {
  if (points.size() != static_cast<std::size_t>(alpha.length())) throw std::invalid_argument("need 2N points");
  require_increasing(points, "points");
  if (alpha.size() == 0) return 1.0;
  return evaluate(alpha, points, {}, {}, backend);
}

std::vector<double> visit_label_points(const VisitOrder& w, const VisitConfig& c) {
  for (int o : w)
    if (o != 1 && o != -1) throw std::invalid_argument("visit order entries must be +1 or -1");
  if (c.visits.size() != w.size()) throw std::invalid_argument("one visit point per entry of the visit order");
  const auto enc = encode_visit_order(w);
  std::vector<double> p(static_cast<std::size_t>(enc.alpha.length()));
  p[static_cast<std::size_t>(enc.in_label - 1)] = c.x_in;
  p[static_cast<std::size_t>(enc.out_label - 1)] = c.x_out;
  for (std::size_t s = 0; s < w.size(); ++s) {
    p[static_cast<std::size_t>(enc.visit_labels[s].first - 1)] = c.visits[s];
    p[static_cast<std::size_t>(enc.visit_labels[s].second - 1)] = c.visits[s];
  }
  std::vector<double> distinct;
  for (std::size_t l = 0; l < p.size(); ++l) {
    const bool pair_second = std::find(enc.pair_start.begin(), enc.pair_start.end(), static_cast<int>(l)) != enc.pair_start.end();
    if (!pair_second) distinct.push_back(p[l]);
  }
  try {
    require_increasing(distinct, "visit configuration");
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("points do not match the visit order " + visit_order_string(w) +
                                ": need x_in < + visits (in order) < x_out < - visits (in reverse order)");
  }
  return p;
}

double zeta_omega(const VisitOrder& w, const VisitConfig& c, const std::vector<int>& pair_order, Backend backend) {
  const auto enc = encode_visit_order(w);
  const auto final_points = visit_label_points(w, c);
  const std::size_t n = final_points.size();
  std::vector<int> order = pair_order;
  if (order.empty())
    for (int s = static_cast<int>(w.size()) - 1; s >= 0; --s) order.push_back(s);
  {
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expected(w.size());
    std::iota(expected.begin(), expected.end(), 0);
    if (sorted != expected) throw std::invalid_argument("pair order must be a permutation of the visits");
  }
  // Step 1 zeroes the collapsed entries; step 2 moves both labels of a pair to
  // x̂_s and turns the later one into a derivative slot. Labels not yet
  // processed keep their final position, which is where the replacement for
  // their own pair would put them anyway.
  std::vector<double> pts = final_points;
  std::vector<bool> deriv(n, false);
  for (int s : order) {
    const int j = enc.pair_start[static_cast<std::size_t>(s)];
    pts[static_cast<std::size_t>(j - 1)] = c.visits[static_cast<std::size_t>(s)];
    pts[static_cast<std::size_t>(j)] = c.visits[static_cast<std::size_t>(s)];
    deriv[static_cast<std::size_t>(j)] = true;
  }
  return evaluate(enc.alpha, pts, deriv, enc.pair_start, backend);
}

double zeta_omega(const VisitOrder& w, const ContinuumConfig& cfg, Backend backend) {
  if (cfg.x.size() != 2) throw std::invalid_argument("a visit amplitude has exactly two plain points, x_in and x_out");
  return zeta_omega(w, VisitConfig{cfg.x[0], cfg.xhat, cfg.x[1]}, {}, backend);
}

double MobiusMap::derivative(double z) const {
  const double q = c * z + d;
  return (a * d - b * c) / (q * q);
}

MobiusResult apply_mobius(const ContinuumConfig& cfg, const MobiusMap& mu) {
  if (!(mu.a * mu.d - mu.b * mu.c > 0)) throw std::invalid_argument("Möbius map needs ad - bc > 0");
  int sign = 0;
  for (double z : all_points(cfg)) {
    const double q = mu.c * z + mu.d;
    if (q == 0) throw std::invalid_argument("pole of the Möbius map at a marked point");
    const int sq = q > 0 ? 1 : -1;
    if (sign != 0 && sq != sign) throw std::invalid_argument("Möbius map breaks the order of the points");
    sign = sq;
  }
  MobiusResult r;
  for (double z : cfg.x) {
    r.image.x.push_back(mu(z));
    r.factor *= std::pow(mu.derivative(z), kWeightH12);
  }
  for (double z : cfg.xhat) {
    r.image.xhat.push_back(mu(z));
    r.factor *= std::pow(mu.derivative(z), kWeightH13);
  }
  return r;
}

namespace {

// Variables 0..|x|-1 are the plain points, then the visit points.
class Stencil {
 public:
  Stencil(const Evaluator& fn, const ContinuumConfig& cfg, double h) : fn_(fn), cfg_(cfg), h_(h) {}

  double value() const { return fn_(cfg_); }

  double d1(int v) const {
    static constexpr std::array<double, 5> c{1, -8, 0, 8, -1};
    double s = 0;
    for (int a = -2; a <= 2; ++a)
      if (c[a + 2] != 0) s += c[a + 2] * at({{v, a}});
    return s / (12 * h_);
  }

  double d2(int v) const {
    static constexpr std::array<double, 5> c{-1, 16, -30, 16, -1};
    double s = 0;
    for (int a = -2; a <= 2; ++a) s += c[a + 2] * at({{v, a}});
    return s / (12 * h_ * h_);
  }

  double d3(int v) const {
    static constexpr std::array<double, 7> c{1, -8, 13, 0, -13, 8, -1};
    double s = 0;
    for (int a = -3; a <= 3; ++a)
      if (c[a + 3] != 0) s += c[a + 3] * at({{v, a}});
    return s / (8 * h_ * h_ * h_);
  }

  double d11(int u, int v) const {
    static constexpr std::array<double, 5> c{1, -8, 0, 8, -1};
    double s = 0;
    for (int a = -2; a <= 2; ++a)
      for (int b = -2; b <= 2; ++b)
        if (c[a + 2] != 0 && c[b + 2] != 0) s += c[a + 2] * c[b + 2] * at({{u, a}, {v, b}});
    return s / (144 * h_ * h_);
  }

 private:
  double at(std::initializer_list<std::pair<int, int>> shifts) const {
    ContinuumConfig c = cfg_;
    const int nx = static_cast<int>(c.x.size());
    for (auto [v, k] : shifts) {
      double& z = v < nx ? c.x[static_cast<std::size_t>(v)] : c.xhat[static_cast<std::size_t>(v - nx)];
      z += k * h_;
    }
    return fn_(c);
  }

  const Evaluator& fn_;
  const ContinuumConfig& cfg_;
  double h_;
};

}  // namespace

PdeResidual pde_residual(const Evaluator& fn, const ContinuumConfig& cfg, PdeKind kind, int index, double h) {
  const auto pts = all_points(cfg);
  const double gap = min_gap(pts);
  if (h == 0) h = 1e-3 * gap;
  if (!(h > 0) || !(h < gap / 10)) throw std::invalid_argument("finite-difference step must satisfy 0 < h < min gap / 10");
  const int nx = static_cast<int>(cfg.x.size());
  const int nv = static_cast<int>(pts.size());
  auto weight = [&](int v) { return v < nx ? kWeightH12 : kWeightH13; };
  Stencil st(fn, cfg, h);
  const double f = st.value();
  std::vector<double> terms;
  if (kind == PdeKind::second_order) {
    if (index < 0 || index >= nx) throw std::out_of_range("second-order equations are indexed by the plain points");
    const int j = index;
    terms.push_back(st.d2(j));
    for (int k = 0; k < nv; ++k) {
      if (k == j) continue;
      const double d = pts[static_cast<std::size_t>(k)] - pts[static_cast<std::size_t>(j)];
      terms.push_back(-2 * weight(k) / (d * d) * f);
      terms.push_back(2 / d * st.d1(k));
    }
  } else {
    if (index < 0 || index >= static_cast<int>(cfg.xhat.size())) throw std::out_of_range("third-order equations are indexed by the visit points");
    const int s = nx + index;
    const double ds = st.d1(s);
    terms.push_back(st.d3(s));
    for (int k = 0; k < nv; ++k) {
      if (k == s) continue;
      const double d = pts[static_cast<std::size_t>(k)] - pts[static_cast<std::size_t>(s)];
      // -8 ℒ̂_{-2} ∂_s
      terms.push_back(-8 * weight(k) / (d * d) * ds);
      terms.push_back(8 / d * st.d11(k, s));
      // +12 ℒ̂_{-3}
      terms.push_back(12 * 2 * weight(k) / (d * d * d) * f);
      terms.push_back(-12 / (d * d) * st.d1(k));
    }
  }
  PdeResidual r;
  r.h = h;
  for (double t : terms) {
    r.raw += t;
    r.scale += std::abs(t);
  }
  r.residual = r.scale > 0 ? r.raw / r.scale : 0;
  return r;
}

Extrapolation collapse_limit(const std::function<double(const std::vector<double>&)>& fn, std::vector<double> points,
                             const std::vector<CollapsePair>& pairs, double exponent, const Schedule& schedule) {
  if (schedule.levels < 2) throw std::invalid_argument("extrapolation needs at least 2 levels");
  const std::size_t n = points.size();
  std::vector<bool> used(n, false);
  for (const auto& p : pairs) {
    if (p.j < 1 || static_cast<std::size_t>(p.j) >= n) throw std::out_of_range("collapse pair outside the points");
    const auto a = static_cast<std::size_t>(p.j - 1);
    if (used[a] || used[a + 1]) throw std::invalid_argument("collapse pairs overlap");
    used[a] = used[a + 1] = true;
    points[a] = points[a + 1] = p.xi;
  }
  std::vector<double> merged;
  for (std::size_t l = 0; l < n; ++l) {
    bool second = false;
    for (const auto& p : pairs) second = second || l == static_cast<std::size_t>(p.j);
    if (!second) merged.push_back(points[l]);
  }
  try {
    require_increasing(merged, "merged configuration");
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("merge point outside the window between its neighbours");
  }
  // A single merged point has no length scale of its own; use 1.
  const double eps0 = schedule.eps0 > 0 ? schedule.eps0 : merged.size() > 1 ? min_gap(merged) / 8 : 1.0 / 8;

  Extrapolation out;
  std::vector<std::vector<double>> tab;
  for (int k = 0; k < schedule.levels; ++k) {
    const double eps = eps0 / std::pow(2.0, k);
    auto pts = points;
    double scale = 1;
    for (const auto& p : pairs) {
      pts[static_cast<std::size_t>(p.j - 1)] = p.xi - eps / 2;
      pts[static_cast<std::size_t>(p.j)] = p.xi + eps / 2;
      scale *= std::pow(eps, -exponent);
    }
    out.eps.push_back(eps);
    out.scaled.push_back(fn(pts) * scale);
    std::vector<double> row{out.scaled.back()};
    for (int m = 1; m <= k; ++m) {
      const double f = std::pow(2.0, m);
      row.push_back((f * row[m - 1] - tab[k - 1][m - 1]) / (f - 1));
    }
    tab.push_back(row);
    out.diagonal.push_back(row.back());
  }
  const std::size_t L = out.diagonal.size();
  out.limit = out.diagonal[L - 1];
  out.error_estimate = std::abs(out.diagonal[L - 1] - out.diagonal[L - 2]);
  double size = std::abs(out.limit);
  for (double s : out.scaled) size = std::max(size, std::abs(s));
  out.converged = out.error_estimate <= 1e-4 * size;
  if (!std::isfinite(out.limit)) out.converged = false;
  return out;
}

namespace {

// Points of a visit configuration in boundary order starting at x_in:
// x_in, + visits, x_out, - visits (reversed). slot[s] is the position of visit s.
struct LineLayout {
  std::vector<double> line;
  std::vector<int> slot;
  int out_slot = 0;
};

LineLayout layout(const VisitOrder& w, const VisitConfig& c) {
  LineLayout L;
  L.slot.assign(w.size(), -1);
  L.line.push_back(c.x_in);
  for (std::size_t s = 0; s < w.size(); ++s)
    if (w[s] > 0) {
      L.slot[s] = static_cast<int>(L.line.size());
      L.line.push_back(c.visits[s]);
    }
  L.out_slot = static_cast<int>(L.line.size());
  L.line.push_back(c.x_out);
  for (std::size_t s = w.size(); s-- > 0;)
    if (w[s] < 0) {
      L.slot[s] = static_cast<int>(L.line.size());
      L.line.push_back(c.visits[s]);
    }
  return L;
}

VisitConfig from_line(const LineLayout& L, const std::vector<double>& line) {
  VisitConfig c;
  c.x_in = line[0];
  c.x_out = line[static_cast<std::size_t>(L.out_slot)];
  for (int sl : L.slot) c.visits.push_back(line[static_cast<std::size_t>(sl)]);
  return c;
}

}  // namespace

AsymptoticsResult asymptotics_constant(const VisitOrder& w, AsymptoticKind kind, const VisitConfig& c, int s, int t,
                                       const Schedule& schedule) {
  visit_label_points(w, c);
  const int nv = static_cast<int>(w.size());
  if (s < 0 || s >= nv) throw std::out_of_range("visit index out of range");
  const auto L = layout(w, c);
  AsymptoticsResult r;
  int pos = 0;      // line position of the left point of the merging pair
  int dropped = 0;  // visit removed in ω'
  VisitConfig merged = c;
  if (kind == AsymptoticKind::first_visit) {
    if (w[static_cast<std::size_t>(s)] < 0)
      throw std::invalid_argument("only visits on the + side of x_in can merge with it in this chart");
    if (L.slot[static_cast<std::size_t>(s)] != 1) throw std::invalid_argument("visit is not the closest one to x_in");
    pos = 0;
    dropped = s;
    r.expected_nonzero = s == 0;
  } else {
    if (t < 0 || t >= nv || t == s) throw std::invalid_argument("consecutive visits need two distinct visit indices");
    const int ps = L.slot[static_cast<std::size_t>(s)], pt = L.slot[static_cast<std::size_t>(t)];
    if (std::abs(ps - pt) != 1) throw std::invalid_argument("visits are not adjacent on the boundary");
    pos = std::min(ps, pt);
    dropped = std::max(s, t);
    r.expected_nonzero = std::abs(s - t) == 1;
  }
  const double xi = 0.5 * (L.line[static_cast<std::size_t>(pos)] + L.line[static_cast<std::size_t>(pos + 1)]);
  auto fn = [&](const std::vector<double>& line) { return zeta_omega(w, from_line(L, line), {}, Backend::rational); };
  r.limit = collapse_limit(fn, L.line, {{pos + 1, xi}}, -3.0, schedule);

  r.reduced = w;
  r.reduced.erase(r.reduced.begin() + dropped);
  if (kind == AsymptoticKind::first_visit) merged.x_in = xi;
  else merged.visits[static_cast<std::size_t>(std::min(s, t))] = xi;
  merged.visits.erase(merged.visits.begin() + dropped);
  r.reference = zeta_omega(r.reduced, merged);
  r.constant = r.limit.limit / r.reference;
  return r;
}

std::string to_string(PdeKind k) { return k == PdeKind::second_order ? "second_order" : "third_order"; }
std::string to_string(AsymptoticKind k) {
  return k == AsymptoticKind::first_visit ? "first_visit" : "consecutive_visits";
}

}  // namespace ustlab
