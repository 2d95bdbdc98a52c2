#include "ustlab/lattice.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <tuple>
#include <sstream>
#include <stdexcept>

namespace ustlab {

MarkRole parse_mark_role(const std::string& s) {
  if (s == "in") return MarkRole::in;
  if (s == "out") return MarkRole::out;
  if (s == "plain") return MarkRole::plain;
  if (s == "visit") return MarkRole::visit;
  throw std::invalid_argument("unknown mark role: " + s);
}

std::string to_string(MarkRole r) {
  switch (r) {
    case MarkRole::in: return "in";
    case MarkRole::out: return "out";
    case MarkRole::plain: return "plain";
    case MarkRole::visit: return "visit";
  }
  return "?";
}

std::string to_string(Backend b) { return b == Backend::rational ? "rational" : "floating"; }

Rational ConductanceField::at(long i1, long j1, long i2, long j2) const {
  std::pair<long, long> a{i1, j1}, b{i2, j2};
  if (b < a) std::swap(a, b);
  if (auto it = overrides.find({a, b}); it != overrides.end()) return it->second;
  return j1 == j2 ? horizontal : vertical;
}

DomainSpec DomainSpec::rectangle(double width, double height, double delta) {
  DomainSpec s;
  s.polygon = {{0, 0}, {width, 0}, {width, height}, {0, height}};
  s.delta = delta;
  return s;
}

Point GridModel::position(int vertex) const {
  const auto& v = vertices_[static_cast<std::size_t>(vertex)];
  return {static_cast<double>(v.i) * delta_, static_cast<double>(v.j) * delta_};
}

int GridModel::vertex_at(long i, long j) const {
  auto it = lookup_.find({i, j});
  return it == lookup_.end() ? -1 : it->second;
}

int GridModel::nearest_boundary_edge(Point p) const {
  int best = -1;
  double bd = std::numeric_limits<double>::infinity();
  for (int k = 0; k < static_cast<int>(boundary_.size()); ++k) {
    Point q = boundary_point(k);
    const double d = std::hypot(q.x - p.x, q.y - p.y);
    if (d < bd - 1e-12 * delta_) {
      bd = d;
      best = k;
    }
  }
  return best;
}

bool GridModel::is_flanking_pair(int k, int k_next) const {
  const int n = static_cast<int>(boundary_.size());
  if (k < 0 || k >= n || k_next != ccw_next(k)) return false;
  const auto& a = boundary_[static_cast<std::size_t>(k)];
  const auto& b = boundary_[static_cast<std::size_t>(k_next)];
  if (a.di != b.di || a.dj != b.dj) return false;
  const auto& ai = vertices_[a.inner];
  const auto& bi = vertices_[b.inner];
  const long si = bi.i - ai.i, sj = bi.j - ai.j;
  if (std::abs(si) + std::abs(sj) != 1) return false;
  return si * a.di + sj * a.dj == 0;
}

std::pair<int, int> GridModel::nearest_flanking_pair(Point p) const {
  int best = -1;
  double bd = std::numeric_limits<double>::infinity();
  for (int k = 0; k < static_cast<int>(boundary_.size()); ++k) {
    const int k2 = ccw_next(k);
    if (!is_flanking_pair(k, k2)) continue;
    Point a = boundary_point(k), b = boundary_point(k2);
    const double d = std::hypot((a.x + b.x) / 2 - p.x, (a.y + b.y) / 2 - p.y);
    if (d < bd - 1e-12 * delta_) {
      bd = d;
      best = k;
    }
  }
  if (best < 0) return {-1, -1};
  return {best, ccw_next(best)};
}

namespace {

constexpr std::array<std::array<int, 2>, 4> kDirs{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};

void validate_polygon(const std::vector<Point>& poly) {
  const std::size_t n = poly.size();
  if (n < 4) throw std::invalid_argument("polygon needs at least 4 vertices");
  for (std::size_t k = 0; k < n; ++k) {
    const Point& a = poly[k];
    const Point& b = poly[(k + 1) % n];
    const bool horiz = a.y == b.y, vert = a.x == b.x;
    if (horiz == vert) throw std::invalid_argument("polygon must be axis-aligned with non-degenerate sides");
  }
  // non-adjacent sides must not touch
  auto touches = [](Point a, Point b, Point c, Point d) {
    const double x1 = std::min(a.x, b.x), x2 = std::max(a.x, b.x), y1 = std::min(a.y, b.y), y2 = std::max(a.y, b.y);
    const double x3 = std::min(c.x, d.x), x4 = std::max(c.x, d.x), y3 = std::min(c.y, d.y), y4 = std::max(c.y, d.y);
    return x1 <= x4 && x3 <= x2 && y1 <= y4 && y3 <= y2;
  };
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = k + 2; l < n; ++l) {
      if (k == 0 && l == n - 1) continue;
      if (touches(poly[k], poly[(k + 1) % n], poly[l], poly[(l + 1) % n]))
        throw std::invalid_argument("polygon is not simple");
    }
}

bool point_in_polygon(const std::vector<Point>& poly, Point p) {
  bool in = false;
  const std::size_t n = poly.size();
  for (std::size_t k = 0, l = n - 1; k < n; l = k++) {
    const Point& a = poly[k];
    const Point& b = poly[l];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) in = !in;
  }
  return in;
}

bool square_inside(const std::vector<Point>& poly, long i, long j, double delta) {
  const double x0 = static_cast<double>(i) * delta, x1 = x0 + delta;
  const double y0 = static_cast<double>(j) * delta, y1 = y0 + delta;
  const double eps = 1e-9 * delta;
  if (!point_in_polygon(poly, {(x0 + x1) / 2, (y0 + y1) / 2})) return false;
  const std::size_t n = poly.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Point& a = poly[k];
    const Point& b = poly[(k + 1) % n];
    if (a.y == b.y) {
      const double lo = std::min(a.x, b.x), hi = std::max(a.x, b.x);
      if (a.y > y0 + eps && a.y < y1 - eps && hi > x0 + eps && lo < x1 - eps) return false;
    } else {
      const double lo = std::min(a.y, b.y), hi = std::max(a.y, b.y);
      if (a.x > x0 + eps && a.x < x1 - eps && hi > y0 + eps && lo < y1 - eps) return false;
    }
  }
  return true;
}

using Cell = std::pair<long, long>;

}  // namespace

GridModel build_grid(const DomainSpec& spec) {
  if (!(spec.delta > 0)) throw std::invalid_argument("mesh size must be positive");
  validate_polygon(spec.polygon);
  const double delta = spec.delta;
  double xmin = spec.polygon[0].x, xmax = xmin, ymin = spec.polygon[0].y, ymax = ymin;
  for (const auto& p : spec.polygon) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const long i0 = static_cast<long>(std::floor(xmin / delta)) - 1, i1 = static_cast<long>(std::ceil(xmax / delta)) + 1;
  const long j0 = static_cast<long>(std::floor(ymin / delta)) - 1, j1 = static_cast<long>(std::ceil(ymax / delta)) + 1;

  std::set<Cell> inside;
  for (long i = i0; i <= i1; ++i)
    for (long j = j0; j <= j1; ++j)
      if (square_inside(spec.polygon, i, j, delta)) inside.insert({i, j});
  if (inside.empty()) throw std::invalid_argument("no lattice square fits inside the domain");

  // Largest side-connected component; on ties the one holding the
  // leftmost-lowest square.
  std::set<Cell> best;
  std::set<Cell> unvisited = inside;
  while (!unvisited.empty()) {
    std::set<Cell> comp;
    std::vector<Cell> stack{*unvisited.begin()};
    unvisited.erase(unvisited.begin());
    while (!stack.empty()) {
      Cell c = stack.back();
      stack.pop_back();
      comp.insert(c);
      for (auto [di, dj] : kDirs) {
        Cell nb{c.first + di, c.second + dj};
        if (auto it = unvisited.find(nb); it != unvisited.end()) {
          unvisited.erase(it);
          stack.push_back(nb);
        }
      }
    }
    if (comp.size() > best.size() || (comp.size() == best.size() && *comp.begin() < *best.begin())) best = std::move(comp);
  }
  auto in_a = [&](long i, long j) { return best.count({i, j}) > 0; };

  GridModel g;
  g.delta_ = delta;
  g.squares_.assign(best.begin(), best.end());
  for (const auto& p : spec.polygon) g.corners_.push_back(p);
  std::set<Cell> verts;
  for (auto [i, j] : best)
    for (long a = 0; a <= 1; ++a)
      for (long b = 0; b <= 1; ++b) verts.insert({i + a, j + b});
  for (auto [i, j] : verts) {
    const bool interior = in_a(i, j) && in_a(i - 1, j) && in_a(i, j - 1) && in_a(i - 1, j - 1);
    g.lookup_[{i, j}] = static_cast<int>(g.vertices_.size());
    g.vertices_.push_back({i, j, interior});
  }
  g.interior_index_.assign(g.vertices_.size(), -1);
  for (int v = 0; v < static_cast<int>(g.vertices_.size()); ++v)
    if (g.vertices_[v].interior) {
      g.interior_index_[v] = static_cast<int>(g.interior_.size());
      g.interior_.push_back(v);
    }
  if (g.interior_.empty()) throw std::invalid_argument("grid has no interior vertex; refine the mesh");

  g.incident_.assign(g.vertices_.size(), {});
  g.unit_conductance_ = spec.conductance.is_unit();
  for (int v = 0; v < static_cast<int>(g.vertices_.size()); ++v) {
    const auto& gv = g.vertices_[v];
    for (auto [di, dj] : {std::array<int, 2>{1, 0}, std::array<int, 2>{0, 1}}) {
      const int w = g.vertex_at(gv.i + di, gv.j + dj);
      if (w < 0) continue;
      if (!gv.interior && !g.vertices_[w].interior) continue;
      Rational c = spec.conductance.at(gv.i, gv.j, gv.i + di, gv.j + dj);
      if (c <= 0) throw std::invalid_argument("conductances must be positive");
      const int e = static_cast<int>(g.edges_.size());
      g.edges_.push_back({v, w, c});
      g.incident_[v].emplace_back(w, e);
      g.incident_[w].emplace_back(v, e);
    }
  }

  // Directed boundary segments of A with A on the left.
  struct Seg {
    Cell from, to;
    int dir;
  };
  std::vector<Seg> segs;
  std::map<Cell, std::vector<int>> out_of;
  for (auto [i, j] : best) {
    // bottom, right, top, left sides traversed counterclockwise around the square
    const std::array<std::tuple<Cell, Cell, int, Cell>, 4> sides{{
        {{i, j}, {i + 1, j}, 0, {i, j - 1}},
        {{i + 1, j}, {i + 1, j + 1}, 1, {i + 1, j}},
        {{i + 1, j + 1}, {i, j + 1}, 2, {i, j + 1}},
        {{i, j + 1}, {i, j}, 3, {i - 1, j}},
    }};
    for (const auto& [from, to, dir, across] : sides) {
      if (in_a(across.first, across.second)) continue;
      out_of[from].push_back(static_cast<int>(segs.size()));
      segs.push_back({from, to, dir});
    }
  }
  int start = 0;
  for (int s = 1; s < static_cast<int>(segs.size()); ++s) {
    auto key = [](const Seg& x) { return std::make_tuple(x.from.second, x.from.first, x.dir); };
    if (key(segs[s]) < key(segs[start])) start = s;
  }
  std::vector<bool> used(segs.size(), false);
  std::vector<bool> emitted(g.edges_.size(), false);
  g.boundary_index_.assign(g.edges_.size(), -1);
  int cur = start;
  used[cur] = true;
  std::size_t steps = 0;
  for (;;) {
    const Seg& s = segs[cur];
    // pick the next segment: left turn, straight, right turn
    int next = -1;
    for (int turn : {1, 0, 3}) {
      const int want = (s.dir + turn) % 4;
      for (int cand : out_of[s.to])
        if (segs[cand].dir == want && (!used[cand] || cand == start)) {
          next = cand;
          break;
        }
      if (next >= 0) break;
    }
    if (next < 0) throw std::logic_error("boundary traversal broke off");
    // inward edges at s.to, clockwise from the left normal of the incoming side
    const int w = g.vertex_at(s.to.first, s.to.second);
    int d = (s.dir + 1) % 4;
    for (int r = 0; r < 4; ++r, d = (d + 3) % 4) {
      const int nb = g.vertex_at(s.to.first + kDirs[d][0], s.to.second + kDirs[d][1]);
      if (nb < 0 || !g.vertices_[nb].interior) continue;
      int edge = -1;
      for (auto [x, e] : g.incident_[w])
        if (x == nb) edge = e;
      if (edge < 0 || emitted[edge]) continue;
      emitted[edge] = true;
      g.boundary_index_[edge] = static_cast<int>(g.boundary_.size());
      g.boundary_.push_back({edge, nb, w, kDirs[d][0], kDirs[d][1]});
    }
    if (next == start) break;
    used[next] = true;
    cur = next;
    if (++steps > segs.size()) throw std::logic_error("boundary traversal does not close");
  }
  if (std::find(used.begin(), used.end(), false) != used.end())
    throw std::invalid_argument("lattice domain is not simply connected");
  for (std::size_t e = 0; e < g.edges_.size(); ++e) {
    const bool boundary_edge = !g.vertices_[g.edges_[e].u].interior || !g.vertices_[g.edges_[e].v].interior;
    if (boundary_edge != emitted[e]) throw std::logic_error("boundary edge missing from the counterclockwise cycle");
  }

  for (const auto& m : spec.marks) {
    for (const auto& c : g.corners_)
      if (std::hypot(c.x - m.p.x, c.y - m.p.y) < spec.corner_margin * delta)
        throw std::invalid_argument("marked point too close to a polygon corner");
    Mark mk;
    mk.role = m.role;
    mk.requested = m.p;
    double dist;
    if (m.role == MarkRole::visit) {
      auto [k1, k2] = g.nearest_flanking_pair(m.p);
      if (k1 < 0) throw std::invalid_argument("no flanking edge pair for a visit point");
      mk.first = k1;
      mk.second = k2;
      Point a = g.boundary_point(k1), b = g.boundary_point(k2);
      dist = std::hypot((a.x + b.x) / 2 - m.p.x, (a.y + b.y) / 2 - m.p.y);
    } else {
      mk.first = g.nearest_boundary_edge(m.p);
      Point a = g.boundary_point(mk.first);
      dist = std::hypot(a.x - m.p.x, a.y - m.p.y);
    }
    if (dist > 2 * delta + 1e-12 * delta) throw std::invalid_argument("marked point farther than 2 delta from the lattice boundary");
    g.marks_.push_back(mk);
  }
  return g;
}

// ------------------------------------------------------------------ solves

namespace {

Matrix<Rational> laplacian_rational(const GridModel& g) {
  const int n = g.interior_count();
  if (n > kExactSolveLimit)
    throw std::invalid_argument("rational backend limited to " + std::to_string(kExactSolveLimit) + " interior vertices");
  Matrix<Rational> l(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    const int v = g.interior_vertex(a);
    for (auto [w, e] : g.incident(v)) {
      const Rational& c = g.edges()[e].c;
      l(a, a) += c;
      if (const int b = g.interior_index(w); b >= 0) l(a, b) -= c;
    }
  }
  return l;
}

// Gauss-Jordan elimination; returns A^{-1} B exactly.
Matrix<Rational> solve_exact(Matrix<Rational> a, Matrix<Rational> b) {
  const std::size_t n = a.rows(), m = b.cols();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    while (p < n && a(p, k) == 0) ++p;
    if (p == n) throw std::logic_error("singular Laplacian");
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      for (std::size_t j = 0; j < m; ++j) std::swap(b(k, j), b(p, j));
    }
    const Rational inv = 1 / a(k, k);
    for (std::size_t j = k; j < n; ++j) a(k, j) *= inv;
    for (std::size_t j = 0; j < m; ++j) b(k, j) *= inv;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k || a(i, k) == 0) continue;
      const Rational f = a(i, k);
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      for (std::size_t j = 0; j < m; ++j) b(i, j) -= f * b(k, j);
    }
  }
  return b;
}

class FloatSolver {
 public:
  explicit FloatSolver(const GridModel& g) : n_(g.interior_count()) {
    std::vector<Eigen::Triplet<double>> trip;
    for (int a = 0; a < n_; ++a) {
      const int v = g.interior_vertex(a);
      double diag = 0;
      for (auto [w, e] : g.incident(v)) {
        const double c = g.edges()[e].c.get_d();
        diag += c;
        if (const int b = g.interior_index(w); b >= 0) trip.emplace_back(a, b, -c);
      }
      trip.emplace_back(a, a, diag);
    }
    lap_.resize(n_, n_);
    lap_.setFromTriplets(trip.begin(), trip.end());
    chol_.compute(lap_);
    if (chol_.info() != Eigen::Success) throw std::runtime_error("Laplacian factorization failed");
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd x = chol_.solve(rhs);
    const double res = (lap_ * x - rhs).norm();
    if (!(res <= kSolverTolerance * std::max(1.0, rhs.norm())))
      throw std::runtime_error("harmonic solve did not reach tolerance");
    return x;
  }

 private:
  int n_;
  Eigen::SparseMatrix<double> lap_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol_;
};

void check_target(const GridModel& g, int target) {
  if (target < 0 || target >= static_cast<int>(g.boundary_edges().size()))
    throw std::out_of_range("target is not a boundary edge index");
}

}  // namespace

template <class T>
T HarmonicField<T>::at_vertex(const GridModel& g, int vertex) const {
  if (const int a = g.interior_index(vertex); a >= 0) return interior[static_cast<std::size_t>(a)];
  return g.boundary_edges()[static_cast<std::size_t>(target)].outer == vertex ? T(1) : T(0);
}

template struct HarmonicField<Rational>;
template struct HarmonicField<double>;

HarmonicField<Rational> harmonic_field_rational(const GridModel& g, int target) {
  check_target(g, target);
  const auto& be = g.boundary_edges()[static_cast<std::size_t>(target)];
  Matrix<Rational> rhs(static_cast<std::size_t>(g.interior_count()), 1);
  rhs(static_cast<std::size_t>(g.interior_index(be.inner)), 0) = g.edges()[be.edge].c;
  auto x = solve_exact(laplacian_rational(g), rhs);
  HarmonicField<Rational> h{target, {}};
  for (int a = 0; a < g.interior_count(); ++a) h.interior.push_back(x(a, 0));
  return h;
}

HarmonicField<double> harmonic_field(const GridModel& g, int target) {
  check_target(g, target);
  const auto& be = g.boundary_edges()[static_cast<std::size_t>(target)];
  FloatSolver solver(g);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(g.interior_count());
  rhs(g.interior_index(be.inner)) = g.edges()[be.edge].c.get_d();
  Eigen::VectorXd x = solver.solve(rhs);
  HarmonicField<double> h{target, std::vector<double>(x.data(), x.data() + x.size())};
  return h;
}

KernelMatrix<Rational> excursion_kernel_rational(const GridModel& g, const std::vector<int>& edges) {
  const std::size_t m = edges.size();
  for (int e : edges) check_target(g, e);
  Matrix<Rational> rhs(static_cast<std::size_t>(g.interior_count()), m);
  for (std::size_t l = 0; l < m; ++l) {
    const auto& be = g.boundary_edges()[static_cast<std::size_t>(edges[l])];
    rhs(static_cast<std::size_t>(g.interior_index(be.inner)), l) += g.edges()[be.edge].c;
  }
  auto x = solve_exact(laplacian_rational(g), rhs);
  KernelMatrix<Rational> k{edges, Matrix<Rational>(m, m), std::vector<bool>(m, false), Backend::rational};
  for (std::size_t i = 0; i < m; ++i) {
    const auto& be = g.boundary_edges()[static_cast<std::size_t>(edges[i])];
    for (std::size_t j = 0; j < m; ++j)
      if (i != j) k.values(i, j) = g.edges()[be.edge].c * x(static_cast<std::size_t>(g.interior_index(be.inner)), j);
  }
  return k;
}

KernelMatrix<double> excursion_kernel(const GridModel& g, const std::vector<int>& edges) {
  const std::size_t m = edges.size();
  for (int e : edges) check_target(g, e);
  FloatSolver solver(g);
  KernelMatrix<double> k{edges, Matrix<double>(m, m), std::vector<bool>(m, false), Backend::floating};
  for (std::size_t j = 0; j < m; ++j) {
    const auto& bj = g.boundary_edges()[static_cast<std::size_t>(edges[j])];
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(g.interior_count());
    rhs(g.interior_index(bj.inner)) = g.edges()[bj.edge].c.get_d();
    Eigen::VectorXd x = solver.solve(rhs);
    for (std::size_t i = 0; i < m; ++i) {
      if (i == j) continue;
      const auto& bi = g.boundary_edges()[static_cast<std::size_t>(edges[i])];
      k.values(i, j) = g.edges()[bi.edge].c.get_d() * x(g.interior_index(bi.inner));
    }
  }
  // symmetrize the round-off
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) k.values(i, j) = k.values(j, i) = (k.values(i, j) + k.values(j, i)) / 2;
  return k;
}

template <class T>
KernelMatrix<T> replace_derivative_slots(KernelMatrix<T> k, const std::vector<int>& pair_starts, const T& delta) {
  const int m = static_cast<int>(k.size());
  std::vector<int> order = pair_starts;
  std::sort(order.begin(), order.end());
  for (std::size_t s = 0; s + 1 < order.size(); ++s)
    if (order[s + 1] <= order[s] + 1) throw std::invalid_argument("collapsed pairs must be disjoint");
  for (auto it = pair_starts.rbegin(); it != pair_starts.rend(); ++it) {
    const int j = *it - 1, jn = j + 1;  // 0-based rows of labels j, j+1
    if (j < 0 || jn >= m) throw std::out_of_range("collapsed pair outside the kernel");
    k.values(j, jn) = T(0);
    k.values(jn, j) = T(0);
    for (int i = 0; i < m; ++i) {
      if (i == j || i == jn) continue;
      const T v = (k.values(jn, i) - k.values(j, i)) / delta;
      k.values(jn, i) = v;
      k.values(i, jn) = v;
    }
    k.derivative[static_cast<std::size_t>(jn)] = true;
  }
  return k;
}

template KernelMatrix<Rational> replace_derivative_slots(KernelMatrix<Rational>, const std::vector<int>&, const Rational&);
template KernelMatrix<double> replace_derivative_slots(KernelMatrix<double>, const std::vector<int>&, const double&);

namespace {

void check_pairs(const GridModel& g, const std::vector<int>& edges, const std::vector<int>& pair_starts) {
  for (int j : pair_starts) {
    if (j < 1 || j >= static_cast<int>(edges.size())) throw std::out_of_range("pair label out of range");
    if (!g.is_flanking_pair(edges[j - 1], edges[j]))
      throw std::invalid_argument("derivative slot requested at a non-flanking pair");
  }
}

}  // namespace

KernelMatrix<Rational> excursion_kernel_rational(const GridModel& g, const std::vector<int>& edges,
                                                 const std::vector<int>& pair_starts) {
  check_pairs(g, edges, pair_starts);
  return replace_derivative_slots(excursion_kernel_rational(g, edges), pair_starts, Rational(g.delta()));
}

KernelMatrix<double> excursion_kernel(const GridModel& g, const std::vector<int>& edges,
                                      const std::vector<int>& pair_starts) {
  check_pairs(g, edges, pair_starts);
  return replace_derivative_slots(excursion_kernel(g, edges), pair_starts, g.delta());
}

std::string kernel_csv(const KernelMatrix<double>& k) {
  std::ostringstream out;
  out.precision(17);
  out << "label,edge";
  for (std::size_t j = 0; j < k.size(); ++j) out << ",K" << j + 1;
  out << "\n";
  for (std::size_t i = 0; i < k.size(); ++i) {
    out << i + 1 << "," << k.edges[i];
    for (std::size_t j = 0; j < k.size(); ++j) out << "," << k.values(i, j);
    out << "\n";
  }
  return out.str();
}

}  // namespace ustlab
