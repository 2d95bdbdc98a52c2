#include <doctest.h>

#include <cmath>
#include <set>

#include "ustlab/lattice.hpp"

using namespace ustlab;

namespace {

DomainSpec unit_square(double delta) { return DomainSpec::rectangle(1.0, 1.0, delta); }

DomainSpec l_shape(double delta) {
  DomainSpec s;
  s.polygon = {{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
  s.delta = delta;
  return s;
}

// Signed area of the closed polyline through the boundary points.
double signed_area(const GridModel& g) {
  double a = 0;
  const int n = static_cast<int>(g.boundary_edges().size());
  for (int k = 0; k < n; ++k) {
    Point p = g.boundary_point(k), q = g.boundary_point((k + 1) % n);
    a += p.x * q.y - q.x * p.y;
  }
  return a / 2;
}

}  // namespace

TEST_CASE("unit square at delta 1/2 has one interior vertex") {
  auto g = build_grid(unit_square(0.5));
  REQUIRE(g.interior_count() == 1);
  Point c = g.position(g.interior_vertex(0));
  CHECK(c.x == 0.5);
  CHECK(c.y == 0.5);
  CHECK(g.boundary_edges().size() == 4);
  for (int k = 0; k < 4; ++k) {
    auto h = harmonic_field_rational(g, k);
    CHECK(h.interior[0] == Rational(1, 4));
  }
  auto k = excursion_kernel_rational(g, {0, 1, 2, 3});
  for (int i = 1; i <= 4; ++i)
    for (int j = 1; j <= 4; ++j)
      if (i != j) CHECK(k(i, j) == Rational(1, 4));
}

TEST_CASE("grid sizes and degenerate meshes") {
  CHECK(build_grid(unit_square(0.25)).interior_count() == 9);
  CHECK(build_grid(DomainSpec::rectangle(3, 4, 1)).interior_count() == 6);
  CHECK(build_grid(DomainSpec::rectangle(21, 21, 1)).interior_count() == 400);
  CHECK_THROWS_AS(build_grid(unit_square(1.0)), std::invalid_argument);
  DomainSpec bad = unit_square(0.25);
  bad.polygon = {{0, 0}, {1, 0}, {1, 1}, {0.5, 0.5}};
  CHECK_THROWS_AS(build_grid(bad), std::invalid_argument);
}

TEST_CASE("boundary edges form one counterclockwise cycle") {
  for (const auto& spec : {unit_square(0.25), unit_square(1.0 / 16), l_shape(0.25), DomainSpec::rectangle(3, 4, 1)}) {
    auto g = build_grid(spec);
    std::set<int> seen;
    int boundary_edge_count = 0;
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
      const auto& ed = g.edges()[e];
      const bool bu = !g.vertices()[ed.u].interior, bv = !g.vertices()[ed.v].interior;
      CHECK_FALSE((bu && bv));
      if (bu || bv) {
        ++boundary_edge_count;
        CHECK(g.boundary_index(static_cast<int>(e)) >= 0);
      }
    }
    for (const auto& b : g.boundary_edges()) {
      CHECK(seen.insert(b.edge).second);
      CHECK(g.vertices()[b.inner].interior);
      CHECK_FALSE(g.vertices()[b.outer].interior);
    }
    CHECK(static_cast<int>(seen.size()) == boundary_edge_count);
    CHECK(signed_area(g) > 0);
    // consecutive boundary points are at most one lattice diagonal apart
    const int n = static_cast<int>(g.boundary_edges().size());
    for (int k = 0; k < n; ++k) {
      Point p = g.boundary_point(k), q = g.boundary_point((k + 1) % n);
      CHECK(std::hypot(p.x - q.x, p.y - q.y) <= std::sqrt(2.0) * spec.delta + 1e-12);
    }
  }
}

TEST_CASE("reflex corner edges are ordered counterclockwise") {
  auto g = build_grid(l_shape(0.5));
  // the reflex corner (1,1) carries two boundary edges, first the one from the
  // horizontal side (pointing down), then the one pointing left
  const int n = static_cast<int>(g.boundary_edges().size());
  int found = -1;
  for (int k = 0; k < n; ++k) {
    Point p = g.boundary_point(k);
    if (p.x == 1.0 && p.y == 1.0) {
      found = k;
      break;
    }
  }
  REQUIRE(found >= 0);
  const auto& b1 = g.boundary_edges()[found];
  const auto& b2 = g.boundary_edges()[(found + 1) % n];
  CHECK(b1.di == 0);
  CHECK(b1.dj == -1);
  CHECK(b2.outer == b1.outer);
  CHECK(b2.di == -1);
  CHECK(b2.dj == 0);
}

TEST_CASE("harmonic measure sums to one and is harmonic") {
  auto g = build_grid(DomainSpec::rectangle(4, 4, 1));
  const int nb = static_cast<int>(g.boundary_edges().size());
  std::vector<Rational> total(static_cast<std::size_t>(g.interior_count()), 0);
  std::vector<double> total_f(static_cast<std::size_t>(g.interior_count()), 0);
  for (int k = 0; k < nb; ++k) {
    auto h = harmonic_field_rational(g, k);
    auto hf = harmonic_field(g, k);
    for (int v = 0; v < g.interior_count(); ++v) {
      total[v] += h.interior[v];
      total_f[v] += hf.interior[v];
      CHECK(std::abs(hf.interior[v] - h.interior[v].get_d()) < 1e-13);
      // mean value property with the exit through the target edge
      const int vid = g.interior_vertex(v);
      Rational rhs = 0;
      for (auto [w, e] : g.incident(vid)) {
        if (g.vertices()[w].interior) rhs += h.interior[g.interior_index(w)];
        else if (g.boundary_index(e) == k) rhs += 1;
      }
      CHECK(Rational(static_cast<long>(g.incident(vid).size())) * h.interior[v] == rhs);
    }
  }
  for (int v = 0; v < g.interior_count(); ++v) {
    CHECK(total[v] == 1);
    CHECK(std::abs(total_f[v] - 1) < 1e-12);
  }
}

TEST_CASE("excursion kernel is symmetric with entries in [0,1]") {
  auto g = build_grid(DomainSpec::rectangle(5, 4, 1));
  std::vector<int> all;
  for (int k = 0; k < static_cast<int>(g.boundary_edges().size()); ++k) all.push_back(k);
  auto k = excursion_kernel_rational(g, all);
  auto kf = excursion_kernel(g, all);
  for (std::size_t i = 1; i <= all.size(); ++i)
    for (std::size_t j = 1; j <= all.size(); ++j) {
      CHECK(k(i, j) == k(j, i));
      if (i == j) continue;
      CHECK(k(i, j) >= 0);
      CHECK(k(i, j) <= 1);
      CHECK(std::abs(kf(i, j) - k(i, j).get_d()) < 1e-13);
    }
}

TEST_CASE("unit conductances reproduce the unweighted kernel") {
  DomainSpec s = DomainSpec::rectangle(4, 5, 1);
  auto plain = build_grid(s);
  s.conductance.overrides[{{1, 1}, {2, 1}}] = 1;  // explicit but equal to the default
  auto weighted = build_grid(s);
  CHECK_FALSE(weighted.unit_conductance());
  std::vector<int> idx{0, 3, 6, 9};
  CHECK(excursion_kernel_rational(plain, idx).values == excursion_kernel_rational(weighted, idx).values);

  s.conductance.horizontal = 2;
  s.conductance.vertical = Rational(1, 3);
  auto aniso = build_grid(s);
  auto k = excursion_kernel_rational(aniso, idx);
  for (int i = 1; i <= 4; ++i)
    for (int j = 1; j <= 4; ++j) CHECK(k(i, j) == k(j, i));
  // total exit probability from any interior vertex is still one
  const int nb = static_cast<int>(aniso.boundary_edges().size());
  Rational total = 0;
  for (int t = 0; t < nb; ++t) total += harmonic_field_rational(aniso, t).interior[0];
  CHECK(total == 1);
}

TEST_CASE("marks snap to the nearest boundary edge") {
  DomainSpec s = unit_square(1.0 / 16);
  s.marks = {{{0.5, 0.0}, MarkRole::in}, {{0.5, 1.0}, MarkRole::out}, {{1.0, 0.5}, MarkRole::visit}};
  auto g = build_grid(s);
  REQUIRE(g.marks().size() == 3);
  Point p = g.boundary_point(g.marks()[0].first);
  CHECK(p.x == 0.5);
  CHECK(p.y == 0.0);
  const auto& v = g.marks()[2];
  CHECK(v.second == g.ccw_next(v.first));
  CHECK(g.is_flanking_pair(v.first, v.second));
  Point a = g.boundary_point(v.first), b = g.boundary_point(v.second);
  CHECK(a.x == 1.0);
  CHECK(b.x == 1.0);
  CHECK(b.y > a.y);
  CHECK(std::abs((a.y + b.y) / 2 - 0.5) <= s.delta / 2 + 1e-12);

  DomainSpec far = unit_square(1.0 / 16);
  far.marks = {{{0.5, 0.5}, MarkRole::plain}};
  CHECK_THROWS_AS(build_grid(far), std::invalid_argument);
  DomainSpec corner = unit_square(1.0 / 16);
  corner.marks = {{{0.05, 0.0}, MarkRole::plain}};
  CHECK_THROWS_AS(build_grid(corner), std::invalid_argument);
}

TEST_CASE("derivative slots are tangential differences") {
  auto g = build_grid(DomainSpec::rectangle(6, 5, 1));
  // labels 1..4: edges 1, 2 (flanking), 9, 14
  std::vector<int> idx{1, 2, 9, 14};
  REQUIRE(g.is_flanking_pair(1, 2));
  auto base = excursion_kernel_rational(g, idx);
  auto rep = excursion_kernel_rational(g, idx, {1});
  CHECK(rep(1, 2) == 0);
  CHECK(rep(2, 1) == 0);
  CHECK(rep.derivative[1]);
  for (int j = 3; j <= 4; ++j) {
    CHECK(rep(2, j) == base(2, j) - base(1, j));
    CHECK(rep(j, 2) == rep(2, j));
    CHECK(rep(1, j) == base(1, j));
  }
  CHECK_THROWS(excursion_kernel_rational(g, idx, {2}));
}

TEST_CASE("rescaled kernel between opposite midpoints settles as delta halves") {
  std::vector<double> scaled;
  for (double delta : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    DomainSpec s = unit_square(delta);
    s.marks = {{{0.5, 0.0}, MarkRole::plain}, {{0.5, 1.0}, MarkRole::plain}};
    auto g = build_grid(s);
    auto k = excursion_kernel(g, {g.marks()[0].first, g.marks()[1].first});
    scaled.push_back(k(1, 2) / (delta * delta));
  }
  CHECK(scaled[2] > 0);
  CHECK(std::abs(scaled[2] - scaled[1]) < std::abs(scaled[1] - scaled[0]));
}
