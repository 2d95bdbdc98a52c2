#include <doctest.h>

#include <cmath>

#include "ustlab/continuum.hpp"
#include "ustlab/montecarlo.hpp"

using namespace ustlab;

namespace {

// Increasing points with gaps in [lo, hi], starting near the origin.
std::vector<double> random_points(RngStream& rng, int n, double lo = 0.3, double hi = 2.0) {
  std::vector<double> p;
  double x = -1 + 2 * rng.uniform();
  for (int i = 0; i < n; ++i) {
    p.push_back(x);
    x += lo + (hi - lo) * rng.uniform();
  }
  return p;
}

// Random admissible geometry for ω: x_in, + visits, x_out, - visits reversed.
VisitConfig random_visit_config(RngStream& rng, const VisitOrder& w) {
  const auto line = random_points(rng, static_cast<int>(w.size()) + 2);
  VisitConfig c;
  std::size_t k = 0;
  c.x_in = line[k++];
  c.visits.assign(w.size(), 0);
  for (std::size_t s = 0; s < w.size(); ++s)
    if (w[s] > 0) c.visits[s] = line[k++];
  c.x_out = line[k++];
  for (std::size_t s = w.size(); s-- > 0;)
    if (w[s] < 0) c.visits[s] = line[k++];
  return c;
}

std::vector<VisitOrder> all_visit_orders(int n) {
  std::vector<VisitOrder> out;
  for (int mask = 0; mask < (1 << n); ++mask) {
    VisitOrder w;
    for (int s = 0; s < n; ++s) w.push_back(mask >> s & 1 ? -1 : 1);
    out.push_back(w);
  }
  return out;
}

double K(double x, double y) { return 1.0 / ((y - x) * (y - x)); }

// Hand expansion of the two N = 2 determinants.
double nested_oracle(const std::vector<double>& p) {
  return K(p[0], p[3]) * K(p[1], p[2]) - K(p[0], p[2]) * K(p[1], p[3]);
}
double unnested_oracle(const std::vector<double>& p) {
  return K(p[0], p[1]) * K(p[2], p[3]) - K(p[0], p[3]) * K(p[2], p[1]) + nested_oracle(p);
}

// ζ_(+)(a; b; c) written out by hand.
double zeta_plus_oracle(double a, double b, double c) {
  return 2 / (std::pow(b - a, 2) * std::pow(c - b, 3)) + 2 / (std::pow(b - a, 3) * std::pow(c - b, 2));
}

Evaluator partition_evaluator(const DyckPath& a) {
  return [a](const ContinuumConfig& c) { return pure_partition_function(a, c.x); };
}

Evaluator zeta_evaluator(const VisitOrder& w) {
  return [w](const ContinuumConfig& c) { return zeta_omega(w, c); };
}

}  // namespace

TEST_CASE("derivative kernel entries") {
  CHECK(DerivKernel::eval(0, 1) == 1);
  CHECK(DerivKernel::eval(0, 2) == 0.25);
  CHECK(DerivKernel::eval(1, 2, 1, 0) == 2);
  CHECK(DerivKernel::eval(0, 1, 0, 1) == -2);
  CHECK(DerivKernel::eval(0, 1, 1, 1) == -6);
  CHECK_THROWS_AS(DerivKernel::eval(1, 1), std::invalid_argument);
  CHECK_THROWS_AS(DerivKernel::eval(0, 1, 2, 0), std::invalid_argument);
  RngStream rng(3, 0);
  for (int i = 0; i < 200; ++i) {
    const double x = -3 + 6 * rng.uniform(), y = x + 0.2 + 3 * rng.uniform();
    // symmetric kernel: swapping the arguments swaps the derivative slots
    CHECK(DerivKernel::eval(x, y, 1, 0) == doctest::Approx(DerivKernel::eval(y, x, 0, 1)));
    CHECK(DerivKernel::eval(x, y, 1, 0) == doctest::Approx(-DerivKernel::eval(x, y, 0, 1)));
    CHECK(DerivKernel::eval(x, y, 1, 1) == doctest::Approx(DerivKernel::eval(y, x, 1, 1)));
    const double h = 1e-5;
    CHECK(DerivKernel::eval(x, y, 1, 0) == doctest::Approx((K(x + h, y) - K(x - h, y)) / (2 * h)).epsilon(1e-6));
    CHECK(DerivKernel::eval(x, y, 1, 1) ==
          doctest::Approx((DerivKernel::eval(x, y + h, 1, 0) - DerivKernel::eval(x, y - h, 1, 0)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("pure partition function spot values") {
  CHECK(pure_partition_function(DyckPath::from_string("()"), {0, 1}) == 1);
  CHECK(pure_partition_function(DyckPath::from_string("()()"), {0, 1, 2, 3}) == doctest::Approx(15.0 / 16).epsilon(1e-14));
  CHECK(pure_partition_function(DyckPath::from_string("(())"), {0, 1, 2, 3}) == doctest::Approx(7.0 / 144).epsilon(1e-14));
  CHECK_THROWS_AS(pure_partition_function(DyckPath::from_string("()"), {1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(pure_partition_function(DyckPath::from_string("()()"), {0, 1, 1, 3}), std::invalid_argument);
  CHECK_THROWS_AS(pure_partition_function(DyckPath::from_string("()()"), {0, 1, 2}), std::invalid_argument);
  RngStream rng(4, 0);
  for (int i = 0; i < 200; ++i) {
    const auto p = random_points(rng, 4);
    CHECK(pure_partition_function(DyckPath::from_string("(())"), p) == doctest::Approx(nested_oracle(p)).epsilon(1e-12));
    CHECK(pure_partition_function(DyckPath::from_string("()()"), p) == doctest::Approx(unnested_oracle(p)).epsilon(1e-12));
  }
}

TEST_CASE("pure partition functions are positive") {
  RngStream rng(5, 0);
  for (int n = 1; n <= 4; ++n) {
    const auto paths = enumerate_dyck_paths(n);
    for (int i = 0; i < 1000; ++i) {
      const auto p = random_points(rng, 2 * n, 0.05, 3.0);
      for (const auto& a : paths) CHECK(pure_partition_function(a, p) > 0);
    }
  }
}

TEST_CASE("Möbius covariance of pure partition functions") {
  CHECK(apply_mobius({{0, 1, 2, 3}, {}}, MobiusMap::identity()).factor == 1);
  RngStream rng(6, 0);
  for (int n = 1; n <= 3; ++n) {
    for (const auto& a : enumerate_dyck_paths(n)) {
      for (int i = 0; i < 40; ++i) {
        const auto p = random_points(rng, 2 * n);
        const double z = pure_partition_function(a, p);
        std::vector<double> scaled, shifted;
        for (double x : p) {
          scaled.push_back(2 * x);
          shifted.push_back(x + 1.75);
        }
        CHECK(pure_partition_function(a, scaled) * std::pow(2.0, 2 * n) == doctest::Approx(z).epsilon(1e-12));
        CHECK(pure_partition_function(a, shifted) == doctest::Approx(z).epsilon(1e-12));
        // random μ with the pole to the left of all points
        MobiusMap mu{0.5 + rng.uniform(), rng.uniform() - 0.5, 0.2 + rng.uniform(), 0};
        mu.d = -mu.c * (p.front() - 0.5 - rng.uniform()) + 0;
        if (mu.a * mu.d - mu.b * mu.c <= 0) std::swap(mu.a, mu.b), mu.a = -mu.a;
        if (mu.a * mu.d - mu.b * mu.c <= 0) continue;
        const auto r = apply_mobius({p, {}}, mu);
        CHECK(r.factor * pure_partition_function(a, r.image.x) == doctest::Approx(z).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("Möbius map contracts") {
  CHECK_THROWS_AS(apply_mobius({{0, 1}, {}}, MobiusMap{0, 1, -1, 0}), std::invalid_argument);  // ad - bc < 0
  CHECK_THROWS_AS(apply_mobius({{0, 1}, {}}, MobiusMap{0, -1, 1, 0}), std::invalid_argument);  // pole at 0
  CHECK_THROWS_AS(apply_mobius({{-1, 1}, {}}, MobiusMap{0, -1, 1, 0}), std::invalid_argument);  // pole between
  const auto r = apply_mobius({{1, 2}, {3}}, MobiusMap{2, 0, 0, 1});
  CHECK(r.factor == doctest::Approx(std::pow(2.0, 1 + 1 + 3)));
  CHECK(r.image.xhat[0] == 6);
}

TEST_CASE("boundary visit amplitude spot values") {
  CHECK(zeta_omega({1}, VisitConfig{0, {1}, 2}) == doctest::Approx(4).epsilon(1e-14));
  // ω = (): the amplitude is the bare kernel between x_in and x_out
  CHECK(zeta_omega({}, VisitConfig{0, {}, 2}) == doctest::Approx(0.25));
  // the replaced matrix carries the -6 mixed entry at unit separation
  {
    const auto enc = encode_visit_order({1, 1});
    std::vector<double> pts{0, 1, 1, 2, 2, 3};
    std::vector<bool> deriv(6, false);
    for (int j : enc.pair_start) deriv[static_cast<std::size_t>(j)] = true;
    const auto k = continuum_kernel(pts, deriv, enc.pair_start);
    CHECK(k(3, 5) == -6);
    CHECK(k(2, 5) == -2);
    CHECK(k(2, 4) == 1);
    CHECK(k(2, 3) == 0);
    CHECK(k(4, 5) == 0);
    CHECK(k(3, 4) == 2);
  }
  RngStream rng(7, 0);
  for (int i = 0; i < 200; ++i) {
    const auto p = random_points(rng, 3);
    CHECK(zeta_omega({1}, VisitConfig{p[0], {p[1]}, p[2]}) == doctest::Approx(zeta_plus_oracle(p[0], p[1], p[2])).epsilon(1e-12));
  }
  CHECK_THROWS_AS(zeta_omega({1}, VisitConfig{0, {3}, 2}), std::invalid_argument);
  CHECK_THROWS_AS(zeta_omega({-1}, VisitConfig{0, {1}, 2}), std::invalid_argument);
  CHECK_THROWS_AS(zeta_omega({1}, VisitConfig{0, {0}, 2}), std::invalid_argument);
  CHECK_THROWS_AS(zeta_omega({1, 1}, VisitConfig{0, {1}, 2}), std::invalid_argument);
}

TEST_CASE("boundary visit amplitudes are positive and independent of the replacement order") {
  RngStream rng(8, 0);
  for (int n = 1; n <= 3; ++n)
    for (const auto& w : all_visit_orders(n))
      for (int i = 0; i < 100; ++i) {
        const auto c = random_visit_config(rng, w);
        const double z = zeta_omega(w, c);
        CHECK(z > 0);
        std::vector<int> forward;
        for (int s = 0; s < n; ++s) forward.push_back(s);
        CHECK(zeta_omega(w, c, forward) == doctest::Approx(z).epsilon(1e-12));
      }
  CHECK_THROWS_AS(zeta_omega({1, 1}, VisitConfig{0, {1, 2}, 3}, {0, 0}), std::invalid_argument);
}

TEST_CASE("replacing algorithm equals the collapse limit of the partition function") {
  RngStream rng(9, 0);
  for (int n = 1; n <= 2; ++n)
    for (const auto& w : all_visit_orders(n))
      for (int i = 0; i < 5; ++i) {
        const auto c = random_visit_config(rng, w);
        const auto enc = encode_visit_order(w);
        auto pts = visit_label_points(w, c);
        std::vector<CollapsePair> pairs;
        for (std::size_t s = 0; s < w.size(); ++s) pairs.push_back({enc.pair_start[s], c.visits[s]});
        // exact evaluation: with two pairs the determinants cancel to ~ε^6
        auto fn = [&](const std::vector<double>& p) { return pure_partition_function(enc.alpha, p, Backend::rational); };
        const auto ex = collapse_limit(fn, pts, pairs, kExponentDeltaPrime);
        const double z = zeta_omega(w, c);
        CHECK(ex.converged);
        CHECK(ex.limit == doctest::Approx(z).epsilon(1e-6));
        // iterated limits in either order agree with the simultaneous one
        if (n == 2) {
          auto inner = [&](int first) {
            return [&, first](const std::vector<double>& p) {
              std::vector<CollapsePair> rest{{enc.pair_start[1 - first], c.visits[1 - first]}};
              return collapse_limit(fn, p, rest, kExponentDeltaPrime, Schedule{0, 5}).limit;
            };
          };
          for (int first = 0; first < 2; ++first) {
            std::vector<CollapsePair> one{{enc.pair_start[first], c.visits[first]}};
            // the other pair is placeholder-separated; the inner limit overwrites it
            auto spread = pts;
            const int other = enc.pair_start[1 - first];
            spread[other - 1] -= 1e-3;
            spread[other] += 1e-3;
            CHECK(collapse_limit(inner(first), spread, one, kExponentDeltaPrime, Schedule{0, 5}).limit ==
                  doctest::Approx(z).epsilon(1e-4));
          }
        }
      }
}

TEST_CASE("second order equations for pure partition functions") {
  // N = 1: the residual is a finite-difference truncation of an exact zero
  {
    const ContinuumConfig c{{0.3, 1.7}, {}};
    for (int j = 0; j < 2; ++j) CHECK(std::abs(pde_residual(partition_evaluator(DyckPath::from_string("()")), c, PdeKind::second_order, j).residual) < 1e-9);
  }
  RngStream rng(10, 0);
  for (int n = 2; n <= 3; ++n)
    for (const auto& a : enumerate_dyck_paths(n))
      for (int i = 0; i < 5; ++i) {
        const ContinuumConfig c{random_points(rng, 2 * n), {}};
        for (int j = 0; j < 2 * n; ++j) {
          const auto r = pde_residual(partition_evaluator(a), c, PdeKind::second_order, j);
          CHECK(std::abs(r.residual) <= 1e-6);
          CHECK(r.scale > 0);
        }
      }
  // a function that is not a solution is caught
  const ContinuumConfig c{{0, 1, 2.5, 3}, {}};
  Evaluator squared = [](const ContinuumConfig& x) { return std::pow(pure_partition_function(DyckPath::from_string("()()"), x.x), 2); };
  CHECK(std::abs(pde_residual(squared, c, PdeKind::second_order, 0).residual) > 1e-2);
}

TEST_CASE("finite-difference residuals decay at least quadratically") {
  const ContinuumConfig c{{0, 0.9, 2.1, 3.4}, {}};
  const auto a = DyckPath::from_string("(())");
  const double gap = 0.9;
  double prev = std::abs(pde_residual(partition_evaluator(a), c, PdeKind::second_order, 1, gap / 20).raw);
  for (double h : {gap / 40, gap / 80}) {
    const double cur = std::abs(pde_residual(partition_evaluator(a), c, PdeKind::second_order, 1, h).raw);
    CHECK(prev / cur >= 3.5);
    prev = cur;
  }
  CHECK_THROWS_AS(pde_residual(partition_evaluator(a), c, PdeKind::second_order, 0, gap / 5), std::invalid_argument);
  CHECK_THROWS_AS(pde_residual(partition_evaluator(a), c, PdeKind::second_order, 4), std::out_of_range);
  CHECK_THROWS_AS(pde_residual(partition_evaluator(a), c, PdeKind::third_order, 0), std::out_of_range);
}

TEST_CASE("second and third order equations for boundary visit amplitudes") {
  RngStream rng(11, 0);
  for (int n = 1; n <= 2; ++n)
    for (const auto& w : all_visit_orders(n))
      for (int i = 0; i < 5; ++i) {
        const auto c = random_visit_config(rng, w).as_config();
        for (int j = 0; j < 2; ++j) CHECK(std::abs(pde_residual(zeta_evaluator(w), c, PdeKind::second_order, j).residual) <= 1e-4);
        for (int s = 0; s < n; ++s) CHECK(std::abs(pde_residual(zeta_evaluator(w), c, PdeKind::third_order, s).residual) <= 1e-4);
      }
  // the third order operator rejects a plain partition function read as a visit
  Evaluator fake = [](const ContinuumConfig& c) { return K(c.x[0], c.xhat[0]) * K(c.xhat[0], c.x[1]); };
  CHECK(std::abs(pde_residual(fake, ContinuumConfig{{0, 2.2}, {1}}, PdeKind::third_order, 0).residual) > 1e-2);
}

TEST_CASE("vanishing-link asymptotics") {
  const auto one = DyckPath::from_string("()");
  {
    auto fn = [&](const std::vector<double>& p) { return pure_partition_function(one, p); };
    CHECK(collapse_limit(fn, {0, 0}, {{1, 0.5}}, kExponentDelta).limit == doctest::Approx(1).epsilon(1e-12));
  }
  RngStream rng(12, 0);
  for (int n = 2; n <= 3; ++n)
    for (const auto& a : enumerate_dyck_paths(n))
      for (int j = 1; j < 2 * n; ++j) {
        auto p = random_points(rng, 2 * n);
        const double xi = 0.5 * (p[j - 1] + p[j]);
        auto fn = [&](const std::vector<double>& x) { return pure_partition_function(a, x); };
        const auto ex = collapse_limit(fn, p, {{j, xi}}, kExponentDelta);
        CHECK(ex.converged);
        const auto w = wedge_ops(a, j);
        std::vector<double> rest;
        for (int l = 0; l < 2 * n; ++l)
          if (l != j - 1 && l != j) rest.push_back(p[l]);
        if (w.kind == WedgeKind::up) {
          CHECK(ex.limit == doctest::Approx(pure_partition_function(*w.removed, rest)).epsilon(1e-6));
        } else {
          // compare against the size of the surviving partition functions
          double ref = 0;
          for (const auto& b : enumerate_dyck_paths(n - 1)) ref = std::max(ref, pure_partition_function(b, rest));
          CHECK(std::abs(ex.limit) <= 1e-6 * ref);
        }
      }
}

TEST_CASE("collapse limit contracts") {
  auto fn = [](const std::vector<double>& p) { return 1.0 / (p[1] - p[0]); };
  CHECK_THROWS_AS(collapse_limit(fn, {0, 1}, {{1, 0.5}}, 1, Schedule{0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(collapse_limit(fn, {0, 1, 2}, {{1, 0.5}, {2, 1.5}}, 1), std::invalid_argument);
  CHECK_THROWS_AS(collapse_limit(fn, {0, 1, 2}, {{2, -1}}, 1), std::invalid_argument);
  CHECK_THROWS_AS(collapse_limit(fn, {0, 1}, {{2, 0.5}}, 1), std::out_of_range);
  // wrong exponent: the scaled sequence blows up and is flagged
  CHECK_FALSE(collapse_limit(fn, {0, 1}, {{1, 0.5}}, 0).converged);
  CHECK(collapse_limit(fn, {0, 1}, {{1, 0.5}}, -1).limit == doctest::Approx(1));
}

TEST_CASE("boundary visit asymptotics constants") {
  // first visit merging with x_in
  {
    const auto r = asymptotics_constant({1}, AsymptoticKind::first_visit, VisitConfig{0, {1}, 2.5}, 0);
    CHECK(r.expected_nonzero);
    CHECK(r.constant == doctest::Approx(2).epsilon(0.01));
  }
  for (const VisitOrder& w : {VisitOrder{1, 1}, VisitOrder{1, -1}, VisitOrder{1, 1, -1}}) {
    RngStream rng(13, 0);
    const auto c = random_visit_config(rng, w);
    const auto r = asymptotics_constant(w, AsymptoticKind::first_visit, c, 0);
    CHECK(r.constant == doctest::Approx(2).epsilon(0.01));
  }
  // the closest + visit is visited later: zero
  for (const VisitOrder& w : {VisitOrder{-1, 1}, VisitOrder{-1, 1, 1}, VisitOrder{-1, -1, 1}}) {
    RngStream rng(14, 0);
    const auto c = random_visit_config(rng, w);
    int s = 0;
    while (w[s] < 0) ++s;
    const auto r = asymptotics_constant(w, AsymptoticKind::first_visit, c, s);
    CHECK_FALSE(r.expected_nonzero);
    CHECK(std::abs(r.constant) <= 1e-6);
  }
  // successive visits
  for (const VisitOrder& w : {VisitOrder{1, 1}, VisitOrder{-1, -1}, VisitOrder{1, 1, 1}, VisitOrder{-1, 1, 1}}) {
    RngStream rng(15, 0);
    const auto c = random_visit_config(rng, w);
    const int s = static_cast<int>(w.size()) - 2;
    const auto r = asymptotics_constant(w, AsymptoticKind::consecutive_visits, c, s, s + 1);
    CHECK(r.expected_nonzero);
    CHECK(r.constant == doctest::Approx(10).epsilon(0.01));
  }
  // neighbours on the line that are not visited one after the other
  {
    RngStream rng(16, 0);
    const VisitOrder w{1, -1, 1};
    const auto r = asymptotics_constant(w, AsymptoticKind::consecutive_visits, random_visit_config(rng, w), 0, 2);
    CHECK_FALSE(r.expected_nonzero);
    CHECK(std::abs(r.constant) <= 1e-6);
  }
  CHECK_THROWS(asymptotics_constant({1, 1}, AsymptoticKind::first_visit, VisitConfig{0, {1, 2}, 3}, 1));
  CHECK_THROWS(asymptotics_constant({1, -1}, AsymptoticKind::consecutive_visits, VisitConfig{0, {1, 3}, 2}, 0, 1));
}
