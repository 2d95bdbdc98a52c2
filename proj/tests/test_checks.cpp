#include <doctest.h>

#include <cmath>

#include "ustlab/checks.hpp"

using namespace ustlab;

TEST_CASE("random configuration generators") {
  RngStream rng(1, 0);
  for (int i = 0; i < 50; ++i) {
    const auto p = random_increasing_points(rng, 6);
    for (std::size_t k = 1; k < p.size(); ++k) CHECK(p[k] - p[k - 1] >= 0.3);
  }
  CHECK(all_visit_orders(3).size() == 8);
  for (const auto& w : all_visit_orders(3)) {
    const auto c = random_visit_config(rng, w);
    // the generated geometry is exactly what the label layout accepts
    CHECK_NOTHROW(visit_label_points(w, c));
  }
}

TEST_CASE("property checks pass on small samples") {
  CHECK(check_pde2(2, 5, 1).pass);
  CHECK(check_pde2_decay(2, 4, 1).pass);
  CHECK(check_zeta_pde(1, 3, 1).pass);
  CHECK(check_covariance(2, 5, 1).pass);
  CHECK(check_asy2(2, 2, 1).pass);
  const auto a = check_visit_asymptotics(2, 1, 1);
  CHECK(a.pass);
  CHECK(a.samples.size() == 5);  // ++: first and consecutive; +- and -+: first; --: consecutive
}

TEST_CASE("property checks report failures") {
  // thresholds beyond floating point reach must fail
  const auto r = check_pde2(2, 2, 1, 0.0);
  CHECK_FALSE(r.pass);
  CHECK(r.worst > 0);
  CHECK_FALSE(check_pde2_decay(2, 2, 1, 1e6).pass);
  CHECK_THROWS_AS(check_asy2(1, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(check_visit_asymptotics(4, 1, 1), std::invalid_argument);
}
