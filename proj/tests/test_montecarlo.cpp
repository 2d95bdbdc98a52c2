#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "ustlab/exact.hpp"
#include "ustlab/montecarlo.hpp"
#include "ustlab/oracle.hpp"

using namespace ustlab;

namespace {

GridModel interior_grid(int w, int h) { return build_grid(DomainSpec::rectangle(w + 1, h + 1, 1)); }

bool self_avoiding(const std::vector<int>& path) {
  std::set<int> s(path.begin(), path.end());
  return s.size() == path.size();
}

// Upper 1% point of χ² with k degrees of freedom (Wilson-Hilferty).
double chi2_critical_99(int k) {
  const double z = 2.326347874;
  const double a = 2.0 / (9.0 * k);
  return k * std::pow(1 - a + z * std::sqrt(a), 3);
}

std::vector<int> sorted_edges(const TreeSample& t) {
  auto e = t.edges();
  std::sort(e.begin(), e.end());
  return e;
}

}  // namespace

TEST_CASE("loop erasure examples") {
  CHECK(loop_erase({1, 2, 1, 3}) == std::vector<int>{1, 3});
  CHECK(loop_erase({1, 2, 3}) == std::vector<int>{1, 2, 3});
  CHECK(loop_erase({1, 2, 3, 2, 4, 3, 5}) == std::vector<int>{1, 2, 4, 3, 5});
  CHECK(loop_erase({7}) == std::vector<int>{7});
  CHECK_THROWS(loop_erase({}));
}

TEST_CASE("loop erasure is self-avoiding and keeps endpoints") {
  RngStream rng(99, 0);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::uint32_t alphabet = 2 + rng.below(8);
    const std::uint32_t len = 1 + rng.below(40);
    std::vector<int> walk;
    for (std::uint32_t i = 0; i < len; ++i) walk.push_back(static_cast<int>(rng.below(alphabet)));
    const auto le = loop_erase(walk);
    CHECK(self_avoiding(le));
    CHECK(le.front() == walk.front());
    CHECK(le.back() == walk.back());
    CHECK(loop_erase(le) == le);
    // every erased-path step is a step of the walk
    for (std::size_t k = 0; k + 1 < le.size(); ++k) {
      bool found = false;
      for (std::size_t i = 0; i + 1 < walk.size(); ++i) found = found || (walk[i] == le[k] && walk[i + 1] == le[k + 1]);
      CHECK(found);
    }
  }
}

TEST_CASE("random streams are reproducible and distinct") {
  RngStream a(5, 0), b(5, 0), c(5, 1);
  bool differ = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differ = differ || x != c.next();
  }
  CHECK(differ);
  RngStream u(1, 2);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0);
    CHECK(v < 1);
    CHECK(u.below(3) < 3);
  }
}

TEST_CASE("single interior vertex trees are uniform") {
  auto g = build_grid(DomainSpec::rectangle(1, 1, 0.5));
  RngStream rng(1, 0);
  std::map<int, int> counts;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    auto t = wilson_sample(g, rng);
    REQUIRE(t.edges().size() == 1);
    ++counts[t.edges()[0]];
  }
  CHECK(counts.size() == 4);
  const double se = std::sqrt(0.25 * 0.75 / n);
  for (auto [e, c] : counts) CHECK(std::abs(c / double(n) - 0.25) <= 4 * se);
}

TEST_CASE("2x2 wired grid passes chi-square against 192 trees") {
  auto g = interior_grid(2, 2);
  auto all = enumerate_spanning_trees(g);
  REQUIRE(all.count() == 192);
  std::map<std::vector<int>, int> index;
  for (auto t : all.trees) {
    std::sort(t.begin(), t.end());
    index.emplace(t, static_cast<int>(index.size()));
  }
  std::vector<int> counts(192, 0);
  RngStream rng(2026, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    auto t = wilson_sample(g, rng);
    auto it = index.find(sorted_edges(t));
    REQUIRE(it != index.end());
    ++counts[it->second];
  }
  const double expected = n / 192.0;
  double chi2 = 0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < chi2_critical_99(191));
}

TEST_CASE("weighted trees follow the conductances") {
  DomainSpec s = DomainSpec::rectangle(1, 1, 0.5);
  s.conductance.horizontal = 2;
  auto g = build_grid(s);
  RngStream rng(3, 0);
  const int n = 20000;
  int horizontal = 0;
  for (int i = 0; i < n; ++i) {
    auto t = wilson_sample(g, rng);
    const auto& e = g.edges()[t.edges()[0]];
    horizontal += g.vertices()[e.u].j == g.vertices()[e.v].j;
  }
  const double p = 2.0 / 3.0, se = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(horizontal / double(n) - p) <= 4 * se);
}

TEST_CASE("samples are spanning trees and deterministic") {
  auto g = interior_grid(5, 4);
  RngStream a(11, 3), b(11, 3);
  for (int i = 0; i < 200; ++i) {
    auto t = wilson_sample(g, a);
    CHECK(static_cast<int>(t.edges().size()) == g.interior_count());
    for (int v = 0; v < g.interior_count(); ++v) {
      auto br = tree_branch(g, t, g.interior_vertex(v));
      CHECK(g.boundary_index(br.back()) >= 0);
    }
    CHECK(sorted_edges(t) == sorted_edges(wilson_sample(g, b)));
  }
}

TEST_CASE("single branch frequency matches the excursion kernel") {
  auto g = interior_grid(4, 4);
  ConnectivityEvent ev{OrientedLinkPattern::left_to_right_of(DyckPath::from_string("()")), {1, 9}};
  auto est = estimate(g, ev, 40000, 17, 2);
  const double k = excursion_kernel(g, {1, 9})(1, 2);
  CHECK(std::abs(est.p_hat - k) <= 4 * est.std_error);
  CHECK(est.n == 40000);
  CHECK(est.workers == 2);
  // reproducible for a fixed (seed, workers)
  CHECK(estimate(g, ev, 40000, 17, 2).hits == est.hits);
}

TEST_CASE("two branch frequencies, orientations and planarity") {
  auto g = interior_grid(6, 6);
  const int nb = static_cast<int>(g.boundary_edges().size());
  std::vector<int> edges{2, nb / 4 + 3, nb / 2 + 2, 3 * nb / 4 + 3};
  auto k = excursion_kernel(g, edges);
  for (const auto& a : enumerate_dyck_paths(2)) {
    const double z = connectivity_probability(a, k).value;
    auto ltr = OrientedLinkPattern::left_to_right_of(a);
    auto est = estimate(g, ConnectivityEvent{ltr, edges}, 40000, 5, 3);
    CHECK(std::abs(est.p_hat - z) <= 4 * est.std_error);
    auto flipped = ltr;
    std::swap(flipped.pairs[1].first, flipped.pairs[1].second);
    auto est2 = estimate(g, ConnectivityEvent{flipped, edges}, 40000, 6, 3);
    const double se = std::hypot(est.std_error, est2.std_error);
    CHECK(std::abs(est.p_hat - est2.p_hat) <= 4 * se);
  }
  OrientedLinkPattern crossing{{{1, 3}, {2, 4}}, false};
  CHECK(estimate(g, ConnectivityEvent{crossing, edges}, 10000, 7, 2).hits == 0);
}

TEST_CASE("conditioned branches always exit through e_out") {
  auto g = interior_grid(5, 5);
  auto h = harmonic_field(g, 14);
  RngStream rng(8, 0);
  for (int i = 0; i < 2000; ++i) {
    auto br = sample_conditioned_branch(g, h.interior, 2, 14, rng);
    CHECK(br.exit_edge == g.boundary_edges()[14].edge);
    CHECK(br.erased_edges.back() == br.exit_edge);
  }
}

TEST_CASE("visit probability estimate agrees with the exact value") {
  DomainSpec s = DomainSpec::rectangle(6, 6, 1);
  s.corner_margin = 1.0;
  s.marks = {{{2, 0}, MarkRole::in}, {{6, 2.5}, MarkRole::visit}, {{3, 6}, MarkRole::out}};
  auto g = build_grid(s);
  auto setup = visit_setup(g);
  const double exact = boundary_visit_probability(g, setup).direct;
  auto est = estimate(g, VisitEvent{setup.in_edge, setup.out_edge, setup.visit_pairs}, 100000, 42, 4);
  CHECK(std::abs(est.p_hat - exact) <= 4 * est.std_error);
}

TEST_CASE("estimator contracts") {
  auto g = interior_grid(3, 3);
  ConnectivityEvent ev{OrientedLinkPattern::left_to_right_of(DyckPath::from_string("()")), {0, 6}};
  CHECK_THROWS_AS(estimate(g, ev, 0, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(estimate(g, ev, 10, 1, 0), std::invalid_argument);
  // standard error shrinks like n^{-1/2}
  auto e3 = estimate(g, ev, 1000, 9, 1), e4 = estimate(g, ev, 10000, 9, 1), e5 = estimate(g, ev, 100000, 9, 1);
  CHECK(e3.std_error / e4.std_error == doctest::Approx(std::sqrt(10.0)).epsilon(0.3));
  CHECK(e4.std_error / e5.std_error == doctest::Approx(std::sqrt(10.0)).epsilon(0.3));
  CHECK(make_estimate("x", 4, 1, 0, 1).std_error == doctest::Approx(std::sqrt(0.25 * 0.75 / 4)));
}
