#include <benchmark/benchmark.h>

#include "ustlab/combinatorics.hpp"
#include "ustlab/continuum.hpp"
#include "ustlab/exact.hpp"
#include "ustlab/lattice.hpp"
#include "ustlab/montecarlo.hpp"

using namespace ustlab;

namespace {

GridModel square(double delta, const std::vector<Point>& marks = {{0.25, 0}, {0.7, 0}, {1, 0.5}, {0.5, 1}}) {
  auto spec = DomainSpec::rectangle(1, 1, delta);
  for (Point p : marks) spec.marks.push_back({p, MarkRole::plain});
  return build_grid(spec);
}

std::vector<int> mark_edges(const GridModel& g) {
  std::vector<int> e;
  for (const auto& m : g.marks()) e.push_back(m.first);
  return e;
}

}  // namespace

static void BM_IncidenceMatrices(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(incidence_matrices(n));
}
BENCHMARK(BM_IncidenceMatrices)->DenseRange(2, 5)->Unit(benchmark::kMillisecond);

// argument: 1/delta
static void BM_KernelFloating(benchmark::State& state) {
  const auto g = square(1.0 / static_cast<double>(state.range(0)));
  const auto edges = mark_edges(g);
  for (auto _ : state) benchmark::DoNotOptimize(excursion_kernel(g, edges));
  state.counters["interior"] = g.interior_count();
}
BENCHMARK(BM_KernelFloating)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

// exact elimination stops at 40 interior vertices, so marks sit mid-side
static void BM_KernelRational(benchmark::State& state) {
  const auto g = square(1.0 / static_cast<double>(state.range(0)), {{0.5, 0}, {1, 0.5}, {0.5, 1}, {0, 0.5}});
  const auto edges = mark_edges(g);
  for (auto _ : state) benchmark::DoNotOptimize(excursion_kernel_rational(g, edges));
  state.counters["interior"] = g.interior_count();
}
BENCHMARK(BM_KernelRational)->Arg(5)->Arg(6)->Arg(7)->Unit(benchmark::kMillisecond);

static void BM_InverseFominSum(benchmark::State& state) {
  const auto g = square(1.0 / 32);
  const auto k = excursion_kernel(g, mark_edges(g));
  const auto alpha = enumerate_dyck_paths(2).front();
  for (auto _ : state) benchmark::DoNotOptimize(connectivity_probability(alpha, k));
}
BENCHMARK(BM_InverseFominSum);

static void BM_WilsonSample(benchmark::State& state) {
  const auto g = square(1.0 / static_cast<double>(state.range(0)));
  RngStream rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(wilson_sample(g, rng));
  state.counters["interior"] = g.interior_count();
}
BENCHMARK(BM_WilsonSample)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

static void BM_PurePartitionFunction(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto alpha = enumerate_dyck_paths(n).back();
  std::vector<double> x;
  for (int i = 0; i < 2 * n; ++i) x.push_back(0.37 * i + 0.05 * i * i);
  const auto backend = state.range(1) ? Backend::rational : Backend::floating;
  for (auto _ : state) benchmark::DoNotOptimize(pure_partition_function(alpha, x, backend));
}
BENCHMARK(BM_PurePartitionFunction)->ArgsProduct({{2, 3, 4}, {0, 1}});

static void BM_ZetaOmega(benchmark::State& state) {
  const auto w = parse_visit_order("+-+");
  const VisitConfig c{0, {1.0, 3.0, 2.0}, 2.5};
  for (auto _ : state) benchmark::DoNotOptimize(zeta_omega(w, c));
}
BENCHMARK(BM_ZetaOmega);
BENCHMARK_MAIN();
