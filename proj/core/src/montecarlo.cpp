#include "ustlab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace ustlab {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) : state_(mix(seed + kGolden) ^ mix(~stream * kGolden)) {}

std::uint64_t RngStream::next() {
  state_ += kGolden;
  return mix(state_);
}

double RngStream::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint32_t RngStream::below(std::uint32_t bound) {
  // Lemire's multiply-shift with rejection
  std::uint64_t m = static_cast<std::uint64_t>(static_cast<std::uint32_t>(next() >> 32)) * bound;
  auto low = static_cast<std::uint32_t>(m);
  if (low < bound) {
    const std::uint32_t threshold = static_cast<std::uint32_t>(-bound) % bound;
    while (low < threshold) {
      m = static_cast<std::uint64_t>(static_cast<std::uint32_t>(next() >> 32)) * bound;
      low = static_cast<std::uint32_t>(m);
    }
  }
  return static_cast<std::uint32_t>(m >> 32);
}

std::vector<int> loop_erase(const std::vector<int>& walk) {
  if (walk.empty()) throw std::invalid_argument("loop erasure of an empty walk");
  std::vector<int> path;
  std::unordered_map<int, std::size_t> position;
  for (int v : walk) {
    if (auto it = position.find(v); it != position.end()) {
      for (std::size_t k = it->second + 1; k < path.size(); ++k) position.erase(path[k]);
      path.resize(it->second + 1);
    } else {
      position.emplace(v, path.size());
      path.push_back(v);
    }
  }
  return path;
}

std::vector<int> TreeSample::edges() const {
  std::vector<int> out;
  for (int e : parent_edge)
    if (e >= 0) out.push_back(e);
  return out;
}

namespace {

int other_end(const GridModel& g, int e, int v) {
  const auto& ed = g.edges()[static_cast<std::size_t>(e)];
  return ed.u == v ? ed.v : ed.u;
}

// Random neighbor step of the conductance-weighted walk.
class WalkTable {
 public:
  explicit WalkTable(const GridModel& g) : g_(g), cumulative_(g.vertices().size()) {
    if (g.unit_conductance()) return;
    for (int a = 0; a < g.interior_count(); ++a) {
      const int v = g.interior_vertex(a);
      double s = 0;
      for (auto [w, e] : g.incident(v)) {
        s += g.edges()[e].c.get_d();
        cumulative_[v].push_back(s);
      }
    }
  }

  std::pair<int, int> step(int v, RngStream& rng) const {
    const auto& inc = g_.incident(v);
    if (g_.unit_conductance()) return inc[rng.below(static_cast<std::uint32_t>(inc.size()))];
    const auto& cum = cumulative_[v];
    const double u = rng.uniform() * cum.back();
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    return inc[std::min(k, inc.size() - 1)];
  }

 private:
  const GridModel& g_;
  std::vector<std::vector<double>> cumulative_;
};

std::vector<int> row_major_interior(const GridModel& g) {
  std::vector<int> order;
  for (int a = 0; a < g.interior_count(); ++a) order.push_back(g.interior_vertex(a));
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    const auto& a = g.vertices()[x];
    const auto& b = g.vertices()[y];
    return std::tie(a.j, a.i) < std::tie(b.j, b.i);
  });
  return order;
}

TreeSample wilson_impl(const GridModel& g, const WalkTable& table, RngStream& rng, const std::vector<int>& starts,
                       const std::vector<int>& scan, bool partial) {
  const std::size_t nv = g.vertices().size();
  TreeSample t;
  t.parent_edge.assign(nv, -1);
  std::vector<char> in_tree(nv);
  for (std::size_t v = 0; v < nv; ++v) in_tree[v] = !g.vertices()[v].interior;
  std::vector<int> next_vertex(nv, -1), next_edge(nv, -1);
  auto grow = [&](int u) {
    int v = u;
    while (!in_tree[v]) {
      auto [w, e] = table.step(v, rng);
      next_vertex[v] = w;
      next_edge[v] = e;
      v = w;
    }
    v = u;
    while (!in_tree[v]) {
      in_tree[v] = 1;
      t.parent_edge[v] = next_edge[v];
      v = next_vertex[v];
    }
  };
  for (int u : starts) grow(u);
  if (!partial)
    for (int u : scan) grow(u);
  return t;
}

bool visits_in_order(const std::vector<int>& path_edges, const std::vector<int>& visit_edges) {
  auto it = path_edges.begin();
  for (int e : visit_edges) {
    it = std::find(it, path_edges.end(), e);
    if (it == path_edges.end()) return false;
  }
  return true;
}

std::vector<int> visit_edge_ids(const GridModel& g, const VisitEvent& ev) {
  std::vector<int> out;
  for (auto [k1, k2] : ev.visit_pairs) {
    const int a = g.boundary_edges().at(static_cast<std::size_t>(k1)).inner;
    const int b = g.boundary_edges().at(static_cast<std::size_t>(k2)).inner;
    int found = -1;
    for (auto [w, e] : g.incident(a))
      if (w == b) found = e;
    if (found < 0) throw std::invalid_argument("visit pair does not flank an edge");
    out.push_back(found);
  }
  return out;
}

template <class Body>
std::uint64_t run_workers(std::uint64_t n, std::uint64_t seed, int workers, Body body) {
  if (n == 0) throw std::invalid_argument("sample count must be positive");
  if (workers < 1) throw std::invalid_argument("worker count must be positive");
  std::vector<std::uint64_t> hits(static_cast<std::size_t>(workers), 0);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> threads;
  const std::uint64_t w = static_cast<std::uint64_t>(workers);
  // sample i always draws from stream i, so the estimate does not depend on the worker count
  for (std::uint64_t k = 0; k < w; ++k) {
    threads.emplace_back([&, k] {
      try {
        std::uint64_t local = 0;
        for (std::uint64_t i = k; i < n; i += w) {
          RngStream rng(seed, i);
          local += body(rng) ? 1 : 0;
        }
        hits[k] = local;
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  return total;
}

}  // namespace

TreeSample wilson_sample(const GridModel& g, RngStream& rng, const std::vector<int>& starts, bool partial) {
  const WalkTable table(g);
  return wilson_impl(g, table, rng, starts, row_major_interior(g), partial);
}

std::vector<int> tree_branch(const GridModel& g, const TreeSample& t, int vertex) {
  if (!g.vertices().at(static_cast<std::size_t>(vertex)).interior) throw std::invalid_argument("branch must start inside");
  std::vector<int> path;
  int v = vertex;
  while (g.vertices()[v].interior) {
    const int e = t.parent_edge[v];
    if (e < 0) throw std::invalid_argument("vertex not covered by the sample");
    path.push_back(e);
    v = other_end(g, e, v);
  }
  return path;
}

bool event_indicator(const GridModel& g, const TreeSample& t, const ConnectivityEvent& ev) {
  for (auto [a, b] : ev.pattern.pairs) {
    const auto& in = g.boundary_edges().at(static_cast<std::size_t>(ev.edges.at(a - 1)));
    const auto& out = g.boundary_edges().at(static_cast<std::size_t>(ev.edges.at(b - 1)));
    if (tree_branch(g, t, in.inner).back() != out.edge) return false;
  }
  return true;
}

bool event_indicator(const GridModel& g, const TreeSample& t, const VisitEvent& ev) {
  const auto& in = g.boundary_edges().at(static_cast<std::size_t>(ev.in_edge));
  const auto path = tree_branch(g, t, in.inner);
  if (path.back() != g.boundary_edges().at(static_cast<std::size_t>(ev.out_edge)).edge) return false;
  return visits_in_order(path, visit_edge_ids(g, ev));
}

Estimate make_estimate(std::string event, std::uint64_t n, std::uint64_t hits, std::uint64_t seed, int workers) {
  Estimate e;
  e.event = std::move(event);
  e.n = n;
  e.hits = hits;
  e.p_hat = static_cast<double>(hits) / static_cast<double>(n);
  e.std_error = std::sqrt(e.p_hat * (1 - e.p_hat) / static_cast<double>(n));
  e.seed = seed;
  e.workers = workers;
  return e;
}

Estimate estimate(const GridModel& g, const ConnectivityEvent& ev, std::uint64_t n, std::uint64_t seed, int workers) {
  const WalkTable table(g);
  std::vector<int> starts;
  std::vector<std::pair<int, int>> routes;  // start vertex, exit edge id
  for (auto [a, b] : ev.pattern.pairs) {
    const auto& in = g.boundary_edges().at(static_cast<std::size_t>(ev.edges.at(a - 1)));
    starts.push_back(in.inner);
    routes.emplace_back(in.inner, g.boundary_edges().at(static_cast<std::size_t>(ev.edges.at(b - 1))).edge);
  }
  const std::vector<int> no_scan;
  const std::uint64_t hits = run_workers(n, seed, workers, [&](RngStream& rng) {
    const TreeSample t = wilson_impl(g, table, rng, starts, no_scan, true);
    for (auto [v, exit] : routes)
      if (tree_branch(g, t, v).back() != exit) return false;
    return true;
  });
  std::string desc = "connectivity";
  for (auto [a, b] : ev.pattern.pairs) desc += " " + std::to_string(a) + "->" + std::to_string(b);
  return make_estimate(desc, n, hits, seed, workers);
}

ConditionedBranch sample_conditioned_branch(const GridModel& g, const std::vector<double>& h, int in_edge, int out_edge,
                                            RngStream& rng) {
  const int exit = g.boundary_edges().at(static_cast<std::size_t>(out_edge)).edge;
  ConditionedBranch br;
  int v = g.boundary_edges().at(static_cast<std::size_t>(in_edge)).inner;
  br.walk.push_back(v);
  std::vector<double> weight;
  while (g.vertices()[v].interior) {
    const auto& inc = g.incident(v);
    weight.clear();
    double total = 0;
    for (auto [w, e] : inc) {
      const int a = g.interior_index(w);
      const double hv = a >= 0 ? h[static_cast<std::size_t>(a)] : (e == exit ? 1.0 : 0.0);
      total += g.edges()[e].c.get_d() * hv;
      weight.push_back(total);
    }
    const double u = rng.uniform() * total;
    std::size_t k = static_cast<std::size_t>(std::upper_bound(weight.begin(), weight.end(), u) - weight.begin());
    k = std::min(k, inc.size() - 1);
    while (k > 0 && weight[k] == weight[k - 1]) --k;  // never land on a zero-weight step
    br.exit_edge = inc[k].second;
    v = inc[k].first;
    br.walk.push_back(v);
  }
  const auto erased = loop_erase(br.walk);
  for (std::size_t i = 0; i + 1 < erased.size(); ++i)
    for (auto [w, e] : g.incident(erased[i]))
      if (w == erased[i + 1]) br.erased_edges.push_back(e);
  return br;
}

Estimate estimate(const GridModel& g, const VisitEvent& ev, std::uint64_t n, std::uint64_t seed, int workers) {
  const auto h = harmonic_field(g, ev.out_edge);
  const auto visits = visit_edge_ids(g, ev);
  const int exit = g.boundary_edges().at(static_cast<std::size_t>(ev.out_edge)).edge;
  const std::uint64_t hits = run_workers(n, seed, workers, [&](RngStream& rng) {
    const auto br = sample_conditioned_branch(g, h.interior, ev.in_edge, ev.out_edge, rng);
    if (br.exit_edge != exit) throw std::logic_error("conditioned walk left through the wrong edge");
    return visits_in_order(br.erased_edges, visits);
  });
  return make_estimate("boundary visits", n, hits, seed, workers);
}

int default_workers() {
  if (const char* env = std::getenv("USTLAB_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v < 4096) return static_cast<int>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace ustlab
