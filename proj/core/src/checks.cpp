#include "ustlab/checks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ustlab {

std::vector<double> random_increasing_points(RngStream& rng, int n, double lo, double hi) {
  std::vector<double> p;
  double x = -1 + 2 * rng.uniform();
  for (int i = 0; i < n; ++i) {
    p.push_back(x);
    x += lo + (hi - lo) * rng.uniform();
  }
  return p;
}

VisitConfig random_visit_config(RngStream& rng, const VisitOrder& w) {
  const auto line = random_increasing_points(rng, static_cast<int>(w.size()) + 2);
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
  if (n < 0 || n > 12) throw std::invalid_argument("visit order length must lie in 0..12");
  std::vector<VisitOrder> out;
  for (int mask = 0; mask < (1 << n); ++mask) {
    VisitOrder w;
    for (int s = 0; s < n; ++s) w.push_back(mask >> s & 1 ? -1 : 1);
    out.push_back(w);
  }
  return out;
}

Evaluator partition_evaluator(const DyckPath& alpha) {
  return [alpha](const ContinuumConfig& c) { return pure_partition_function(alpha, c.x); };
}

Evaluator zeta_evaluator(const VisitOrder& w) {
  return [w](const ContinuumConfig& c) { return zeta_omega(w, c); };
}

void CheckReport::add(CheckSample s) {
  worst = std::max(worst, s.error);
  pass = pass && s.pass;
  samples.push_back(std::move(s));
}

namespace {

double min_gap(const std::vector<double>& p) {
  double g = INFINITY;
  for (std::size_t i = 1; i < p.size(); ++i) g = std::min(g, p[i] - p[i - 1]);
  return g;
}

void require_size(int n, int lo, int hi, const char* what) {
  if (n < lo || n > hi)
    throw std::invalid_argument(std::string(what) + " must lie in " + std::to_string(lo) + ".." + std::to_string(hi));
}

}  // namespace

CheckReport check_pde2(int n, int configs, std::uint64_t seed, double threshold) {
  require_size(n, 1, kMaxMatrixSize, "N");
  CheckReport r("pde2", "|residual| <= threshold", threshold);
  RngStream rng(seed, 0);
  const auto patterns = enumerate_dyck_paths(n);
  for (int i = 0; i < configs; ++i) {
    const ContinuumConfig c{random_increasing_points(rng, 2 * n), {}};
    for (const auto& a : patterns)
      for (int j = 0; j < 2 * n; ++j) {
        const auto res = pde_residual(partition_evaluator(a), c, PdeKind::second_order, j);
        const double e = std::abs(res.residual);
        r.add({a.to_string(), c.x, {}, j, res.h, res.residual, 0, e, e <= threshold});
      }
  }
  return r;
}

CheckReport check_pde2_decay(int n, int configs, std::uint64_t seed, double min_ratio) {
  require_size(n, 1, kMaxMatrixSize, "N");
  // error is the shortfall below the required ratio, 0 when it is met
  CheckReport r("pde2_decay", "residual ratio per halving of h >= threshold", min_ratio);
  RngStream rng(seed, 1);
  const auto patterns = enumerate_dyck_paths(n);
  for (int i = 0; i < configs; ++i) {
    const ContinuumConfig c{random_increasing_points(rng, 2 * n), {}};
    const double gap = min_gap(c.x);
    const int j = i % (2 * n);
    for (const auto& a : patterns) {
      const auto fn = partition_evaluator(a);
      const double f = std::abs(fn(c));
      // a halving counts only while the finer residual stays well above the
      // roundoff of the second difference, about 4 u |f| / h^2
      auto resolved = [&](double h, double raw) { return std::abs(raw) >= kDecayMargin * 4 * kEvalAccuracy * f / (h * h); };
      double worst_ratio = INFINITY, h = gap / 11;
      double prev = std::abs(pde_residual(fn, c, PdeKind::second_order, j, h).raw);
      int halvings = 0;
      for (int k = 0; k < 4; ++k) {
        const double cur = std::abs(pde_residual(fn, c, PdeKind::second_order, j, h / 2).raw);
        if (!resolved(h / 2, cur)) break;
        h /= 2;
        worst_ratio = std::min(worst_ratio, prev / cur);
        prev = cur;
        ++halvings;
      }
      if (halvings == 0) {
        // already at roundoff for the coarsest admissible step: no order to measure
        r.add({a.to_string() + " (at roundoff)", c.x, {}, j, gap / 11, 0, min_ratio, 0, true});
        continue;
      }
      const double shortfall = std::max(0.0, min_ratio - worst_ratio);
      r.add({a.to_string(), c.x, {}, j, h, worst_ratio, min_ratio, shortfall, worst_ratio >= min_ratio});
    }
  }
  r.worst = 0;
  for (const auto& s : r.samples) r.worst = std::max(r.worst, s.error);
  return r;
}

CheckReport check_zeta_pde(int nprime, int configs, std::uint64_t seed, double threshold) {
  require_size(nprime, 1, 4, "N'");
  CheckReport r("zeta_pde", "|residual| <= threshold", threshold);
  RngStream rng(seed, 2);
  for (const auto& w : all_visit_orders(nprime))
    for (int i = 0; i < configs; ++i) {
      const auto c = random_visit_config(rng, w).as_config();
      const std::string name = "zeta" + visit_order_string(w);
      for (int j = 0; j < 2; ++j) {
        const auto res = pde_residual(zeta_evaluator(w), c, PdeKind::second_order, j);
        const double e = std::abs(res.residual);
        r.add({name + ":second_order", c.x, c.xhat, j, res.h, res.residual, 0, e, e <= threshold});
      }
      for (int s = 0; s < nprime; ++s) {
        const auto res = pde_residual(zeta_evaluator(w), c, PdeKind::third_order, s);
        const double e = std::abs(res.residual);
        r.add({name + ":third_order", c.x, c.xhat, s, res.h, res.residual, 0, e, e <= threshold});
      }
    }
  return r;
}

namespace {

// Random μ with positive determinant and its pole left of every point.
MobiusMap random_mobius(RngStream& rng, double leftmost) {
  for (;;) {
    MobiusMap mu{0.5 + rng.uniform(), rng.uniform() - 0.5, 0.2 + rng.uniform(), 0};
    const double pole = leftmost - 0.5 - rng.uniform();
    mu.d = -mu.c * pole;
    if (mu.a * mu.d - mu.b * mu.c > 0) return mu;
  }
}

}  // namespace

CheckReport check_covariance(int n, int configs, std::uint64_t seed, double threshold) {
  require_size(n, 1, kMaxMatrixSize, "N");
  CheckReport r("covariance", "|transformed / original - 1| <= threshold", threshold);
  RngStream rng(seed, 3);
  for (const auto& a : enumerate_dyck_paths(n))
    for (int i = 0; i < configs; ++i) {
      const ContinuumConfig c{random_increasing_points(rng, 2 * n), {}};
      const auto mu = random_mobius(rng, c.x.front());
      const auto img = apply_mobius(c, mu);
      const double z = pure_partition_function(a, c.x);
      const double t = img.factor * pure_partition_function(a, img.image.x);
      const double e = std::abs(t / z - 1);
      r.add({a.to_string(), c.x, {}, 0, 0, t, z, e, e <= threshold});
    }
  if (n >= 2)
    for (const auto& w : all_visit_orders(n - 1))
      for (int i = 0; i < configs; ++i) {
        const auto c = random_visit_config(rng, w).as_config();
        const auto mu = random_mobius(rng, c.x.front());
        const auto img = apply_mobius(c, mu);
        const double z = zeta_omega(w, c);
        const double t = img.factor * zeta_omega(w, img.image);
        const double e = std::abs(t / z - 1);
        r.add({"zeta" + visit_order_string(w), c.x, c.xhat, 0, 0, t, z, e, e <= threshold});
      }
  return r;
}

CheckReport check_asy2(int n, int configs, std::uint64_t seed, double threshold) {
  require_size(n, 2, kMaxMatrixSize, "N");
  CheckReport r("asy2", "relative deviation of the collapse limit <= threshold", threshold);
  RngStream rng(seed, 4);
  const auto patterns = enumerate_dyck_paths(n);
  const auto smaller = enumerate_dyck_paths(n - 1);
  for (int i = 0; i < configs; ++i) {
    const auto p = random_increasing_points(rng, 2 * n);
    for (const auto& a : patterns)
      for (int j = 1; j < 2 * n; ++j) {
        const double xi = 0.5 * (p[j - 1] + p[j]);
        auto fn = [&](const std::vector<double>& x) { return pure_partition_function(a, x); };
        const auto ex = collapse_limit(fn, p, {{j, xi}}, kExponentDelta);
        std::vector<double> rest;
        for (int l = 0; l < 2 * n; ++l)
          if (l != j - 1 && l != j) rest.push_back(p[l]);
        const auto w = wedge_ops(a, j);
        double expected = 0, e = 0;
        const bool up = w.kind == WedgeKind::up;
        if (up) {
          expected = pure_partition_function(*w.removed, rest);
          e = std::abs(ex.limit / expected - 1);
        } else {
          // relative to the size of the surviving partition functions
          double ref = 0;
          for (const auto& b : smaller) ref = std::max(ref, pure_partition_function(b, rest));
          e = std::abs(ex.limit) / ref;
        }
        r.add({a.to_string() + "@" + std::to_string(j), p, {}, j, ex.eps.back(), ex.limit, expected, e,
               e <= threshold && (ex.converged || !up)});
      }
  }
  return r;
}

CheckReport check_visit_asymptotics(int nprime, int configs, std::uint64_t seed, double rel_tolerance,
                                    double zero_tolerance) {
  require_size(nprime, 1, 3, "N'");
  CheckReport r("visit_asymptotics",
                "first visit constant 2 and consecutive constant 10 within the relative tolerance; zero branches "
                "within the zero tolerance",
                rel_tolerance);
  RngStream rng(seed, 5);
  auto record = [&](const std::string& label, const VisitConfig& c, int index, const AsymptoticsResult& res,
                    double target) {
    const double e = res.expected_nonzero ? std::abs(res.constant / target - 1) : std::abs(res.constant);
    const double tol = res.expected_nonzero ? rel_tolerance : zero_tolerance;
    // a zero branch extrapolates roundoff, so only the nonzero ones must settle
    const bool settled = !res.expected_nonzero || res.limit.converged;
    r.add({label, {c.x_in, c.x_out}, c.visits, index, res.limit.eps.back(), res.constant,
           res.expected_nonzero ? target : 0, e, e <= tol && settled});
  };
  for (const auto& w : all_visit_orders(nprime))
    for (int i = 0; i < configs; ++i) {
      const auto c = random_visit_config(rng, w);
      const std::string name = "zeta" + visit_order_string(w);
      std::vector<int> plus, minus;  // visits in line order on each arc
      for (int s = 0; s < nprime; ++s) (w[static_cast<std::size_t>(s)] > 0 ? plus : minus).push_back(s);
      if (!plus.empty())
        record(name + ":first_visit", c, plus.front(),
               asymptotics_constant(w, AsymptoticKind::first_visit, c, plus.front()), 2);
      for (const auto* arc : {&plus, &minus})
        for (std::size_t k = 1; k < arc->size(); ++k) {
          const int s = (*arc)[k - 1], t = (*arc)[k];
          record(name + ":consecutive:" + std::to_string(s) + "," + std::to_string(t), c, s,
                 asymptotics_constant(w, AsymptoticKind::consecutive_visits, c, s, t), 10);
        }
    }
  return r;
}

}  // namespace ustlab
