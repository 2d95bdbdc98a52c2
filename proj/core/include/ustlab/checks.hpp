#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ustlab/continuum.hpp"
#include "ustlab/montecarlo.hpp"

namespace ustlab {

// Random continuum configurations and the property checks run by the CLI
// `check` command and the acceptance binary.

// Increasing points with gaps uniform in [lo, hi], starting in [-1, 1).
std::vector<double> random_increasing_points(RngStream& rng, int n, double lo = 0.3, double hi = 2.0);
// Random admissible geometry for ω: x_in, + visits, x_out, - visits reversed.
VisitConfig random_visit_config(RngStream& rng, const VisitOrder& w);
// All 2^n visit orders of length n.
std::vector<VisitOrder> all_visit_orders(int n);

Evaluator partition_evaluator(const DyckPath& alpha);
Evaluator zeta_evaluator(const VisitOrder& w);

struct CheckSample {
  std::string label;
  std::vector<double> x;
  std::vector<double> xhat;
  int index = 0;
  double h = 0;
  double value = 0;
  double expected = 0;
  double error = 0;  // the quantity compared against the threshold
  bool pass = false;
};

struct CheckReport {
  CheckReport(std::string name_, std::string criterion_, double threshold_)
      : name(std::move(name_)), criterion(std::move(criterion_)), threshold(threshold_) {}

  std::string name;
  std::string criterion;  // human-readable pass rule
  double threshold = 0;
  double worst = 0;
  bool pass = true;
  std::vector<CheckSample> samples;

  void add(CheckSample s);
};

// |𝒟^{(j)} 𝒵_α| / scale ≤ threshold for every α of size n and every j.
CheckReport check_pde2(int n, int configs, std::uint64_t seed, double threshold = 1e-6);
// Residual ratios r(h) / r(h/2) ≥ 3.5 along h = gap/11, gap/22, ... (up to four
// halvings), stopping once r(h/2) falls below kDecayMargin times the roundoff
// floor 4 kEvalAccuracy |𝒵| / h². Samples at roundoff already for h = gap/11
// pass with the label suffix " (at roundoff)".
inline constexpr double kEvalAccuracy = 1e-13;  // relative accuracy of the floating 𝒵_α
inline constexpr double kDecayMargin = 30;
CheckReport check_pde2_decay(int n, int configs, std::uint64_t seed, double min_ratio = 3.5);
// Second- and third-order residuals of ζ_ω for every ω of length n'.
CheckReport check_zeta_pde(int nprime, int configs, std::uint64_t seed, double threshold = 1e-4);
// |Π μ'^w 𝒵(μ(x)) / 𝒵(x) - 1| for random μ, for 𝒵_α of size n and ζ_ω of length n - 1.
CheckReport check_covariance(int n, int configs, std::uint64_t seed, double threshold = 1e-10);
// Collapse limits of 𝒵_α at every adjacent pair against 𝒵 of the pattern
// with the link removed (up-wedge) or zero.
CheckReport check_asy2(int n, int configs, std::uint64_t seed, double threshold = 1e-6);
// First-visit (2) and consecutive-visit (10) constants within rel_tolerance,
// zero branches within zero_tolerance.
CheckReport check_visit_asymptotics(int nprime, int configs, std::uint64_t seed, double rel_tolerance = 0.01,
                                    double zero_tolerance = 1e-6);

}  // namespace ustlab
