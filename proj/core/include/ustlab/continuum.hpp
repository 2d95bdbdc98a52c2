#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ustlab/combinatorics.hpp"
#include "ustlab/lattice.hpp"

namespace ustlab {

// κ = 2 conformal data.
inline constexpr double kKappa = 2.0;
inline constexpr double kWeightH12 = 1.0;      // h of a curve endpoint x_j
inline constexpr double kWeightH13 = 3.0;      // ĥ of a visit point x̂_s
inline constexpr double kExponentDelta = -2.0;       // leading collapse exponent
inline constexpr double kExponentDeltaPrime = 1.0;   // subleading (fusion) exponent

// 𝒦(x, y) = (y - x)^{-2} and its first derivatives in either argument.
struct DerivKernel {
  // order_x, order_y ∈ {0, 1}
  static double eval(double x, double y, int order_x = 0, int order_y = 0);
};

// Plain points x (weight h) and visit points x̂ (weight ĥ). Each group is
// strictly increasing; how the groups interleave is up to the evaluator.
struct ContinuumConfig {
  std::vector<double> x;
  std::vector<double> xhat;
};

using Evaluator = std::function<double(const ContinuumConfig&)>;

// Kernel matrix of 𝒦 at the ordered points, optionally with derivative slots.
// derivative[l] marks label l+1 as differentiated; zeroed holds label pairs
// (j, j+1) whose entry is set to zero.
KernelMatrix<double> continuum_kernel(const std::vector<double>& points, const std::vector<bool>& derivative = {},
                                      const std::vector<int>& zeroed_pair_starts = {});

// 𝒵_α(x_1, ..., x_2N) = Σ_{β ⪰ α} M⁻¹_{α,β} Δ_β^𝒦. Throws std::invalid_argument
// for unordered points or N > 6. The rational backend reads the points
// exactly and only rounds the final sum, which matters near collisions where
// the determinants cancel to many digits.
double pure_partition_function(const DyckPath& alpha, const std::vector<double>& points,
                               Backend backend = Backend::floating);

// Boundary visit geometry on the real line: x_in is the leftmost point,
// visits are listed in visiting order; + visits lie between x_in and x_out.
struct VisitConfig {
  double x_in = 0;
  std::vector<double> visits;
  double x_out = 1;

  ContinuumConfig as_config() const { return {{x_in, x_out}, visits}; }
};

// Label positions 1..2N (for 𝒵_{α(ω)}) of a visit configuration; the two labels
// of visit s both sit at x̂_s. Throws if the configuration does not match ω.
std::vector<double> visit_label_points(const VisitOrder& w, const VisitConfig& c);

// ζ_ω by the continuous replacing algorithm with analytic derivative entries.
// pair_order lists the visits (0-based) in the order the replacements are
// applied; empty means s = N', ..., 1.
double zeta_omega(const VisitOrder& w, const VisitConfig& c, const std::vector<int>& pair_order = {},
                  Backend backend = Backend::floating);
// Same, reading x_in, x_out from cfg.x and the visits from cfg.xhat.
double zeta_omega(const VisitOrder& w, const ContinuumConfig& cfg, Backend backend = Backend::floating);

struct MobiusMap {
  double a = 1, b = 0, c = 0, d = 1;  // μ(z) = (a z + b) / (c z + d)

  double operator()(double z) const { return (a * z + b) / (c * z + d); }
  double derivative(double z) const;
  static MobiusMap identity() { return {}; }
};

struct MobiusResult {
  ContinuumConfig image;
  double factor = 1;  // Π μ'(x_j)^h Π μ'(x̂_s)^ĥ
};

// Throws std::invalid_argument for ad - bc <= 0, a pole among the points, or
// an image that no longer keeps the cyclic order starting at the leftmost point.
MobiusResult apply_mobius(const ContinuumConfig& cfg, const MobiusMap& mu);

enum class PdeKind { second_order, third_order };

struct PdeResidual {
  double residual = 0;  // raw / scale
  double raw = 0;
  double scale = 0;     // sum of the absolute values of the operator's terms
  double h = 0;
};

// Finite-difference residual of 𝒟^{(j)} = ∂_j² - 2 ℒ_{-2}^{(j)} (index into
// cfg.x) or 𝒟̂^{(s)} = ∂_s³ - 8 ℒ̂_{-2}^{(s)} ∂_s + 12 ℒ̂_{-3}^{(s)} (index into
// cfg.xhat). h = 0 picks 1e-3 times the smallest gap; h must stay below
// gap / 10.
PdeResidual pde_residual(const Evaluator& fn, const ContinuumConfig& cfg, PdeKind kind, int index, double h = 0);

struct CollapsePair {
  int j = 1;      // 1-based: points j and j+1 merge
  double xi = 0;  // merge location
};

struct Extrapolation {
  double limit = 0;
  double error_estimate = 0;
  bool converged = false;  // last diagonal step below 1e-4 of the sequence size
  std::vector<double> eps;
  std::vector<double> scaled;    // fn · Π gap^{-exponent} at each level
  std::vector<double> diagonal;  // Richardson tableau diagonal
};

struct Schedule {
  double eps0 = 0;  // 0: min gap / 8 of the collapsed configuration
  int levels = 6;
};

// Richardson limit of fn(points) · Π gap^{-exponent} as every listed pair
// closes symmetrically around its ξ with gap ε_k = ε₀ / 2^k. The entries of
// points at collapsing labels are ignored. Throws std::invalid_argument for
// fewer than 2 levels, overlapping pairs or a merge point outside its window.
Extrapolation collapse_limit(const std::function<double(const std::vector<double>&)>& fn, std::vector<double> points,
                             const std::vector<CollapsePair>& pairs, double exponent, const Schedule& schedule = {});

enum class AsymptoticKind { first_visit, consecutive_visits };

struct AsymptoticsResult {
  double constant = 0;   // limit / reference
  double reference = 0;  // ζ_{ω'} at the merged configuration
  VisitOrder reduced;
  bool expected_nonzero = false;
  Extrapolation limit;   // of |gap|^3 ζ_ω
};

// first_visit: visit s (0-based, a + visit closest to x_in) merges with x_in.
// consecutive_visits: visits s and t, adjacent on the line, merge; ω' drops
// the later of the two.
AsymptoticsResult asymptotics_constant(const VisitOrder& w, AsymptoticKind kind, const VisitConfig& c, int s,
                                       int t = -1, const Schedule& schedule = {});

std::string to_string(PdeKind k);
std::string to_string(AsymptoticKind k);

}  // namespace ustlab
