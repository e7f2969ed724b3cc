// Inference from aggregated outage counts N(t, Z_j): lower bounds on failure
// and recovery rates from signed increments, and a stationary single-Weibull
// duration fit by least-squares deconvolution.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stormqueue/core.hpp"

namespace stormqueue {

struct LowerBoundRates {
  RateSeries failure;   // positive increments / step
  RateSeries recovery;  // |negative increments| / step
};

/// Per region and bin i >= 1: dN = N_i - N_{i-1}; positive dN / step goes to
/// the failure bound, -dN / step to the recovery bound. Bin 0 is 0.
LowerBoundRates lower_bound_rates(const CountSeries& counts);

/// Pointwise sum across every region of every series, as one region `name`.
/// Throws std::invalid_argument on grid mismatch.
RateSeries aggregate_regions(std::span<const RateSeries> series, std::string name = "network");
RateSeries aggregate_regions(const RateSeries& series, std::string name = "network");

/// sum_{j <= i} g((i - j) step) fl_j step with a single Weibull g, lag 0 at
/// step/2.
std::vector<double> convolve_stationary(std::span<const double> failure_rate, double step,
                                        double shape, double scale);

enum class LsSpan {
  full,    // every grid point
  active,  // first nonzero failure bound .. last nonzero recovery bound
};

struct LsFitOptions {
  LsSpan span = LsSpan::full;
  std::size_t scan_points = 32;  // per axis
  double relative_tolerance = 1e-6;
  bool use_parallel = true;
};

struct StationaryWeibullFit {
  double shape = 0.0;
  double scale = 0.0;
  double objective = 0.0;    // sum of squared residuals
  double signal_norm = 0.0;  // sum of squared recovery bounds over the span
  std::size_t evaluations = 0;
  bool degenerate = false;
  std::string warning;
};

inline constexpr double kLsShapeMin = 0.05;
inline constexpr double kLsShapeMax = 60.0;
inline constexpr double kLsScaleMin = 1e-3;
inline constexpr double kLsScaleMax = 1e4;

/// Squared L2 distance between convolve_stationary(fl) and rl over `span`.
double ls_objective(std::span<const double> failure_rate, std::span<const double> recovery_rate,
                    double step, double shape, double scale, LsSpan span = LsSpan::full);

/// Minimizes ls_objective over (k, gamma) in [0.05, 60] x [1e-3, 1e4] h: a
/// log-spaced scan, then Nelder-Mead in log coordinates from the best scan
/// points. Multi-region inputs are summed first. Throws std::invalid_argument
/// if the failure bound is identically zero; an all-zero recovery bound gives
/// a boundary fit flagged degenerate.
StationaryWeibullFit fit_stationary_weibull_ls(const RateSeries& failure_rate,
                                               const RateSeries& recovery_rate,
                                               const LsFitOptions& options = {});

struct CumulativeBounds {
  std::vector<std::vector<double>> failures;    // N_f lower bound
  std::vector<std::vector<double>> recoveries;  // N_r lower bound
};

/// Rectangle-rule running sums: N_f(t_i) = sum_{m <= i} fl_m step.
CumulativeBounds cumulative_bounds(const RateSeries& failure_rate, const RateSeries& recovery_rate);

}  // namespace stormqueue
