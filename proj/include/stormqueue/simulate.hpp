// Forward simulation of multivariate failure-recovery histories: a
// nonhomogeneous Poisson failure process per region (thinning) and durations
// drawn from the piecewise Weibull-mixture model at each failure epoch.
#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "stormqueue/core.hpp"

namespace stormqueue {

/// Nonnegative rate, linear between knots (hours, events/hour) and constant
/// beyond the first and last knot.
class PiecewiseLinearRate {
 public:
  explicit PiecewiseLinearRate(std::vector<std::pair<double, double>> knots);
  static PiecewiseLinearRate constant(double value);
  static PiecewiseLinearRate on_grid(const TimeGrid& grid, std::span<const double> values);

  double operator()(double t) const;
  double max_on(double a, double b) const;
  double integral(double a, double b) const;
  const std::vector<std::pair<double, double>>& knots() const noexcept { return knots_; }

 private:
  std::vector<std::pair<double, double>> knots_;
};

/// base + (peak - base) * exp(-((t - center) / width)^2 / 2), sampled at the
/// grid points and interpolated linearly.
PiecewiseLinearRate bell_rate(const TimeGrid& grid, double peak, double center, double width,
                              double base = 0.0);

struct ScenarioSpec {
  TimeGrid grid;
  RegionPartition partition;
  std::vector<PiecewiseLinearRate> rates;  // one per region
  PiecewiseDurationModel durations;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on rate/region mismatch or a duration model
  /// that does not cover [0, grid.last_time()].
  void validate() const;
};

/// Failure epochs per region (hours, ascending) on [0, grid.last_time()].
/// Thinning uses the per-cell maximum of the rate as envelope. Each region
/// draws from its own substream, so output does not depend on thread count.
std::vector<std::vector<double>> simulate_failures(const ScenarioSpec& spec);

/// One event per failure, sorted by (failure_time, region). Durations come
/// from the mixture of the failure's (interval, region): component chosen with
/// probability rho, then an inverse-CDF Weibull draw.
std::vector<Event> simulate_durations(const ScenarioSpec& spec,
                                      const std::vector<std::vector<double>>& failures);

std::vector<Event> simulate_events(const ScenarioSpec& spec);

/// N_f(t) = #{t_i <= t}, N_r(t) = #{t_i + d_i <= t}, N = N_f - N_r, per region.
struct CountingPaths {
  CountSeries failures;
  CountSeries recoveries;
  CountSeries active;
};

CountingPaths build_counting_paths(std::span<const Event> events, const TimeGrid& grid,
                                   const RegionPartition& partition);

}  // namespace stormqueue
