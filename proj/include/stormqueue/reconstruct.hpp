// Recovery rate from failure rate and duration model by the transient
// convolution relation  lambda_r(t) = int_0^t g(t - s | s) lambda_f(s) ds,
// reconstruction of E{N(t)}, and path-comparison metrics.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "stormqueue/core.hpp"

namespace stormqueue {

/// How g is discretized over a lag cell of width step.
enum class ConvolutionRule {
  /// Probability mass of the lag cell: G(step/2) at lag 0, then
  /// G((m + 1/2) step) - G((m - 1/2) step), divided by step. Conserves mass.
  cell_mass,
  /// Left-endpoint density g(m step), with lag 0 evaluated at step/2.
  density,
};

/// Discretized kernel for one mixture over `lags` lags, in events/hour per
/// unit input rate (multiply by lambda_f * step to get a recovery rate).
std::vector<double> lag_kernel(const WeibullMixture& mix, double step, std::size_t lags,
                               ConvolutionRule rule);

/// Per region: lambda_r(i step) = sum_{j <= i} g((i - j) step | j step) lambda_f(j step) step.
/// The mixture is chosen by the failure epoch j*step. A pooled model applies to
/// every region; otherwise regions are matched by id. Throws
/// std::invalid_argument if the grid is not covered by the model intervals or a
/// region has no mixture.
RateSeries recovery_rate_from_model(const RateSeries& failure_rate,
                                    const PiecewiseDurationModel& model,
                                    ConvolutionRule rule = ConvolutionRule::cell_mass);

/// Same computation with the serial reference kernel.
RateSeries recovery_rate_from_model_serial(const RateSeries& failure_rate,
                                           const PiecewiseDurationModel& model,
                                           ConvolutionRule rule = ConvolutionRule::cell_mass);

struct ReconstructedPaths {
  std::vector<std::string> regions;
  std::vector<std::vector<double>> values;
  /// Largest amount clipped at zero, per region.
  std::vector<double> clipped;
  std::vector<std::string> diagnostics;
};

/// E{N(t)} = trapezoidal integral of lambda_f - lambda_r, clipped at 0 from
/// below (a diagnostic is recorded when clipping exceeds one event).
ReconstructedPaths reconstruct_N(const RateSeries& failure_rate, const RateSeries& recovery_rate);

struct PathDistance {
  double rmse = 0.0;
  double sup = 0.0;
  /// max(a) / max(b); 1 when both peaks are zero.
  double peak_ratio = 1.0;
};

PathDistance path_distance(std::span<const double> a, std::span<const double> b);

}  // namespace stormqueue
