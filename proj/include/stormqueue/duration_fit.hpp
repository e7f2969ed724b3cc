// Maximum-likelihood Weibull-mixture fits of failure durations by EM, either
// for one sample or piecewise over failure-time intervals and regions.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stormqueue/core.hpp"

namespace stormqueue {

/// Thrown when a sample is below the size needed for the requested fit.
class InsufficientSamples : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct FitConfig {
  /// Number of mixture components; 0 selects l in 1..max_components by BIC.
  std::size_t component_count = 0;
  std::size_t max_components = 3;
  std::size_t max_iterations = 1000;
  /// Stop when the log-likelihood gain falls below tolerance * |loglik|.
  double tolerance = 1e-10;
  std::size_t restart_count = 1;
  std::uint64_t seed = 0;
  /// Hold every component's shape at this value (scale and weight still fit).
  std::optional<double> fixed_shape;

  void validate() const;
};

/// Minimum sample count for an l-component fit: 5 * (3l - 1).
constexpr std::size_t sample_floor(std::size_t components) { return 5 * (3 * components - 1); }

struct MixtureFit {
  WeibullMixture mixture;
  double log_likelihood = 0.0;
  double bic = 0.0;
  std::size_t sample_count = 0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Observed-data log-likelihood at every EM iteration of the winning restart.
  std::vector<double> trace;
  /// Trace indices right after a collapsed component (rho < 1e-4) was dropped;
  /// the likelihood may step down there.
  std::vector<std::size_t> drops;
};

/// EM fit of a Weibull mixture.
///
/// Durations are sorted and clamped to kDurationEpsilon first, so input order
/// never affects the result. Restart 0 starts from a quantile split of the
/// log-durations with a per-group moment estimate; further restarts jitter the
/// split points from their own substream. The best restart by log-likelihood
/// wins. Throws InsufficientSamples below sample_floor(l).
MixtureFit fit_weibull_mixture(std::span<const double> durations, const FitConfig& cfg);

/// Weighted single-Weibull MLE (shape, scale): the M-step. Shape solves the
/// profile score equation by safeguarded Newton in [0.05, 60].
WeibullComponent weighted_weibull_mle(std::span<const double> log_durations,
                                      std::span<const double> weights,
                                      std::optional<double> fixed_shape = std::nullopt);

struct CellReport {
  std::size_t interval = 0;
  std::size_t region = 0;
  std::size_t sample_count = 0;
  std::optional<MixtureFit> fit;
  std::string note;
};

struct PiecewiseFit {
  PiecewiseDurationModel model;
  std::vector<CellReport> cells;
  /// Human-readable merge log.
  std::vector<std::string> merges;
};

/// Region-pooled piecewise fit over intervals [b_i, b_{i+1}). Intervals with
/// fewer than the sample floor are merged into the neighbour whose centre is
/// nearer. Throws InsufficientSamples if a lone remaining interval is still
/// short, std::invalid_argument if an event lies outside every interval.
PiecewiseFit fit_piecewise(std::span<const Event> events, std::vector<double> boundaries,
                           const FitConfig& cfg, std::int64_t origin_minutes = 0);

enum class RegionFitStatus { piecewise, time_invariant, excluded };

struct RegionReport {
  std::string region;
  std::size_t sample_count = 0;
  RegionFitStatus status = RegionFitStatus::excluded;
  std::string diagnostic;
};

struct GeoFit {
  PiecewiseDurationModel model;
  std::vector<CellReport> cells;
  std::vector<RegionReport> regions;
};

inline constexpr std::size_t kDefaultRegionFloor = sample_floor(3);

/// Per-region piecewise fit. A region with fewer than `region_floor` events
/// is excluded; a region where some interval is below the sample floor gets
/// one time-invariant mixture shared by all its intervals.
GeoFit fit_geo_piecewise(std::span<const Event> events, std::vector<double> boundaries,
                         const RegionPartition& partition, const FitConfig& cfg,
                         std::size_t region_floor = kDefaultRegionFloor,
                         std::int64_t origin_minutes = 0);

std::string to_string(RegionFitStatus status);

}  // namespace stormqueue
