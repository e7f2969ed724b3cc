// Time-varying failure and recovery rates from event epochs by a centred
// moving average of the empirical counting process.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "stormqueue/core.hpp"

namespace stormqueue {

inline constexpr double kDefaultTauHours = 5.0;
inline constexpr double kDefaultStepHours = 0.25;

/// Rate at grid point t ~ #events in (t - tau, t + tau] / (2 tau).
///
/// Each event spreads unit mass uniformly over its window [s - tau, s + tau];
/// the parts of the window outside the grid support [-step/2, last_time +
/// step/2] are reflected back inside at the edge. Reported values are cell
/// averages over [t_i - step/2, t_i + step/2], so sum_i rate_i * step equals
/// the event count, and points at least tau from both edges see the plain
/// window count.
///
/// Throws std::invalid_argument if tau < grid.step() or an epoch lies outside
/// the grid support.
RateSeries moving_average_rate(const std::vector<std::vector<double>>& event_times, double tau,
                               const TimeGrid& grid, std::vector<std::string> regions);

RateSeries failure_rate_from_events(std::span<const Event> events,
                                    const RegionPartition& partition, double tau,
                                    const TimeGrid& grid);

/// Same estimator on recovery epochs t_i + d_i. Recoveries after the grid
/// support are censored and do not contribute.
RateSeries recovery_rate_from_events(std::span<const Event> events,
                                     const RegionPartition& partition, double tau,
                                     const TimeGrid& grid);

/// Trapezoidal running integral per region, starting at 0.
std::vector<std::vector<double>> cumulative_from_rate(const RateSeries& rate);

}  // namespace stormqueue
