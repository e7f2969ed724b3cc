#include "stormqueue/rate_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stormqueue {

namespace {

// Adds density 1/(2 tau) over [lo, hi] ∩ support to the cell averages.
void deposit(double lo, double hi, double tau, const TimeGrid& grid, std::vector<double>& rate) {
  const double step = grid.step();
  const double lo_support = -0.5 * step;
  lo = std::max(lo, lo_support);
  hi = std::min(hi, grid.last_time() + 0.5 * step);
  if (!(hi > lo)) return;
  const auto last = static_cast<long long>(grid.size()) - 1;
  const auto first_cell = std::clamp(static_cast<long long>(std::floor((lo - lo_support) / step)), 0LL, last);
  const auto last_cell = std::clamp(static_cast<long long>(std::floor((hi - lo_support) / step)), 0LL, last);
  for (long long c = first_cell; c <= last_cell; ++c) {
    const double cell_lo = lo_support + static_cast<double>(c) * step;
    const double overlap = std::min(hi, cell_lo + step) - std::max(lo, cell_lo);
    if (overlap > 0.0) rate[static_cast<std::size_t>(c)] += overlap / (2.0 * tau * step);
  }
}

// The window [s - tau, s + tau] folded back into the support at both edges
// (mirror images of s), so every event contributes exactly unit mass and a
// uniform event stream gives a flat rate right up to the edges.
void spread_event(double s, double tau, const TimeGrid& grid, std::vector<double>& rate) {
  const double a = -0.5 * grid.step();
  const double b = grid.last_time() + 0.5 * grid.step();
  const double period = 2.0 * (b - a);
  const auto k_lo = static_cast<long long>(std::floor((a - tau - s) / period)) - 1;
  const auto k_hi = static_cast<long long>(std::ceil((b + tau - s) / period)) + 1;
  for (long long k = k_lo; k <= k_hi; ++k) {
    const double shift = static_cast<double>(k) * period;
    for (double p : {s + shift, 2.0 * a - s + shift}) {
      if (p + tau > a && p - tau < b) deposit(p - tau, p + tau, tau, grid, rate);
    }
  }
}

}  // namespace

RateSeries moving_average_rate(const std::vector<std::vector<double>>& event_times, double tau,
                               const TimeGrid& grid, std::vector<std::string> regions) {
  if (!(tau >= grid.step())) {
    throw std::invalid_argument("moving_average_rate: tau (" + std::to_string(tau) +
                                " h) must be at least the grid step (" +
                                std::to_string(grid.step()) + " h)");
  }
  if (event_times.size() != regions.size()) {
    throw std::invalid_argument("moving_average_rate: one epoch list per region required");
  }
  const double lo_support = -0.5 * grid.step();
  const double hi_support = grid.last_time() + 0.5 * grid.step();
  const auto m = static_cast<long long>(regions.size());
  std::vector<std::vector<double>> values(regions.size(), std::vector<double>(grid.size(), 0.0));
  bool out_of_span = false;

#pragma omp parallel for schedule(dynamic, 1) reduction(|| : out_of_span)
  for (long long jj = 0; jj < m; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    for (double s : event_times[j]) {
      if (!(s >= lo_support && s <= hi_support)) {
        out_of_span = true;
        continue;
      }
      spread_event(s, tau, grid, values[j]);
    }
  }
  if (out_of_span) {
    throw std::invalid_argument("moving_average_rate: event epoch outside the grid support");
  }
  return RateSeries(grid, std::move(regions), std::move(values));
}

RateSeries failure_rate_from_events(std::span<const Event> events,
                                    const RegionPartition& partition, double tau,
                                    const TimeGrid& grid) {
  std::vector<std::vector<double>> times(partition.size());
  for (const auto& e : events) times.at(e.region).push_back(e.failure_time);
  for (auto& t : times) std::sort(t.begin(), t.end());
  return moving_average_rate(times, tau, grid, partition.ids());
}

RateSeries recovery_rate_from_events(std::span<const Event> events,
                                     const RegionPartition& partition, double tau,
                                     const TimeGrid& grid) {
  const double hi_support = grid.last_time() + 0.5 * grid.step();
  std::vector<std::vector<double>> times(partition.size());
  for (const auto& e : events) {
    const double r = e.recovery_time();
    if (r <= hi_support) times.at(e.region).push_back(r);
  }
  for (auto& t : times) std::sort(t.begin(), t.end());
  return moving_average_rate(times, tau, grid, partition.ids());
}

std::vector<std::vector<double>> cumulative_from_rate(const RateSeries& rate) {
  const double step = rate.grid().step();
  std::vector<std::vector<double>> out;
  out.reserve(rate.region_count());
  for (std::size_t j = 0; j < rate.region_count(); ++j) {
    const auto v = rate.values(j);
    std::vector<double> cum(v.size(), 0.0);
    for (std::size_t i = 1; i < v.size(); ++i) cum[i] = cum[i - 1] + 0.5 * step * (v[i - 1] + v[i]);
    out.push_back(std::move(cum));
  }
  return out;
}

}  // namespace stormqueue
