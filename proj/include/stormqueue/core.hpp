// Domain types shared by every stage of the failure-recovery pipeline, plus
// the Weibull and Weibull-mixture math used for failure durations.
//
// Time is measured in hours relative to a grid origin; the origin itself is an
// absolute UTC timestamp in minutes since the Unix epoch.
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace stormqueue {

/// Durations below this (hours) are clamped before evaluating a density with
/// shape < 1, and zero durations are clamped to it before fitting.
inline constexpr double kDurationEpsilon = 1e-6;

/// Uniform time grid: points origin + i * step for 0 <= i < size.
class TimeGrid {
 public:
  TimeGrid(std::int64_t origin_minutes, double step_hours, std::size_t count);

  std::int64_t origin_minutes() const noexcept { return origin_minutes_; }
  double step() const noexcept { return step_; }
  std::size_t size() const noexcept { return count_; }

  /// Hours since origin of point i.
  double time(std::size_t i) const noexcept { return static_cast<double>(i) * step_; }
  /// Hours since origin of the last grid point.
  double last_time() const noexcept { return time(count_ - 1); }

  bool operator==(const TimeGrid&) const = default;

 private:
  std::int64_t origin_minutes_;
  double step_;
  std::size_t count_;
};

struct Region {
  std::string id;
  std::string name;
  bool operator==(const Region&) const = default;
};

/// Ordered geographic regions Z_1..Z_m.
class RegionPartition {
 public:
  explicit RegionPartition(std::vector<Region> regions);
  static RegionPartition from_ids(const std::vector<std::string>& ids);

  std::size_t size() const noexcept { return regions_.size(); }
  const Region& operator[](std::size_t j) const { return regions_.at(j); }
  const std::vector<Region>& regions() const noexcept { return regions_; }
  std::vector<std::string> ids() const;
  std::optional<std::size_t> index_of(std::string_view id) const;

  bool operator==(const RegionPartition&) const = default;

 private:
  std::vector<Region> regions_;
};

/// One failed entity. Times in hours relative to the grid origin.
struct Event {
  std::size_t region = 0;
  double failure_time = 0.0;
  double duration = 0.0;

  double recovery_time() const noexcept { return failure_time + duration; }
  bool operator==(const Event&) const = default;
};

struct WeibullComponent {
  double shape = 1.0;   // k
  double scale = 1.0;   // gamma, hours
  double weight = 1.0;  // rho

  bool operator==(const WeibullComponent&) const = default;
};

double weibull_pdf(double d, double shape, double scale);
double weibull_log_pdf(double d, double shape, double scale);
double weibull_cdf(double d, double shape, double scale);
double weibull_mean(double shape, double scale);
/// Inverse CDF; u in [0, 1).
double weibull_quantile(double u, double shape, double scale);

/// Weighted sum of Weibull densities with weights summing to one.
///
/// Components are stored sorted by ascending scale (ties broken by shape, then
/// weight), so two mixtures built from permutations of the same components
/// compare equal.
class WeibullMixture {
 public:
  /// Accepts weights summing to 1 within 1e-9; renormalizes within 1e-6;
  /// throws std::invalid_argument otherwise.
  explicit WeibullMixture(std::vector<WeibullComponent> components);

  /// Renormalizes any positive weights, for parameter tables whose weights
  /// were rounded before printing.
  static WeibullMixture normalized(std::vector<WeibullComponent> components);

  const std::vector<WeibullComponent>& components() const noexcept { return components_; }
  std::size_t size() const noexcept { return components_.size(); }

  double pdf(double d) const;
  double cdf(double d) const;
  double mean() const;
  double max_scale() const noexcept { return components_.back().scale; }

  bool operator==(const WeibullMixture&) const = default;

 private:
  WeibullMixture() = default;
  void canonicalize();

  std::vector<WeibullComponent> components_;
};

/// P{D < d} for the mixture.
double mixture_cdf(const WeibullMixture& mix, double d);

/// Duration mixtures indexed by failure-time interval and region.
///
/// Intervals are [b_i, b_{i+1}) for boundaries b_0 < ... < b_p (hours from
/// `origin_minutes`), with the last interval closed on the right. A pooled
/// model has the single region id "*" and applies to every region.
class PiecewiseDurationModel {
 public:
  using CellKey = std::pair<std::size_t, std::size_t>;
  static constexpr const char* kPooledRegion = "*";

  PiecewiseDurationModel(std::vector<double> boundaries, std::vector<std::string> region_ids,
                         std::map<CellKey, WeibullMixture> cells, std::int64_t origin_minutes = 0);

  /// One interval, one pooled region, one mixture.
  static PiecewiseDurationModel stationary(WeibullMixture mix, double begin, double end,
                                           std::int64_t origin_minutes = 0);

  std::size_t interval_count() const noexcept { return boundaries_.size() - 1; }
  const std::vector<double>& boundaries() const noexcept { return boundaries_; }
  const std::vector<std::string>& region_ids() const noexcept { return region_ids_; }
  const std::map<CellKey, WeibullMixture>& cells() const noexcept { return cells_; }
  std::int64_t origin_minutes() const noexcept { return origin_minutes_; }
  bool pooled() const noexcept;

  /// Interval containing t (hours from this model's origin), if any.
  std::optional<std::size_t> interval_of(double t) const;

  /// nullptr when the cell is absent. A pooled model answers for any region.
  const WeibullMixture* find(std::size_t interval, std::size_t region) const;
  /// Throws std::out_of_range for an unknown cell.
  const WeibullMixture& at(std::size_t interval, std::size_t region) const;

  bool operator==(const PiecewiseDurationModel&) const = default;

 private:
  std::vector<double> boundaries_;
  std::vector<std::string> region_ids_;
  std::map<CellKey, WeibullMixture> cells_;
  std::int64_t origin_minutes_ = 0;
};

/// Probability that a failure in cell (interval, region) recovers within d0
/// hours. The aging probability is its complement.
double infant_recovery_prob(const PiecewiseDurationModel& model, std::size_t interval,
                            std::size_t region, double d0);

/// Per-region nonnegative rates (events per hour) sampled on a grid.
class RateSeries {
 public:
  RateSeries(TimeGrid grid, std::vector<std::string> regions,
             std::vector<std::vector<double>> values);
  /// All-zero series.
  RateSeries(TimeGrid grid, std::vector<std::string> regions);

  const TimeGrid& grid() const noexcept { return grid_; }
  const std::vector<std::string>& regions() const noexcept { return regions_; }
  std::size_t region_count() const noexcept { return regions_.size(); }
  std::span<const double> values(std::size_t region) const { return values_.at(region); }
  const std::vector<std::vector<double>>& all_values() const noexcept { return values_; }

  bool operator==(const RateSeries&) const = default;

 private:
  TimeGrid grid_;
  std::vector<std::string> regions_;
  std::vector<std::vector<double>> values_;
};

/// Per-region nonnegative integer counts on a grid.
class CountSeries {
 public:
  CountSeries(TimeGrid grid, std::vector<std::string> regions,
              std::vector<std::vector<std::int64_t>> counts);

  const TimeGrid& grid() const noexcept { return grid_; }
  const std::vector<std::string>& regions() const noexcept { return regions_; }
  std::size_t region_count() const noexcept { return regions_.size(); }
  std::span<const std::int64_t> counts(std::size_t region) const { return counts_.at(region); }
  const std::vector<std::vector<std::int64_t>>& all_counts() const noexcept { return counts_; }

  /// Pointwise sum over regions as a one-region series named `name`.
  CountSeries total(std::string name = "ALL") const;

  bool operator==(const CountSeries&) const = default;

 private:
  TimeGrid grid_;
  std::vector<std::string> regions_;
  std::vector<std::vector<std::int64_t>> counts_;
};

}  // namespace stormqueue
