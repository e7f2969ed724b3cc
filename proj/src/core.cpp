#include "stormqueue/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string_view>
#include <numeric>
#include <stdexcept>
#include <tuple>
#include <unordered_set>

namespace stormqueue {

namespace {

void check_params(double shape, double scale) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw std::domain_error("weibull: shape must be positive, got " + std::to_string(shape));
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::domain_error("weibull: scale must be positive, got " + std::to_string(scale));
  }
}

void check_duration(double d) {
  if (!(d >= 0.0)) {
    throw std::domain_error("weibull: duration must be nonnegative");
  }
}

}  // namespace

TimeGrid::TimeGrid(std::int64_t origin_minutes, double step_hours, std::size_t count)
    : origin_minutes_(origin_minutes), step_(step_hours), count_(count) {
  if (!(step_hours > 0.0) || !std::isfinite(step_hours)) {
    throw std::invalid_argument("TimeGrid: step must be positive");
  }
  if (count == 0) {
    throw std::invalid_argument("TimeGrid: count must be at least 1");
  }
}

RegionPartition::RegionPartition(std::vector<Region> regions) : regions_(std::move(regions)) {
  if (regions_.empty()) {
    throw std::invalid_argument("RegionPartition: at least one region required");
  }
  std::unordered_set<std::string> seen;
  for (const auto& r : regions_) {
    if (r.id.empty()) throw std::invalid_argument("RegionPartition: empty region id");
    if (!seen.insert(r.id).second) {
      throw std::invalid_argument("RegionPartition: duplicate region id '" + r.id + "'");
    }
  }
}

RegionPartition RegionPartition::from_ids(const std::vector<std::string>& ids) {
  std::vector<Region> regions;
  regions.reserve(ids.size());
  for (const auto& id : ids) regions.push_back({id, id});
  return RegionPartition(std::move(regions));
}

std::vector<std::string> RegionPartition::ids() const {
  std::vector<std::string> out;
  out.reserve(regions_.size());
  for (const auto& r : regions_) out.push_back(r.id);
  return out;
}

std::optional<std::size_t> RegionPartition::index_of(std::string_view id) const {
  for (std::size_t j = 0; j < regions_.size(); ++j) {
    if (regions_[j].id == id) return j;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Weibull

double weibull_pdf(double d, double shape, double scale) {
  check_params(shape, scale);
  check_duration(d);
  if (shape < 1.0) d = std::max(d, kDurationEpsilon);
  if (d == 0.0) return shape == 1.0 ? 1.0 / scale : 0.0;
  const double z = d / scale;
  const double zk = std::pow(z, shape);
  if (zk > 745.0) return 0.0;
  return (shape / scale) * (zk / z) * std::exp(-zk);
}

double weibull_log_pdf(double d, double shape, double scale) {
  check_params(shape, scale);
  check_duration(d);
  if (shape < 1.0) d = std::max(d, kDurationEpsilon);
  if (d == 0.0) {
    return shape == 1.0 ? -std::log(scale) : -std::numeric_limits<double>::infinity();
  }
  const double log_z = std::log(d / scale);
  return std::log(shape / scale) + (shape - 1.0) * log_z - std::exp(shape * log_z);
}

double weibull_cdf(double d, double shape, double scale) {
  check_params(shape, scale);
  check_duration(d);
  return -std::expm1(-std::pow(d / scale, shape));
}

double weibull_mean(double shape, double scale) {
  check_params(shape, scale);
  return scale * std::tgamma(1.0 + 1.0 / shape);
}

double weibull_quantile(double u, double shape, double scale) {
  check_params(shape, scale);
  if (!(u >= 0.0 && u < 1.0)) throw std::domain_error("weibull_quantile: u must be in [0, 1)");
  return scale * std::pow(-std::log1p(-u), 1.0 / shape);
}

// ---------------------------------------------------------------------------
// Mixture

WeibullMixture::WeibullMixture(std::vector<WeibullComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("WeibullMixture: no components");
  double total = 0.0;
  for (const auto& c : components_) {
    check_params(c.shape, c.scale);
    if (!(c.weight > 0.0 && c.weight <= 1.0)) {
      throw std::invalid_argument("WeibullMixture: weight must be in (0, 1], got " +
                                  std::to_string(c.weight));
    }
    total += c.weight;
  }
  const double gap = std::abs(total - 1.0);
  if (gap > 1e-6) {
    throw std::invalid_argument("WeibullMixture: weights sum to " + std::to_string(total));
  }
  if (gap > 1e-9) {
    for (auto& c : components_) c.weight /= total;
  }
  canonicalize();
}

WeibullMixture WeibullMixture::normalized(std::vector<WeibullComponent> components) {
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0)) throw std::invalid_argument("WeibullMixture: nonpositive weight");
    total += c.weight;
  }
  for (auto& c : components) c.weight /= total;
  return WeibullMixture(std::move(components));
}

void WeibullMixture::canonicalize() {
  std::sort(components_.begin(), components_.end(),
            [](const WeibullComponent& a, const WeibullComponent& b) {
              return std::tie(a.scale, a.shape, a.weight) < std::tie(b.scale, b.shape, b.weight);
            });
}

double WeibullMixture::pdf(double d) const {
  double out = 0.0;
  for (const auto& c : components_) out += c.weight * weibull_pdf(d, c.shape, c.scale);
  return out;
}

double WeibullMixture::cdf(double d) const {
  double out = 0.0;
  for (const auto& c : components_) out += c.weight * weibull_cdf(d, c.shape, c.scale);
  return std::min(out, 1.0);
}

double WeibullMixture::mean() const {
  double out = 0.0;
  for (const auto& c : components_) out += c.weight * weibull_mean(c.shape, c.scale);
  return out;
}

double mixture_cdf(const WeibullMixture& mix, double d) { return mix.cdf(d); }

// ---------------------------------------------------------------------------
// Piecewise model

PiecewiseDurationModel::PiecewiseDurationModel(std::vector<double> boundaries,
                                               std::vector<std::string> region_ids,
                                               std::map<CellKey, WeibullMixture> cells,
                                               std::int64_t origin_minutes)
    : boundaries_(std::move(boundaries)),
      region_ids_(std::move(region_ids)),
      cells_(std::move(cells)),
      origin_minutes_(origin_minutes) {
  if (boundaries_.size() < 2) {
    throw std::invalid_argument("PiecewiseDurationModel: need at least one interval");
  }
  for (std::size_t i = 0; i + 1 < boundaries_.size(); ++i) {
    if (!(boundaries_[i] < boundaries_[i + 1])) {
      throw std::invalid_argument("PiecewiseDurationModel: boundaries must increase strictly");
    }
  }
  if (region_ids_.empty()) throw std::invalid_argument("PiecewiseDurationModel: no regions");
  for (const auto& [key, mix] : cells_) {
    if (key.first >= interval_count() || key.second >= region_ids_.size()) {
      throw std::invalid_argument("PiecewiseDurationModel: cell (" + std::to_string(key.first) +
                                  ", " + std::to_string(key.second) + ") out of range");
    }
  }
}

PiecewiseDurationModel PiecewiseDurationModel::stationary(WeibullMixture mix, double begin,
                                                          double end,
                                                          std::int64_t origin_minutes) {
  std::map<CellKey, WeibullMixture> cells;
  cells.emplace(CellKey{0, 0}, std::move(mix));
  return PiecewiseDurationModel({begin, end}, {kPooledRegion}, std::move(cells), origin_minutes);
}

bool PiecewiseDurationModel::pooled() const noexcept {
  return region_ids_.size() == 1 && region_ids_.front() == kPooledRegion;
}

std::optional<std::size_t> PiecewiseDurationModel::interval_of(double t) const {
  if (!(t >= boundaries_.front() && t <= boundaries_.back())) return std::nullopt;
  if (t == boundaries_.back()) return interval_count() - 1;
  const auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), t);
  return static_cast<std::size_t>(it - boundaries_.begin()) - 1;
}

const WeibullMixture* PiecewiseDurationModel::find(std::size_t interval, std::size_t region) const {
  const auto it = cells_.find({interval, pooled() ? 0 : region});
  return it == cells_.end() ? nullptr : &it->second;
}

const WeibullMixture& PiecewiseDurationModel::at(std::size_t interval, std::size_t region) const {
  const auto* mix = find(interval, region);
  if (mix == nullptr) {
    throw std::out_of_range("PiecewiseDurationModel: no mixture for interval " +
                            std::to_string(interval) + ", region " + std::to_string(region));
  }
  return *mix;
}

double infant_recovery_prob(const PiecewiseDurationModel& model, std::size_t interval,
                            std::size_t region, double d0) {
  if (!(d0 > 0.0)) throw std::invalid_argument("infant_recovery_prob: d0 must be positive");
  if (std::isinf(d0)) {
    model.at(interval, region);
    return 1.0;
  }
  return mixture_cdf(model.at(interval, region), d0);
}

// ---------------------------------------------------------------------------
// Series

RateSeries::RateSeries(TimeGrid grid, std::vector<std::string> regions,
                       std::vector<std::vector<double>> values)
    : grid_(grid), regions_(std::move(regions)), values_(std::move(values)) {
  if (regions_.size() != values_.size()) {
    throw std::invalid_argument("RateSeries: region/value count mismatch");
  }
  for (const auto& v : values_) {
    if (v.size() != grid_.size()) throw std::invalid_argument("RateSeries: length != grid size");
    for (double x : v) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw std::invalid_argument("RateSeries: rates must be finite and nonnegative");
      }
    }
  }
}

RateSeries::RateSeries(TimeGrid grid, std::vector<std::string> regions)
    : grid_(grid),
      regions_(std::move(regions)),
      values_(regions_.size(), std::vector<double>(grid.size(), 0.0)) {}

CountSeries::CountSeries(TimeGrid grid, std::vector<std::string> regions,
                         std::vector<std::vector<std::int64_t>> counts)
    : grid_(grid), regions_(std::move(regions)), counts_(std::move(counts)) {
  if (regions_.size() != counts_.size()) {
    throw std::invalid_argument("CountSeries: region/count mismatch");
  }
  for (const auto& c : counts_) {
    if (c.size() != grid_.size()) throw std::invalid_argument("CountSeries: length != grid size");
    if (std::any_of(c.begin(), c.end(), [](std::int64_t x) { return x < 0; })) {
      throw std::invalid_argument("CountSeries: negative count");
    }
  }
}

CountSeries CountSeries::total(std::string name) const {
  std::vector<std::int64_t> sum(grid_.size(), 0);
  for (const auto& c : counts_) {
    for (std::size_t i = 0; i < c.size(); ++i) sum[i] += c[i];
  }
  return CountSeries(grid_, {std::move(name)}, {std::move(sum)});
}

}  // namespace stormqueue
