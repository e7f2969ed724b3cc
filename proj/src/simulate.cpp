#include "stormqueue/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "stormqueue/random.hpp"

namespace stormqueue {

PiecewiseLinearRate::PiecewiseLinearRate(std::vector<std::pair<double, double>> knots)
    : knots_(std::move(knots)) {
  if (knots_.empty()) throw std::invalid_argument("PiecewiseLinearRate: no knots");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    const auto [t, v] = knots_[i];
    if (!std::isfinite(t) || !std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("PiecewiseLinearRate: knot values must be finite and >= 0");
    }
    if (i > 0 && !(knots_[i - 1].first < t)) {
      throw std::invalid_argument("PiecewiseLinearRate: knot times must increase strictly");
    }
  }
}

PiecewiseLinearRate PiecewiseLinearRate::constant(double value) {
  return PiecewiseLinearRate({{0.0, value}});
}

PiecewiseLinearRate PiecewiseLinearRate::on_grid(const TimeGrid& grid,
                                                 std::span<const double> values) {
  if (values.size() != grid.size()) {
    throw std::invalid_argument("PiecewiseLinearRate: values do not match grid");
  }
  std::vector<std::pair<double, double>> knots;
  knots.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) knots.emplace_back(grid.time(i), values[i]);
  return PiecewiseLinearRate(std::move(knots));
}

double PiecewiseLinearRate::operator()(double t) const {
  if (t <= knots_.front().first) return knots_.front().second;
  if (t >= knots_.back().first) return knots_.back().second;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                                   [](double x, const auto& k) { return x < k.first; });
  const auto& [t1, v1] = *it;
  const auto& [t0, v0] = *(it - 1);
  return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
}

double PiecewiseLinearRate::max_on(double a, double b) const {
  double m = std::max((*this)(a), (*this)(b));
  for (const auto& [t, v] : knots_) {
    if (t > a && t < b) m = std::max(m, v);
  }
  return m;
}

double PiecewiseLinearRate::integral(double a, double b) const {
  if (b <= a) return 0.0;
  std::vector<double> cuts{a};
  for (const auto& [t, v] : knots_) {
    if (t > a && t < b) cuts.push_back(t);
  }
  cuts.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += 0.5 * ((*this)(cuts[i]) + (*this)(cuts[i + 1])) * (cuts[i + 1] - cuts[i]);
  }
  return total;
}

PiecewiseLinearRate bell_rate(const TimeGrid& grid, double peak, double center, double width,
                              double base) {
  if (!(width > 0.0)) throw std::invalid_argument("bell_rate: width must be positive");
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double z = (grid.time(i) - center) / width;
    values[i] = base + (peak - base) * std::exp(-0.5 * z * z);
  }
  return PiecewiseLinearRate::on_grid(grid, values);
}

namespace {

double model_offset(const TimeGrid& grid, const PiecewiseDurationModel& model) {
  return static_cast<double>(grid.origin_minutes() - model.origin_minutes()) / 60.0;
}

}  // namespace

void ScenarioSpec::validate() const {
  if (rates.size() != partition.size()) {
    throw std::invalid_argument("ScenarioSpec: " + std::to_string(rates.size()) +
                                " rate functions for " + std::to_string(partition.size()) +
                                " regions");
  }
  const double offset = model_offset(grid, durations);
  if (!durations.interval_of(offset) || !durations.interval_of(offset + grid.last_time())) {
    throw std::invalid_argument("ScenarioSpec: duration model does not cover the grid span");
  }
  for (std::size_t i = 0; i < durations.interval_count(); ++i) {
    for (std::size_t j = 0; j < partition.size(); ++j) {
      if (durations.find(i, j) == nullptr) {
        throw std::invalid_argument("ScenarioSpec: no duration mixture for interval " +
                                    std::to_string(i) + ", region " + partition[j].id);
      }
    }
  }
}

std::vector<std::vector<double>> simulate_failures(const ScenarioSpec& spec) {
  spec.validate();
  const auto& grid = spec.grid;
  const auto m = static_cast<long long>(spec.partition.size());
  std::vector<std::vector<double>> out(spec.partition.size());

#pragma omp parallel for schedule(dynamic, 1)
  for (long long jj = 0; jj < m; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    const auto& rate = spec.rates[j];
    Rng rng(spec.seed, {static_cast<std::uint64_t>(Stream::failures), j});
    auto& times = out[j];
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      const double a = grid.time(i);
      const double b = grid.time(i + 1);
      const double envelope = rate.max_on(a, b);
      if (envelope <= 0.0) continue;
      double t = a;
      while (true) {
        t += rng.exponential(envelope);
        if (t >= b) break;
        if (rng.uniform() * envelope < rate(t)) times.push_back(t);
      }
    }
  }
  return out;
}

std::vector<Event> simulate_durations(const ScenarioSpec& spec,
                                      const std::vector<std::vector<double>>& failures) {
  if (failures.size() != spec.partition.size()) {
    throw std::invalid_argument("simulate_durations: failure lists do not match regions");
  }
  const double offset = model_offset(spec.grid, spec.durations);
  std::vector<Event> events;
  for (std::size_t j = 0; j < failures.size(); ++j) {
    Rng rng(spec.seed, {static_cast<std::uint64_t>(Stream::durations), j});
    for (double t : failures[j]) {
      const auto interval = spec.durations.interval_of(t + offset);
      if (!interval) {
        throw std::invalid_argument("simulate_durations: failure time " + std::to_string(t) +
                                    " h lies outside every duration interval");
      }
      const auto& comps = spec.durations.at(*interval, j).components();
      const double pick = rng.uniform();
      double cumulative = 0.0;
      const WeibullComponent* chosen = &comps.back();
      for (const auto& c : comps) {
        cumulative += c.weight;
        if (pick < cumulative) {
          chosen = &c;
          break;
        }
      }
      const double d = weibull_quantile(rng.uniform(), chosen->shape, chosen->scale);
      events.push_back({j, t, d});
    }
  }
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.failure_time < b.failure_time;
  });
  return events;
}

std::vector<Event> simulate_events(const ScenarioSpec& spec) {
  return simulate_durations(spec, simulate_failures(spec));
}

CountingPaths build_counting_paths(std::span<const Event> events, const TimeGrid& grid,
                                   const RegionPartition& partition) {
  const std::size_t m = partition.size();
  std::vector<std::vector<double>> fail(m), rec(m);
  for (const auto& e : events) {
    if (e.region >= m) throw std::invalid_argument("build_counting_paths: unknown region index");
    if (!(e.failure_time >= 0.0 && e.failure_time <= grid.last_time())) {
      throw std::invalid_argument("build_counting_paths: failure time outside grid span");
    }
    if (!(e.duration >= 0.0)) throw std::invalid_argument("build_counting_paths: negative duration");
    fail[e.region].push_back(e.failure_time);
    rec[e.region].push_back(e.recovery_time());
  }
  std::vector<std::vector<std::int64_t>> nf(m), nr(m), n(m);
  for (std::size_t j = 0; j < m; ++j) {
    std::sort(fail[j].begin(), fail[j].end());
    std::sort(rec[j].begin(), rec[j].end());
    nf[j].resize(grid.size());
    nr[j].resize(grid.size());
    n[j].resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double t = grid.time(i);
      nf[j][i] = std::upper_bound(fail[j].begin(), fail[j].end(), t) - fail[j].begin();
      nr[j][i] = std::upper_bound(rec[j].begin(), rec[j].end(), t) - rec[j].begin();
      n[j][i] = nf[j][i] - nr[j][i];
    }
  }
  const auto ids = partition.ids();
  return {CountSeries(grid, ids, std::move(nf)), CountSeries(grid, ids, std::move(nr)),
          CountSeries(grid, ids, std::move(n))};
}

}  // namespace stormqueue
