#include "stormqueue/aggregated.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "stormqueue/kernels.hpp"

namespace stormqueue {

LowerBoundRates lower_bound_rates(const CountSeries& counts) {
  const auto& grid = counts.grid();
  const double step = grid.step();
  std::vector<std::vector<double>> up(counts.region_count()), down(counts.region_count());
  for (std::size_t r = 0; r < counts.region_count(); ++r) {
    const auto c = counts.counts(r);
    up[r].assign(c.size(), 0.0);
    down[r].assign(c.size(), 0.0);
    for (std::size_t i = 1; i < c.size(); ++i) {
      const std::int64_t delta = c[i] - c[i - 1];
      if (delta > 0) up[r][i] = static_cast<double>(delta) / step;
      if (delta < 0) down[r][i] = static_cast<double>(-delta) / step;
    }
  }
  return {RateSeries(grid, counts.regions(), std::move(up)),
          RateSeries(grid, counts.regions(), std::move(down))};
}

RateSeries aggregate_regions(std::span<const RateSeries> series, std::string name) {
  if (series.empty()) throw std::invalid_argument("aggregate_regions: no series");
  const auto& grid = series.front().grid();
  std::vector<double> sum(grid.size(), 0.0);
  for (const auto& s : series) {
    if (!(s.grid() == grid)) throw std::invalid_argument("aggregate_regions: grid mismatch");
    for (std::size_t r = 0; r < s.region_count(); ++r) {
      const auto v = s.values(r);
      for (std::size_t i = 0; i < v.size(); ++i) sum[i] += v[i];
    }
  }
  return RateSeries(grid, {std::move(name)}, {std::move(sum)});
}

RateSeries aggregate_regions(const RateSeries& series, std::string name) {
  return aggregate_regions(std::span<const RateSeries>(&series, 1), std::move(name));
}

namespace {

double stationary_lag_density(double lag, double shape, double scale) {
  const double log_pdf = weibull_log_pdf(lag, shape, scale);
  return std::exp(log_pdf);
}

/// Precomputed data for repeated objective evaluations.
class Deconvolution {
 public:
  Deconvolution(std::span<const double> failure_rate, std::span<const double> recovery_rate,
                double step, LsSpan span)
      : recovery_(recovery_rate), step_(step), lags_(failure_rate.size()) {
    if (failure_rate.size() != recovery_rate.size()) {
      throw std::invalid_argument("fit_stationary_weibull_ls: series lengths differ");
    }
    for (std::size_t j = 0; j < failure_rate.size(); ++j) {
      if (failure_rate[j] != 0.0) sources_.push_back({j, failure_rate[j] * step});
    }
    begin_ = 0;
    end_ = failure_rate.size();
    if (span == LsSpan::active && !sources_.empty()) {
      begin_ = sources_.front().index;
      std::size_t last = begin_;
      for (std::size_t i = 0; i < recovery_rate.size(); ++i) {
        if (recovery_rate[i] != 0.0) last = std::max(last, i);
      }
      end_ = last + 1;
    }
  }

  bool empty_source() const { return sources_.empty(); }

  double signal_norm() const {
    double s = 0.0;
    for (std::size_t i = begin_; i < end_; ++i) s += recovery_[i] * recovery_[i];
    return s;
  }

  double operator()(double shape, double scale) const {
    std::vector<double> g(lags_.size());
    g[0] = stationary_lag_density(0.5 * step_, shape, scale);
    for (std::size_t m = 1; m < g.size(); ++m) {
      g[m] = stationary_lag_density(static_cast<double>(m) * step_, shape, scale);
    }
    double total = 0.0;
    for (std::size_t i = begin_; i < end_; ++i) {
      double conv = 0.0;
      for (const auto& s : sources_) {
        if (s.index > i) break;
        conv += g[i - s.index] * s.mass;
      }
      const double r = conv - recovery_[i];
      total += r * r;
    }
    return total;
  }

 private:
  struct Source {
    std::size_t index;
    double mass;
  };
  std::span<const double> recovery_;
  double step_;
  std::vector<double> lags_;
  std::vector<Source> sources_;
  std::size_t begin_ = 0;
  std::size_t end_ = 0;
};

struct Point {
  double log_shape;
  double log_scale;
};

Point clamp_to_box(Point p) {
  p.log_shape = std::clamp(p.log_shape, std::log(kLsShapeMin), std::log(kLsShapeMax));
  p.log_scale = std::clamp(p.log_scale, std::log(kLsScaleMin), std::log(kLsScaleMax));
  return p;
}

/// Nelder-Mead on the box-clamped log parameters.
std::pair<Point, double> nelder_mead(const Deconvolution& f, Point start, double step_shape,
                                     double step_scale, double rel_tol, std::size_t& evaluations) {
  auto eval = [&](Point p) {
    ++evaluations;
    return f(std::exp(p.log_shape), std::exp(p.log_scale));
  };
  std::array<Point, 3> simplex{start, clamp_to_box({start.log_shape + step_shape, start.log_scale}),
                               clamp_to_box({start.log_shape, start.log_scale + step_scale})};
  std::array<double, 3> value{};
  for (std::size_t v = 0; v < 3; ++v) value[v] = eval(simplex[v]);

  for (int it = 0; it < 2000; ++it) {
    std::array<std::size_t, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
    const Point best = simplex[order[0]];
    const Point mid = simplex[order[1]];
    const Point worst = simplex[order[2]];

    double size = 0.0;
    for (const auto& p : simplex) {
      size = std::max({size, std::abs(p.log_shape - best.log_shape), std::abs(p.log_scale - best.log_scale)});
    }
    const double spread = value[order[2]] - value[order[0]];
    if (size < rel_tol && spread <= rel_tol * (std::abs(value[order[0]]) + 1e-300)) break;
    if (size < 1e-3 * rel_tol) break;

    const Point centroid{0.5 * (best.log_shape + mid.log_shape), 0.5 * (best.log_scale + mid.log_scale)};
    auto along = [&](double t) {
      return clamp_to_box({centroid.log_shape + t * (worst.log_shape - centroid.log_shape),
                           centroid.log_scale + t * (worst.log_scale - centroid.log_scale)});
    };
    const Point reflected = along(-1.0);
    const double fr = eval(reflected);
    if (fr < value[order[0]]) {
      const Point expanded = along(-2.0);
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[order[2]] = expanded;
        value[order[2]] = fe;
      } else {
        simplex[order[2]] = reflected;
        value[order[2]] = fr;
      }
      continue;
    }
    if (fr < value[order[1]]) {
      simplex[order[2]] = reflected;
      value[order[2]] = fr;
      continue;
    }
    const Point contracted = fr < value[order[2]] ? along(-0.5) : along(0.5);
    const double fc = eval(contracted);
    if (fc < std::min(fr, value[order[2]])) {
      simplex[order[2]] = contracted;
      value[order[2]] = fc;
      continue;
    }
    for (std::size_t k : {order[1], order[2]}) {
      simplex[k] = {0.5 * (simplex[k].log_shape + best.log_shape),
                    0.5 * (simplex[k].log_scale + best.log_scale)};
      value[k] = eval(simplex[k]);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(value.begin(), value.end()) - value.begin());
  return {simplex[best], value[best]};
}

}  // namespace

std::vector<double> convolve_stationary(std::span<const double> failure_rate, double step,
                                        double shape, double scale) {
  const std::size_t n = failure_rate.size();
  std::vector<std::vector<double>> kernel(1, std::vector<double>(n));
  if (n > 0) kernel[0][0] = stationary_lag_density(0.5 * step, shape, scale);
  for (std::size_t m = 1; m < n; ++m) {
    kernel[0][m] = stationary_lag_density(static_cast<double>(m) * step, shape, scale);
  }
  std::vector<double> mass(n);
  for (std::size_t j = 0; j < n; ++j) mass[j] = failure_rate[j] * step;
  const std::vector<std::size_t> which(n, 0);
  std::vector<double> out(n, 0.0);
  parallel::causal_convolve({mass, which, &kernel}, out);
  return out;
}

double ls_objective(std::span<const double> failure_rate, std::span<const double> recovery_rate,
                    double step, double shape, double scale, LsSpan span) {
  return Deconvolution(failure_rate, recovery_rate, step, span)(shape, scale);
}

StationaryWeibullFit fit_stationary_weibull_ls(const RateSeries& failure_rate,
                                               const RateSeries& recovery_rate,
                                               const LsFitOptions& options) {
  if (!(failure_rate.grid() == recovery_rate.grid())) {
    throw std::invalid_argument("fit_stationary_weibull_ls: grid mismatch");
  }
  if (options.scan_points < 2) throw std::invalid_argument("fit_stationary_weibull_ls: scan_points < 2");
  const RateSeries fl = failure_rate.region_count() == 1 ? failure_rate : aggregate_regions(failure_rate);
  const RateSeries rl = recovery_rate.region_count() == 1 ? recovery_rate : aggregate_regions(recovery_rate);
  const double step = fl.grid().step();
  const Deconvolution objective(fl.values(0), rl.values(0), step, options.span);
  if (objective.empty_source()) {
    throw std::invalid_argument("fit_stationary_weibull_ls: failure-rate bound is identically zero");
  }

  StationaryWeibullFit fit;
  fit.signal_norm = objective.signal_norm();
  if (fit.signal_norm == 0.0) {
    fit.degenerate = true;
    fit.warning = "recovery-rate bound is identically zero; fit sits on the parameter boundary";
  }

  const std::size_t m = options.scan_points;
  const double ls0 = std::log(kLsShapeMin), ls1 = std::log(kLsShapeMax);
  const double lg0 = std::log(kLsScaleMin), lg1 = std::log(kLsScaleMax);
  const double dk = (ls1 - ls0) / static_cast<double>(m - 1);
  const double dg = (lg1 - lg0) / static_cast<double>(m - 1);
  std::vector<Point> probes;
  probes.reserve(m * m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      probes.push_back({ls0 + dk * static_cast<double>(a), lg0 + dg * static_cast<double>(b)});
    }
  }
  auto eval = [&](const Point& p) { return objective(std::exp(p.log_shape), std::exp(p.log_scale)); };
  const std::vector<double> values = options.use_parallel
                                         ? parallel::scan(std::span<const Point>(probes), eval)
                                         : serial::scan(std::span<const Point>(probes), eval);
  fit.evaluations = probes.size();

  std::vector<std::size_t> order(probes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  Point best = probes[order[0]];
  double best_value = values[order[0]];
  const std::size_t starts = std::min<std::size_t>(3, order.size());
  for (std::size_t s = 0; s < starts; ++s) {
    auto [p, v] = nelder_mead(objective, probes[order[s]], dk, dg, options.relative_tolerance, fit.evaluations);
    if (v < best_value) {
      best = p;
      best_value = v;
    }
  }
  fit.shape = std::exp(best.log_shape);
  fit.scale = std::exp(best.log_scale);
  fit.objective = best_value;
  return fit;
}

CumulativeBounds cumulative_bounds(const RateSeries& failure_rate, const RateSeries& recovery_rate) {
  if (!(failure_rate.grid() == recovery_rate.grid())) {
    throw std::invalid_argument("cumulative_bounds: grid mismatch");
  }
  const double step = failure_rate.grid().step();
  auto running = [step](std::span<const double> v) {
    std::vector<double> out(v.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      acc += v[i] * step;
      out[i] = acc;
    }
    return out;
  };
  CumulativeBounds out;
  for (std::size_t r = 0; r < failure_rate.region_count(); ++r) {
    out.failures.push_back(running(failure_rate.values(r)));
  }
  for (std::size_t r = 0; r < recovery_rate.region_count(); ++r) {
    out.recoveries.push_back(running(recovery_rate.values(r)));
  }
  return out;
}

}  // namespace stormqueue
