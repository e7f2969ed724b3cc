#include "stormqueue/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "stormqueue/kernels.hpp"

namespace stormqueue {

std::vector<double> lag_kernel(const WeibullMixture& mix, double step, std::size_t lags,
                               ConvolutionRule rule) {
  std::vector<double> w(lags, 0.0);
  if (lags == 0) return w;
  if (rule == ConvolutionRule::density) {
    w[0] = mix.pdf(0.5 * step);
    for (std::size_t m = 1; m < lags; ++m) w[m] = mix.pdf(static_cast<double>(m) * step);
    return w;
  }
  double lower = 0.0;
  for (std::size_t m = 0; m < lags; ++m) {
    const double upper = mix.cdf((static_cast<double>(m) + 0.5) * step);
    w[m] = (upper - lower) / step;
    lower = upper;
  }
  return w;
}

namespace {

template <typename Convolve>
RateSeries convolve_with_model(const RateSeries& failure_rate, const PiecewiseDurationModel& model,
                               ConvolutionRule rule, Convolve&& convolve) {
  const auto& grid = failure_rate.grid();
  const std::size_t n = grid.size();
  const double offset =
      static_cast<double>(grid.origin_minutes() - model.origin_minutes()) / 60.0;

  std::vector<std::size_t> interval_of_point(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto interval = model.interval_of(offset + grid.time(i));
    if (!interval) {
      std::ostringstream msg;
      msg << "recovery_rate_from_model: grid point " << grid.time(i)
          << " h is outside the model intervals [" << model.boundaries().front() - offset << ", "
          << model.boundaries().back() - offset << "] h";
      throw std::invalid_argument(msg.str());
    }
    interval_of_point[i] = *interval;
  }

  std::vector<std::vector<double>> out(failure_rate.region_count());
  for (std::size_t r = 0; r < failure_rate.region_count(); ++r) {
    std::size_t model_region = 0;
    if (!model.pooled()) {
      const auto& ids = model.region_ids();
      const auto it = std::find(ids.begin(), ids.end(), failure_rate.regions()[r]);
      if (it == ids.end()) {
        throw std::invalid_argument("recovery_rate_from_model: model has no region '" +
                                    failure_rate.regions()[r] + "'");
      }
      model_region = static_cast<std::size_t>(it - ids.begin());
    }
    std::vector<std::vector<double>> kernels(model.interval_count());
    for (std::size_t i = 0; i < model.interval_count(); ++i) {
      const auto* mix = model.find(i, model_region);
      if (mix != nullptr) kernels[i] = lag_kernel(*mix, grid.step(), n, rule);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (kernels[interval_of_point[i]].empty()) {
        throw std::invalid_argument("recovery_rate_from_model: no mixture for region '" +
                                    failure_rate.regions()[r] + "' in interval " +
                                    std::to_string(interval_of_point[i]));
      }
    }
    const auto rate = failure_rate.values(r);
    std::vector<double> mass(n);
    for (std::size_t i = 0; i < n; ++i) mass[i] = rate[i] * grid.step();
    out[r].assign(n, 0.0);
    convolve(CausalConvolution{mass, interval_of_point, &kernels}, std::span<double>(out[r]));
    for (auto& v : out[r]) v = std::max(v, 0.0);
  }
  return RateSeries(grid, failure_rate.regions(), std::move(out));
}

}  // namespace

RateSeries recovery_rate_from_model(const RateSeries& failure_rate,
                                    const PiecewiseDurationModel& model, ConvolutionRule rule) {
  return convolve_with_model(failure_rate, model, rule,
                             [](const CausalConvolution& c, std::span<double> out) {
                               parallel::causal_convolve(c, out);
                             });
}

RateSeries recovery_rate_from_model_serial(const RateSeries& failure_rate,
                                           const PiecewiseDurationModel& model,
                                           ConvolutionRule rule) {
  return convolve_with_model(failure_rate, model, rule,
                             [](const CausalConvolution& c, std::span<double> out) {
                               serial::causal_convolve(c, out);
                             });
}

ReconstructedPaths reconstruct_N(const RateSeries& failure_rate, const RateSeries& recovery_rate) {
  if (!(failure_rate.grid() == recovery_rate.grid())) {
    throw std::invalid_argument("reconstruct_N: failure and recovery rates use different grids");
  }
  if (failure_rate.regions() != recovery_rate.regions()) {
    throw std::invalid_argument("reconstruct_N: failure and recovery rates cover different regions");
  }
  const double step = failure_rate.grid().step();
  ReconstructedPaths out;
  out.regions = failure_rate.regions();
  for (std::size_t r = 0; r < failure_rate.region_count(); ++r) {
    const auto f = failure_rate.values(r);
    const auto g = recovery_rate.values(r);
    std::vector<double> path(f.size(), 0.0);
    double running = 0.0;
    double clipped = 0.0;
    for (std::size_t i = 1; i < f.size(); ++i) {
      running += 0.5 * step * ((f[i - 1] - g[i - 1]) + (f[i] - g[i]));
      clipped = std::max(clipped, -running);
      path[i] = std::max(running, 0.0);
    }
    if (clipped > 1.0) {
      std::ostringstream msg;
      msg << "region " << out.regions[r] << ": reconstructed N clipped at zero by up to "
          << clipped << " events";
      out.diagnostics.push_back(msg.str());
    }
    out.values.push_back(std::move(path));
    out.clipped.push_back(clipped);
  }
  return out;
}

PathDistance path_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("path_distance: length mismatch");
  if (a.empty()) throw std::invalid_argument("path_distance: empty series");
  double sq = 0.0, sup = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
    sup = std::max(sup, std::abs(d));
  }
  const double peak_a = *std::max_element(a.begin(), a.end());
  const double peak_b = *std::max_element(b.begin(), b.end());
  double ratio = 1.0;
  if (peak_b != 0.0) {
    ratio = peak_a / peak_b;
  } else if (peak_a != 0.0) {
    ratio = std::numeric_limits<double>::infinity();
  }
  return {std::sqrt(sq / static_cast<double>(a.size())), sup, ratio};
}

}  // namespace stormqueue
