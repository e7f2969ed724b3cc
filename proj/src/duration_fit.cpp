#include "stormqueue/duration_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "parallel_util.hpp"
#include "stormqueue/kernels.hpp"
#include "stormqueue/random.hpp"

namespace stormqueue {

namespace {

constexpr double kShapeLo = 0.05;
constexpr double kShapeHi = 60.0;
constexpr double kShapeTol = 1e-10;
constexpr double kCollapseWeight = 1e-4;
constexpr double kEulerGamma = 0.57721566490153286;

double neumaier_sum(std::span<const double> xs) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

struct TiltedMoments {
  double s0 = 0.0;    // sum w e^{k x}
  double mean = 0.0;  // tilted mean of x
  double var = 0.0;   // tilted variance of x
};

TiltedMoments tilted(std::span<const double> x, std::span<const double> w, double k) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (w[i] == 0.0) continue;
    const double e = w[i] * std::exp(k * x[i]);
    s0 += e;
    s1 += e * x[i];
    s2 += e * x[i] * x[i];
  }
  const double mean = s1 / s0;
  return {s0, mean, std::max(0.0, s2 / s0 - mean * mean)};
}

WeibullComponent weighted_mle(std::span<const double> log_durations,
                              std::span<const double> weights, std::optional<double> fixed_shape,
                              double shape_guess) {
  if (log_durations.size() != weights.size()) {
    throw std::invalid_argument("weighted_weibull_mle: size mismatch");
  }
  double total = 0.0, weighted_log = 0.0;
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    total += weights[i];
    weighted_log += weights[i] * log_durations[i];
    top = std::max(top, log_durations[i]);
  }
  if (!(total > 0.0)) throw std::invalid_argument("weighted_weibull_mle: zero total weight");

  // Shift by the largest log-duration so e^{k x} never overflows.
  std::vector<double> x(log_durations.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = log_durations[i] - top;
  const double centred_mean = weighted_log / total - top;

  // Profile score in k; strictly decreasing.
  auto score = [&](double k, double* slope) {
    const auto m = tilted(x, weights, k);
    if (slope != nullptr) *slope = -1.0 / (k * k) - m.var;
    return 1.0 / k + centred_mean - m.mean;
  };

  double k = 0.0;
  if (fixed_shape) {
    k = *fixed_shape;
  } else if (score(kShapeLo, nullptr) <= 0.0) {
    k = kShapeLo;
  } else if (score(kShapeHi, nullptr) >= 0.0) {
    k = kShapeHi;
  } else {
    double lo = kShapeLo, hi = kShapeHi;
    k = std::clamp(shape_guess, lo * 1.01, hi * 0.99);
    for (int it = 0; it < 200; ++it) {
      double slope = 0.0;
      const double h = score(k, &slope);
      if (h > 0.0) lo = k;
      else hi = k;
      double next = k - h / slope;
      if (!(next > lo && next < hi)) next = std::sqrt(lo * hi);
      const bool done = std::abs(next - k) <= kShapeTol * k || (hi - lo) <= kShapeTol * k;
      k = next;
      if (done) break;
    }
  }
  const auto m = tilted(x, weights, k);
  const double log_scale = top + std::log(m.s0 / total) / k;
  return {k, std::exp(log_scale), 1.0};
}

WeibullComponent moment_start(std::span<const double> log_durations,
                              std::optional<double> fixed_shape) {
  const double n = static_cast<double>(log_durations.size());
  double mean = 0.0;
  for (double v : log_durations) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : log_durations) var += (v - mean) * (v - mean);
  var /= std::max(1.0, n - 1.0);
  // log D is Gumbel-min: sd = pi / (k sqrt 6), mean = log(gamma) - euler / k.
  double k = var > 0.0 ? std::numbers::pi / (std::sqrt(var) * std::sqrt(6.0)) : kShapeHi;
  k = fixed_shape ? *fixed_shape : std::clamp(k, kShapeLo, kShapeHi);
  return {k, std::exp(mean + kEulerGamma / k), 1.0};
}

std::vector<WeibullComponent> initial_components(std::span<const double> log_durations,
                                                 std::span<const std::size_t> cuts,
                                                 std::optional<double> fixed_shape) {
  const double n = static_cast<double>(log_durations.size());
  std::vector<WeibullComponent> comps;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    auto group = log_durations.subspan(cuts[c], cuts[c + 1] - cuts[c]);
    auto comp = moment_start(group, fixed_shape);
    comp.weight = static_cast<double>(group.size()) / n;
    comps.push_back(comp);
  }
  return comps;
}

/// Group boundaries [0 = c_0 < c_1 < ... < c_l = n] with at least two samples
/// per group. Restart 0 uses equal quantiles; later restarts blend in random
/// split fractions.
std::vector<std::size_t> split_points(std::size_t n, std::size_t l, std::size_t restart,
                                      std::uint64_t seed) {
  std::vector<double> fractions(l + 1);
  for (std::size_t c = 0; c <= l; ++c) fractions[c] = static_cast<double>(c) / static_cast<double>(l);
  if (restart > 0 && l > 1) {
    Rng rng(seed, {static_cast<std::uint64_t>(Stream::em_restart), l, restart});
    std::vector<double> u(l - 1);
    for (auto& v : u) v = rng.uniform();
    std::sort(u.begin(), u.end());
    for (std::size_t c = 1; c < l; ++c) fractions[c] = 0.5 * fractions[c] + 0.5 * u[c - 1];
  }
  std::vector<std::size_t> cuts(l + 1);
  cuts[0] = 0;
  cuts[l] = n;
  for (std::size_t c = 1; c < l; ++c) {
    auto idx = static_cast<std::size_t>(std::llround(fractions[c] * static_cast<double>(n)));
    idx = std::max(idx, cuts[c - 1] + 2);
    idx = std::min(idx, n - 2 * (l - c));
    cuts[c] = idx;
  }
  return cuts;
}

struct EmRun {
  std::vector<WeibullComponent> components;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> trace;
  std::vector<std::size_t> drops;
};

EmRun run_em(std::span<const double> log_durations, std::vector<WeibullComponent> comps,
             const FitConfig& cfg) {
  const std::size_t n = log_durations.size();
  EmRun run;
  std::vector<double> resp;
  std::vector<double> sample_ll(n);
  bool just_dropped = false;
  double previous = -std::numeric_limits<double>::infinity();

  for (std::size_t iter = 0; iter < cfg.max_iterations; ++iter) {
    resp.assign(comps.size() * n, 0.0);
    parallel::e_step({log_durations, comps}, resp, sample_ll);
    const double ll = neumaier_sum(sample_ll);
    run.trace.push_back(ll);
    run.components = comps;
    run.log_likelihood = ll;
    run.iterations = iter + 1;
    if (iter > 0 && !just_dropped && std::abs(ll - previous) <= cfg.tolerance * std::abs(ll)) {
      run.converged = true;
      break;
    }
    previous = ll;
    just_dropped = false;

    std::vector<WeibullComponent> next;
    for (std::size_t c = 0; c < comps.size(); ++c) {
      std::span<const double> w(resp.data() + c * n, n);
      const double mass = neumaier_sum(w);
      const double rho = mass / static_cast<double>(n);
      if (rho < kCollapseWeight) {
        just_dropped = true;
        continue;
      }
      auto comp = weighted_mle(log_durations, w, cfg.fixed_shape, comps[c].shape);
      comp.weight = rho;
      next.push_back(comp);
    }
    if (just_dropped) {
      double total = 0.0;
      for (const auto& c : next) total += c.weight;
      for (auto& c : next) c.weight /= total;
      run.drops.push_back(run.trace.size());
    }
    comps = std::move(next);
  }
  return run;
}

std::size_t parameter_count(std::size_t l, const FitConfig& cfg) {
  return cfg.fixed_shape ? 2 * l - 1 : 3 * l - 1;
}

MixtureFit fit_components(std::span<const double> log_durations, std::size_t l,
                          const FitConfig& cfg) {
  const std::size_t n = log_durations.size();
  if (n < sample_floor(l)) {
    throw InsufficientSamples("fit_weibull_mixture: " + std::to_string(n) + " samples, " +
                              std::to_string(l) + " components need at least " +
                              std::to_string(sample_floor(l)));
  }
  std::vector<EmRun> runs(cfg.restart_count);
  detail::parallel_for(cfg.restart_count, [&](std::size_t r) {
    const auto cuts = split_points(n, l, r, cfg.seed);
    runs[r] = run_em(log_durations, initial_components(log_durations, cuts, cfg.fixed_shape), cfg);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].log_likelihood > runs[best].log_likelihood) best = r;
  }
  auto& run = runs[best];
  const std::size_t kept = run.components.size();
  MixtureFit fit{WeibullMixture::normalized(run.components),
                 run.log_likelihood,
                 -2.0 * run.log_likelihood +
                     static_cast<double>(parameter_count(kept, cfg)) * std::log(static_cast<double>(n)),
                 n,
                 run.iterations,
                 run.converged,
                 std::move(run.trace),
                 std::move(run.drops)};
  return fit;
}

std::vector<double> prepared_log_durations(std::span<const double> durations) {
  std::vector<double> d(durations.begin(), durations.end());
  for (double v : d) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("fit_weibull_mixture: durations must be finite and >= 0");
    }
  }
  std::sort(d.begin(), d.end());
  for (auto& v : d) v = std::log(std::max(v, kDurationEpsilon));
  return d;
}

}  // namespace

void FitConfig::validate() const {
  if (max_components < 1) throw std::invalid_argument("FitConfig: max_components must be >= 1");
  if (max_iterations < 1) throw std::invalid_argument("FitConfig: max_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("FitConfig: tolerance must be positive");
  if (restart_count < 1) throw std::invalid_argument("FitConfig: restart_count must be >= 1");
  if (fixed_shape && !(*fixed_shape > 0.0)) {
    throw std::invalid_argument("FitConfig: fixed_shape must be positive");
  }
}

WeibullComponent weighted_weibull_mle(std::span<const double> log_durations,
                                      std::span<const double> weights,
                                      std::optional<double> fixed_shape) {
  return weighted_mle(log_durations, weights, fixed_shape, 1.0);
}

MixtureFit fit_weibull_mixture(std::span<const double> durations, const FitConfig& cfg) {
  cfg.validate();
  const auto ld = prepared_log_durations(durations);
  if (cfg.component_count > 0) return fit_components(ld, cfg.component_count, cfg);

  std::vector<std::size_t> candidates;
  for (std::size_t l = 1; l <= cfg.max_components; ++l) {
    if (ld.size() >= sample_floor(l)) candidates.push_back(l);
  }
  if (candidates.empty()) {
    throw InsufficientSamples("fit_weibull_mixture: " + std::to_string(ld.size()) +
                              " samples, need at least " + std::to_string(sample_floor(1)));
  }
  std::vector<std::optional<MixtureFit>> fits(candidates.size());
  detail::parallel_for(candidates.size(),
                       [&](std::size_t c) { fits[c] = fit_components(ld, candidates[c], cfg); });
  std::size_t best = 0;
  for (std::size_t c = 1; c < fits.size(); ++c) {
    if (fits[c]->bic < fits[best]->bic) best = c;
  }
  return std::move(*fits[best]);
}

// ---------------------------------------------------------------------------
// Piecewise

namespace {

std::vector<std::vector<double>> durations_by_interval(std::span<const Event> events,
                                                       const std::vector<double>& boundaries,
                                                       std::optional<std::size_t> region) {
  const PiecewiseDurationModel lookup(boundaries, {PiecewiseDurationModel::kPooledRegion}, {});
  std::vector<std::vector<double>> out(lookup.interval_count());
  for (const auto& e : events) {
    if (region && e.region != *region) continue;
    const auto i = lookup.interval_of(e.failure_time);
    if (!i) {
      throw std::invalid_argument("fit_piecewise: failure time " + std::to_string(e.failure_time) +
                                  " h lies outside every interval");
    }
    out[*i].push_back(e.duration);
  }
  return out;
}

std::size_t merge_floor(const FitConfig& cfg) {
  return sample_floor(cfg.component_count == 0 ? 1 : cfg.component_count);
}

}  // namespace

PiecewiseFit fit_piecewise(std::span<const Event> events, std::vector<double> boundaries,
                           const FitConfig& cfg, std::int64_t origin_minutes) {
  cfg.validate();
  auto groups = durations_by_interval(events, boundaries, std::nullopt);
  const std::size_t floor = merge_floor(cfg);
  std::vector<std::string> merges;

  while (groups.size() > 1) {
    std::size_t worst = groups.size();
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (groups[i].size() < floor && (worst == groups.size() || groups[i].size() < groups[worst].size())) {
        worst = i;
      }
    }
    if (worst == groups.size()) break;
    std::size_t into = 0;
    if (worst == 0) {
      into = 1;
    } else if (worst + 1 == groups.size()) {
      into = worst - 1;
    } else {
      auto centre = [&](std::size_t i) { return 0.5 * (boundaries[i] + boundaries[i + 1]); };
      const double before = centre(worst) - centre(worst - 1);
      const double after = centre(worst + 1) - centre(worst);
      into = after < before ? worst + 1 : worst - 1;
    }
    std::ostringstream msg;
    msg << "interval [" << boundaries[worst] << ", " << boundaries[worst + 1] << ") with "
        << groups[worst].size() << " samples merged into [" << boundaries[into] << ", "
        << boundaries[into + 1] << ")";
    merges.push_back(msg.str());
    const std::size_t lo = std::min(worst, into);
    groups[lo].insert(groups[lo].end(), groups[lo + 1].begin(), groups[lo + 1].end());
    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(lo + 1));
    boundaries.erase(boundaries.begin() + static_cast<std::ptrdiff_t>(lo + 1));
  }
  if (groups.front().size() < floor) {
    throw InsufficientSamples("fit_piecewise: only " + std::to_string(groups.front().size()) +
                              " samples after merging every interval");
  }

  std::vector<CellReport> cells(groups.size());
  detail::parallel_for(groups.size(), [&](std::size_t i) {
    cells[i] = {i, 0, groups[i].size(), fit_weibull_mixture(groups[i], cfg), {}};
  });
  std::map<PiecewiseDurationModel::CellKey, WeibullMixture> mixtures;
  for (const auto& c : cells) mixtures.emplace(PiecewiseDurationModel::CellKey{c.interval, 0}, c.fit->mixture);
  return {PiecewiseDurationModel(std::move(boundaries), {PiecewiseDurationModel::kPooledRegion},
                                 std::move(mixtures), origin_minutes),
          std::move(cells), std::move(merges)};
}

GeoFit fit_geo_piecewise(std::span<const Event> events, std::vector<double> boundaries,
                         const RegionPartition& partition, const FitConfig& cfg,
                         std::size_t region_floor, std::int64_t origin_minutes) {
  cfg.validate();
  const std::size_t m = partition.size();
  const std::size_t floor = merge_floor(cfg);
  std::vector<std::vector<std::vector<double>>> groups(m);
  std::vector<RegionReport> regions(m);
  for (std::size_t j = 0; j < m; ++j) {
    groups[j] = durations_by_interval(events, boundaries, j);
    regions[j].region = partition[j].id;
    for (const auto& g : groups[j]) regions[j].sample_count += g.size();
  }
  for (const auto& e : events) {
    if (e.region >= m) throw std::invalid_argument("fit_geo_piecewise: unknown region index");
  }

  // Jobs: (region, interval) cells, or (region, npos) for a time-invariant fit.
  struct Job {
    std::size_t region;
    std::optional<std::size_t> interval;
  };
  std::vector<Job> jobs;
  for (std::size_t j = 0; j < m; ++j) {
    auto& rep = regions[j];
    if (rep.sample_count < region_floor) {
      rep.status = RegionFitStatus::excluded;
      rep.diagnostic = std::to_string(rep.sample_count) + " events, below the region floor of " +
                       std::to_string(region_floor);
      continue;
    }
    const bool each_ok = std::all_of(groups[j].begin(), groups[j].end(),
                                     [&](const auto& g) { return g.size() >= floor; });
    if (each_ok) {
      rep.status = RegionFitStatus::piecewise;
      for (std::size_t i = 0; i < groups[j].size(); ++i) jobs.push_back({j, i});
    } else {
      rep.status = RegionFitStatus::time_invariant;
      rep.diagnostic = "some interval below " + std::to_string(floor) +
                       " samples; one mixture for all intervals";
      jobs.push_back({j, std::nullopt});
    }
  }

  std::vector<CellReport> fitted(jobs.size());
  detail::parallel_for(jobs.size(), [&](std::size_t k) {
    const auto& job = jobs[k];
    std::vector<double> sample;
    if (job.interval) {
      sample = groups[job.region][*job.interval];
    } else {
      for (const auto& g : groups[job.region]) sample.insert(sample.end(), g.begin(), g.end());
    }
    fitted[k] = {job.interval.value_or(0), job.region, sample.size(),
                 fit_weibull_mixture(sample, cfg),
                 job.interval ? std::string{} : std::string{"time-invariant"}};
  });

  std::map<PiecewiseDurationModel::CellKey, WeibullMixture> mixtures;
  std::vector<CellReport> cells;
  const std::size_t intervals = boundaries.size() - 1;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const auto& job = jobs[k];
    if (job.interval) {
      mixtures.emplace(PiecewiseDurationModel::CellKey{*job.interval, job.region}, fitted[k].fit->mixture);
      cells.push_back(fitted[k]);
    } else {
      for (std::size_t i = 0; i < intervals; ++i) {
        mixtures.emplace(PiecewiseDurationModel::CellKey{i, job.region}, fitted[k].fit->mixture);
        auto cell = fitted[k];
        cell.interval = i;
        cells.push_back(std::move(cell));
      }
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (regions[j].status == RegionFitStatus::excluded) {
      cells.push_back({0, j, regions[j].sample_count, std::nullopt, "excluded: " + regions[j].diagnostic});
    }
  }
  return {PiecewiseDurationModel(std::move(boundaries), partition.ids(), std::move(mixtures),
                                 origin_minutes),
          std::move(cells), std::move(regions)};
}

std::string to_string(RegionFitStatus status) {
  switch (status) {
    case RegionFitStatus::piecewise: return "piecewise";
    case RegionFitStatus::time_invariant: return "time-invariant";
    case RegionFitStatus::excluded: return "excluded";
  }
  return "unknown";
}

}  // namespace stormqueue
