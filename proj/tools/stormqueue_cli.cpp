// stormqueue command-line front end.
//
//   stormqueue simulate <config> [--seed N] --out DIR
//   stormqueue fit <events.csv> --out DIR [--tau H] [--intervals b0,b1,...]
//                  [--regions Z1,Z2] [--components L] [--step-minutes M]
//   stormqueue reconstruct --model M --rates R [--events E] [--recovery-rates RR] --out DIR
//   stormqueue infer-aggregated <counts.csv> --out DIR
//   stormqueue report <model.json> [--d0 H]
//
// Exit codes: 0 success, 1 fit-quality warning, 2 input error. Inputs are
// validated and every result computed before anything is written.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stormqueue/aggregated.hpp"
#include "stormqueue/core.hpp"
#include "stormqueue/data_io.hpp"
#include "stormqueue/duration_fit.hpp"
#include "stormqueue/model_io.hpp"
#include "stormqueue/rate_estimation.hpp"
#include "stormqueue/reconstruct.hpp"
#include "stormqueue/scenario.hpp"
#include "stormqueue/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stormqueue;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitWarning = 1;
constexpr int kExitInput = 2;

/// Files are buffered here and written only once a command has succeeded.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  std::ostringstream& open(const std::string& name) { return files_[name]; }
  void put_json(const std::string& name, const json& doc) { files_[name] << doc.dump(2) << '\n'; }

  void commit() const {
    fs::create_directories(dir_);
    for (const auto& [name, text] : files_) {
      std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
      if (!out) throw InputError("cannot write '" + (dir_ / name).string() + "'");
      out << text.str();
    }
  }

 private:
  fs::path dir_;
  std::map<std::string, std::ostringstream> files_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

/// Appends key=value fields to the first (header) line of a CSV document.
std::string with_header_fields(const std::string& text, const std::string& fields) {
  const auto eol = text.find('\n');
  return text.substr(0, eol) + fields + text.substr(eol);
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError(flag + ": '" + item + "' is not a number");
    }
  }
  return out;
}

std::vector<std::string> split_ids(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double interpolate(std::span<const double> v, double step, double t) {
  if (v.empty()) return 0.0;
  const double x = t / step;
  if (x <= 0.0) return v.front();
  const auto i = static_cast<std::size_t>(x);
  if (i + 1 >= v.size()) return v.back();
  const double w = x - static_cast<double>(i);
  return (1.0 - w) * v[i] + w * v[i + 1];
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
  ScenarioConfig cfg = load_scenario(a.config);
  if (a.seed) cfg.spec.seed = *a.seed;
  const auto& spec = cfg.spec;

  const auto events = simulate_events(spec);
  const auto paths = build_counting_paths(events, spec.grid, spec.partition);

  const std::string provenance =
      ", config_hash=" + cfg.config_hash + ", seed=" + std::to_string(spec.seed);

  OutputSet out(a.out);
  EventTable table;
  table.tz_offset_minutes = cfg.tz_offset_minutes;
  table.rows = to_raw_events(events, spec.grid.origin_minutes(), spec.partition);
  std::ostringstream ev;
  write_event_csv(ev, table);
  out.open("events.csv") << with_header_fields(ev.str(), provenance);

  std::ostringstream counts;
  write_counts_csv(counts, paths.active, cfg.tz_offset_minutes);
  out.open("counts.csv") << with_header_fields(counts.str(), provenance);

  json truth = scenario_truth_json(cfg);
  json per_region = json::object();
  for (std::size_t j = 0; j < spec.partition.size(); ++j) {
    const auto c = paths.failures.counts(j);
    per_region[spec.partition[j].id] = c.empty() ? 0 : c.back();
  }
  truth["events"] = {{"total", events.size()}, {"per_region", per_region}};
  out.put_json("truth.json", truth);
  out.commit();

  std::cout << "simulated " << events.size() << " events in " << spec.partition.size()
            << " regions (seed " << spec.seed << ") -> " << a.out << "\n";
  return kExitOk;
}

// --------------------------------------------------------------------- fit

struct FitArgs {
  std::string events;
  std::string out;
  double tau = kDefaultTauHours;
  std::string intervals;
  std::string regions;
  std::size_t components = 0;
  int step_minutes = 15;
  std::string origin;
  double hours = 0.0;
  double d0 = 24.0;
  std::uint64_t seed = 0;
  std::size_t region_floor = kDefaultRegionFloor;
  bool lenient = false;
};

json mixture_json(const WeibullMixture& mix) {
  json comps = json::array();
  for (const auto& c : mix.components()) {
    comps.push_back({{"shape", c.shape}, {"scale", c.scale}, {"weight", c.weight}});
  }
  return comps;
}

int cmd_fit(const FitArgs& a) {
  if (!(a.tau > 0.0)) throw InputError("--tau must be > 0");
  if (a.step_minutes <= 0) throw InputError("--step-minutes must be > 0");
  const ParseMode mode = a.lenient ? ParseMode::lenient : ParseMode::strict;

  std::optional<RegionPartition> known;
  if (!a.regions.empty()) known = RegionPartition::from_ids(split_ids(a.regions));
  const EventTable table = read_event_csv(fs::path(a.events), mode, known ? &*known : nullptr);
  const int tz = table.tz_offset_minutes;

  const PreprocessResult pre = preprocess_events(table.rows);
  if (pre.events.empty()) throw InputError("no events left after preprocessing");
  const RegionPartition partition = known ? *known : partition_of(pre.events);

  const std::int64_t step_min = a.step_minutes;
  std::int64_t origin = 0;
  if (!a.origin.empty()) {
    origin = parse_timestamp(a.origin, tz);
  } else {
    const std::int64_t first = pre.events.front().failure_minute;
    origin = first - ((first % step_min) + step_min) % step_min;
  }
  const auto events = to_events(pre.events, origin, partition);
  const double step = static_cast<double>(a.step_minutes) / 60.0;
  for (const auto& e : events) {
    if (e.failure_time < 0.0) throw InputError("an event precedes --origin");
  }

  std::vector<double> boundaries;
  if (!a.intervals.empty()) boundaries = parse_list(a.intervals, "--intervals");
  double hours = a.hours;
  if (hours <= 0.0) {
    if (!boundaries.empty()) {
      hours = boundaries.back();
    } else {
      double last = 0.0;
      for (const auto& e : events) last = std::max(last, e.recovery_time());
      hours = last + a.tau;
    }
  }
  const auto count = static_cast<std::size_t>(std::ceil(hours / step - 1e-9)) + 1;
  const TimeGrid grid(origin, step, count);
  if (boundaries.empty()) boundaries = {0.0, grid.last_time()};
  if (boundaries.size() < 2) throw InputError("--intervals needs at least two boundaries");
  std::vector<std::string> notes;
  if (boundaries.back() < grid.last_time()) {
    notes.push_back("last interval extended from " + fmt("%g", boundaries.back()) + " h to " +
                    fmt("%g", grid.last_time()) + " h to cover the grid");
    boundaries.back() = grid.last_time();
  }
  for (const auto& e : events) {
    if (e.failure_time > grid.last_time()) {
      throw InputError("failure at " + fmt("%.2f", e.failure_time) + " h lies beyond the grid end");
    }
  }

  const RateSeries fr = failure_rate_from_events(events, partition, a.tau, grid);
  const RateSeries rr = recovery_rate_from_events(events, partition, a.tau, grid);

  FitConfig cfg;
  cfg.component_count = a.components;
  cfg.seed = a.seed;
  cfg.validate();
  const PiecewiseFit pooled = fit_piecewise(events, boundaries, cfg, origin);
  const GeoFit geo = fit_geo_piecewise(events, boundaries, partition, cfg, a.region_floor, origin);

  bool warn = false;
  auto cell_json = [&](const CellReport& c, const PiecewiseDurationModel& model, bool pooled_model) {
    json j = {{"interval", c.interval},
              {"region", pooled_model ? std::string(PiecewiseDurationModel::kPooledRegion)
                                      : partition[c.region].id},
              {"samples", c.sample_count}};
    if (c.fit) {
      j["components"] = mixture_json(c.fit->mixture);
      j["log_likelihood"] = c.fit->log_likelihood;
      j["bic"] = c.fit->bic;
      j["iterations"] = c.fit->iterations;
      j["converged"] = c.fit->converged;
      if (!c.fit->converged) warn = true;
    }
    if (const auto* mix = model.find(c.interval, pooled_model ? 0 : c.region)) {
      j["p_recover_within_d0"] = mix->cdf(a.d0);
    }
    if (!c.note.empty()) j["note"] = c.note;
    return j;
  };

  json summary = {{"input", a.events},
                  {"origin", format_timestamp(origin, tz)},
                  {"tz_offset_minutes", tz},
                  {"step_minutes", a.step_minutes},
                  {"tau_hours", a.tau},
                  {"d0_hours", a.d0},
                  {"interval_boundaries_hours", boundaries},
                  {"preprocess",
                   {{"raw", pre.report.raw},
                    {"grouped", pre.report.grouped},
                    {"dropped", pre.report.dropped},
                    {"output", pre.report.output}}},
                  {"warnings", table.warnings},
                  {"notes", notes},
                  {"merges", pooled.merges}};
  json pooled_cells = json::array();
  for (const auto& c : pooled.cells) pooled_cells.push_back(cell_json(c, pooled.model, true));
  summary["pooled"] = pooled_cells;
  json regions = json::array();
  for (std::size_t j = 0; j < geo.regions.size(); ++j) {
    const auto& r = geo.regions[j];
    json entry = {{"region", r.region},
                  {"samples", r.sample_count},
                  {"status", to_string(r.status)},
                  {"diagnostic", r.diagnostic}};
    json cells = json::array();
    for (const auto& c : geo.cells) {
      if (c.region == j) cells.push_back(cell_json(c, geo.model, false));
    }
    entry["cells"] = cells;
    regions.push_back(entry);
  }
  summary["regions"] = regions;

  // Models may have merged intervals; look cells up by the interval midpoint.
  auto cell_text = [&](const PiecewiseDurationModel& model, std::size_t i, std::size_t j) {
    const auto k = model.interval_of(0.5 * (boundaries[i] + boundaries[i + 1]));
    const auto* mix = k ? model.find(*k, j) : nullptr;
    return mix ? fmt("  %5.1f%%", 100.0 * mix->cdf(a.d0)) : std::string("      --");
  };

  std::ostringstream txt;
  txt << "events: raw " << pre.report.raw << ", grouped " << pre.report.grouped << ", dropped "
      << pre.report.dropped << ", used " << pre.report.output << "\n";
  txt << "P{D < " << fmt("%g", a.d0) << " h} by region and failure interval\n";
  txt << "region      status          n";
  for (std::size_t i = 0; i + 1 < boundaries.size(); ++i) txt << "   psi_" << (i + 1);
  txt << "\n";
  for (std::size_t j = 0; j < geo.regions.size(); ++j) {
    const auto& r = geo.regions[j];
    char head[64];
    std::snprintf(head, sizeof head, "%-10s  %-14s %5zu", r.region.c_str(), to_string(r.status).c_str(),
                  r.sample_count);
    txt << head;
    for (std::size_t i = 0; i + 1 < boundaries.size(); ++i) txt << cell_text(geo.model, i, j);
    txt << "\n";
  }
  txt << "pooled                    " << fmt("%5.0f", static_cast<double>(events.size()));
  for (std::size_t i = 0; i + 1 < boundaries.size(); ++i) txt << cell_text(pooled.model, i, 0);
  txt << "\n";
  for (const auto& m : pooled.merges) txt << "merge: " << m << "\n";

  OutputSet out(a.out);
  out.put_json("model.json", model_to_json(pooled.model));
  out.put_json("model_geo.json", model_to_json(geo.model));
  write_rates_csv(out.open("rates_failure.csv"), fr, tz, "failure");
  write_rates_csv(out.open("rates_recovery.csv"), rr, tz, "recovery");
  out.put_json("summary.json", summary);
  out.open("summary.txt") << txt.str();

  // Hourly failure counts with the moving-average rate at each bin centre.
  auto& hist = out.open("fig_histfr.csv");
  hist << "bin_start,region,failures_in_bin,failure_rate\n";
  const auto bins = static_cast<std::size_t>(std::ceil(grid.last_time()));
  const auto total = aggregate_regions(fr, "ALL");
  for (std::size_t j = 0; j <= partition.size(); ++j) {
    const bool all = j == partition.size();
    std::vector<std::size_t> n(bins + 1, 0);
    for (const auto& e : events) {
      if (all || e.region == j) ++n[std::min(bins, static_cast<std::size_t>(e.failure_time))];
    }
    const auto rate = all ? total.values(0) : fr.values(j);
    for (std::size_t b = 0; b < bins; ++b) {
      const auto minute = origin + static_cast<std::int64_t>(b) * 60;
      hist << format_timestamp(minute, tz) << ',' << (all ? "ALL" : partition[j].id) << ',' << n[b] << ','
           << fmt("%.6g", interpolate(rate, step, static_cast<double>(b) + 0.5)) << "\n";
    }
  }
  out.commit();

  std::cout << txt.str();
  return warn ? kExitWarning : kExitOk;
}

// ------------------------------------------------------------- reconstruct

struct ReconstructArgs {
  std::string model;
  std::string rates;
  std::string recovery_rates;
  std::string events;
  std::string out;
  std::string rule = "cell-mass";
};

int cmd_reconstruct(const ReconstructArgs& a) {
  const PiecewiseDurationModel model = read_model_json(a.model);
  const RatesTable ft = read_rates_csv(fs::path(a.rates));
  if (!ft.series) throw InputError("'" + a.rates + "' has no data");
  const RateSeries& fr = *ft.series;
  const int tz = ft.tz_offset_minutes;
  const auto& grid = fr.grid();

  ConvolutionRule rule = ConvolutionRule::cell_mass;
  if (a.rule == "density") {
    rule = ConvolutionRule::density;
  } else if (a.rule != "cell-mass") {
    throw InputError("--rule must be cell-mass or density");
  }

  std::optional<RateSeries> rr;
  if (!a.recovery_rates.empty()) {
    const RatesTable rt = read_rates_csv(fs::path(a.recovery_rates));
    if (!rt.series) throw InputError("'" + a.recovery_rates + "' has no data");
    if (!(rt.series->grid() == grid) || rt.series->regions() != fr.regions()) {
      throw InputError("grid or regions of '" + a.recovery_rates + "' differ from '" + a.rates + "'");
    }
    rr = *rt.series;
  } else {
    try {
      rr = recovery_rate_from_model(fr, model, rule);
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("model does not fit the rate grid: ") + e.what());
    }
  }

  std::optional<CountSeries> empirical;
  const auto partition = RegionPartition::from_ids(fr.regions());
  if (!a.events.empty()) {
    const EventTable et = read_event_csv(fs::path(a.events), ParseMode::strict, &partition);
    const auto pre = preprocess_events(et.rows);
    const auto events = to_events(pre.events, grid.origin_minutes(), partition);
    for (const auto& e : events) {
      if (e.failure_time < 0.0 || e.failure_time > grid.last_time()) {
        throw InputError("events in '" + a.events + "' fall outside the rate grid");
      }
    }
    empirical = build_counting_paths(events, grid, partition).active;
  }

  const RateSeries total_f = aggregate_regions(fr, "ALL");
  const RateSeries total_r = aggregate_regions(*rr, "ALL");
  const ReconstructedPaths per_region = reconstruct_N(fr, *rr);
  const ReconstructedPaths network = reconstruct_N(total_f, total_r);

  std::vector<std::string> names = fr.regions();
  names.push_back("ALL");
  std::vector<std::vector<double>> rec = per_region.values;
  rec.push_back(network.values[0]);
  std::vector<std::vector<double>> emp;
  if (empirical) {
    for (std::size_t j = 0; j < fr.region_count(); ++j) {
      const auto c = empirical->counts(j);
      emp.emplace_back(c.begin(), c.end());
    }
    const auto t = empirical->total().counts(0);
    emp.emplace_back(t.begin(), t.end());
  }

  OutputSet out(a.out);
  auto& csv = out.open("fig_frp.csv");
  csv << "timestamp,region,empirical_N,reconstructed_N,residual\n";
  json regions = json::array();
  for (std::size_t j = 0; j < names.size(); ++j) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto minute = grid.origin_minutes() + std::llround(grid.time(i) * 60.0);
      csv << format_timestamp(minute, tz) << ',' << names[j] << ',';
      if (empirical) {
        csv << fmt("%.0f", emp[j][i]) << ',' << fmt("%.6f", rec[j][i]) << ','
            << fmt("%.6f", rec[j][i] - emp[j][i]) << "\n";
      } else {
        csv << ',' << fmt("%.6f", rec[j][i]) << ",\n";
      }
    }
    json entry = {{"region", names[j]},
                  {"reconstructed_peak", *std::max_element(rec[j].begin(), rec[j].end())}};
    if (empirical) {
      const auto d = path_distance(rec[j], emp[j]);
      const double peak = *std::max_element(emp[j].begin(), emp[j].end());
      entry["empirical_peak"] = peak;
      entry["rmse"] = d.rmse;
      entry["sup"] = d.sup;
      entry["peak_ratio"] = d.peak_ratio;
      entry["rmse_over_peak"] = peak > 0.0 ? d.rmse / peak : 0.0;
    }
    regions.push_back(entry);
  }
  std::vector<std::string> diagnostics = per_region.diagnostics;
  diagnostics.insert(diagnostics.end(), network.diagnostics.begin(), network.diagnostics.end());
  out.put_json("metrics.json", {{"model", a.model},
                                {"rates", a.rates},
                                {"recovery_source", a.recovery_rates.empty() ? "convolution" : a.recovery_rates},
                                {"rule", a.rule},
                                {"regions", regions},
                                {"diagnostics", diagnostics}});
  if (a.recovery_rates.empty()) write_rates_csv(out.open("rates_recovery_model.csv"), *rr, tz, "recovery");
  out.commit();

  const auto& all = regions.back();
  std::cout << "network peak N: reconstructed " << fmt("%.1f", all["reconstructed_peak"].get<double>());
  if (empirical) {
    std::cout << ", empirical " << fmt("%.0f", all["empirical_peak"].get<double>()) << ", peak ratio "
              << fmt("%.3f", all["peak_ratio"].get<double>()) << ", rmse/peak "
              << fmt("%.3f", all["rmse_over_peak"].get<double>());
  }
  std::cout << "\n";
  for (const auto& d : diagnostics) std::cout << "diagnostic: " << d << "\n";
  return diagnostics.empty() ? kExitOk : kExitWarning;
}

// -------------------------------------------------------- infer-aggregated

struct InferArgs {
  std::string counts;
  std::string out;
  bool lenient = false;
};

json fit_json(const StationaryWeibullFit& f) {
  json j = {{"shape", f.shape},
            {"scale", f.scale},
            {"objective", f.objective},
            {"signal_norm", f.signal_norm},
            {"relative_objective", f.signal_norm > 0.0 ? f.objective / f.signal_norm : 0.0},
            {"evaluations", f.evaluations},
            {"degenerate", f.degenerate}};
  if (!f.warning.empty()) j["warning"] = f.warning;
  return j;
}

int cmd_infer_aggregated(const InferArgs& a) {
  const CountsTable table = read_counts_csv(fs::path(a.counts), a.lenient ? ParseMode::lenient : ParseMode::strict);
  if (!table.series) throw InputError("'" + a.counts + "' has no data");
  const CountSeries& counts = *table.series;
  const int tz = table.tz_offset_minutes;
  const auto& grid = counts.grid();

  const LowerBoundRates lb = lower_bound_rates(counts);
  const RateSeries fl = aggregate_regions(lb.failure);
  const RateSeries rl = aggregate_regions(lb.recovery);
  const CumulativeBounds cb = cumulative_bounds(lb.failure, lb.recovery);

  bool warn = false;
  json weibull = {{"input", a.counts}, {"regions", counts.regions()}, {"step_hours", grid.step()}};
  std::vector<double> fitted(grid.size(), 0.0);
  if (std::all_of(fl.values(0).begin(), fl.values(0).end(), [](double v) { return v == 0.0; })) {
    weibull["fit"] = nullptr;
    weibull["warning"] = "failure lower bound is identically zero; no fit";
    warn = true;
  } else {
    const auto full = fit_stationary_weibull_ls(fl, rl, {.span = LsSpan::full});
    const auto active = fit_stationary_weibull_ls(fl, rl, {.span = LsSpan::active});
    weibull["fit"] = fit_json(full);
    weibull["fit"]["span"] = "full";
    weibull["sensitivity"] = fit_json(active);
    weibull["sensitivity"]["span"] = "active";
    warn = full.degenerate;
    if (!full.degenerate) fitted = convolve_stationary(fl.values(0), grid.step(), full.shape, full.scale);
  }

  OutputSet out(a.out);
  write_rates_csv(out.open("bounds_failure.csv"), lb.failure, tz, "failure_lower_bound");
  write_rates_csv(out.open("bounds_recovery.csv"), lb.recovery, tz, "recovery_lower_bound");
  auto& cum = out.open("cumulative_bounds.csv");
  cum << "timestamp,region,failures_lower_bound,recoveries_lower_bound\n";
  for (std::size_t j = 0; j < counts.region_count(); ++j) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto minute = grid.origin_minutes() + std::llround(grid.time(i) * 60.0);
      cum << format_timestamp(minute, tz) << ',' << counts.regions()[j] << ',' << fmt("%.6g", cb.failures[j][i])
          << ',' << fmt("%.6g", cb.recoveries[j][i]) << "\n";
    }
  }
  auto& fig = out.open("fig_sandy_rates.csv");
  fig << "timestamp,failure_lower_bound,recovery_lower_bound,fitted_recovery\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto minute = grid.origin_minutes() + std::llround(grid.time(i) * 60.0);
    fig << format_timestamp(minute, tz) << ',' << fmt("%.6g", fl.values(0)[i]) << ','
        << fmt("%.6g", rl.values(0)[i]) << ',' << fmt("%.6g", fitted[i]) << "\n";
  }
  out.put_json("weibull.json", weibull);
  out.commit();

  if (weibull["fit"].is_null()) {
    std::cout << "warning: " << weibull["warning"].get<std::string>() << "\n";
  } else {
    const auto& f = weibull["fit"];
    const auto& s = weibull["sensitivity"];
    std::cout << "stationary Weibull (full span): k = " << fmt("%.4f", f["shape"].get<double>())
              << ", gamma = " << fmt("%.4f", f["scale"].get<double>()) << " h, relative objective "
              << fmt("%.3g", f["relative_objective"].get<double>()) << "\n";
    std::cout << "sensitivity (active span):     k = " << fmt("%.4f", s["shape"].get<double>())
              << ", gamma = " << fmt("%.4f", s["scale"].get<double>()) << " h\n";
    if (f.contains("warning")) std::cout << "warning: " << f["warning"].get<std::string>() << "\n";
  }
  return warn ? kExitWarning : kExitOk;
}

// ------------------------------------------------------------------ report

int cmd_report(const std::string& path, double d0) {
  if (!(d0 > 0.0)) throw InputError("--d0 must be > 0");
  const PiecewiseDurationModel model = read_model_json(path);
  const auto& b = model.boundaries();
  std::cout << "infant recovery P{D < " << fmt("%g", d0) << " h} / aging P{D >= " << fmt("%g", d0)
            << " h}\n";
  std::cout << "region      interval (h)         infant    aging\n";
  for (std::size_t j = 0; j < model.region_ids().size(); ++j) {
    for (std::size_t i = 0; i < model.interval_count(); ++i) {
      if (model.find(i, j) == nullptr) continue;
      const double p = infant_recovery_prob(model, i, j, d0);
      char line[128];
      std::snprintf(line, sizeof line, "%-10s  [%7.2f, %7.2f)  %6.1f%%  %6.1f%%\n",
                    model.region_ids()[j].c_str(), b[i], b[i + 1], 100.0 * p, 100.0 * (1.0 - p));
      std::cout << line;
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Failure-recovery modelling for power distribution networks under severe weather"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Simulate events from a scenario config");
  s->add_option("config", sim.config, "Scenario TOML (or .json)")->required();
  s->add_option("--seed", sim.seed, "Override the config seed");
  s->add_option("--out", sim.out, "Output directory")->required();

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Estimate rates and fit duration mixtures from events");
  f->add_option("events", fit.events, "Event CSV")->required();
  f->add_option("--out", fit.out, "Output directory")->required();
  f->add_option("--tau", fit.tau, "Moving-average half-width (hours)");
  f->add_option("--intervals", fit.intervals, "Failure-time interval boundaries in hours, comma separated");
  f->add_option("--regions", fit.regions, "Accepted region ids, comma separated");
  f->add_option("--components", fit.components, "Mixture components per cell (0 selects by BIC)");
  f->add_option("--step-minutes", fit.step_minutes, "Rate grid step");
  f->add_option("--origin", fit.origin, "Grid origin, local YYYY-MM-DDTHH:MM");
  f->add_option("--hours", fit.hours, "Grid length in hours");
  f->add_option("--d0", fit.d0, "Infant-recovery threshold (hours)");
  f->add_option("--seed", fit.seed, "EM restart seed");
  f->add_option("--region-floor", fit.region_floor, "Minimum events for a region to be fitted");
  f->add_flag("--lenient", fit.lenient, "Skip malformed rows instead of failing");

  ReconstructArgs rec;
  auto* r = app.add_subcommand("reconstruct", "Recovery rate and N(t) from a failure rate and a model");
  r->add_option("--model", rec.model, "Model JSON")->required();
  r->add_option("--rates", rec.rates, "Failure rate CSV")->required();
  r->add_option("--recovery-rates", rec.recovery_rates, "Use this recovery rate instead of the convolution");
  r->add_option("--events", rec.events, "Event CSV for the empirical comparison");
  r->add_option("--rule", rec.rule, "Convolution rule: cell-mass or density");
  r->add_option("--out", rec.out, "Output directory")->required();

  InferArgs inf;
  auto* g = app.add_subcommand("infer-aggregated", "Rate lower bounds and a stationary Weibull from counts");
  g->add_option("counts", inf.counts, "Counts CSV")->required();
  g->add_option("--out", inf.out, "Output directory")->required();
  g->add_flag("--lenient", inf.lenient, "Carry forward missing cells instead of failing");

  std::string report_model;
  double report_d0 = 24.0;
  auto* p = app.add_subcommand("report", "Infant/aging recovery table for a model");
  p->add_option("model", report_model, "Model JSON")->required();
  p->add_option("--d0", report_d0, "Infant-recovery threshold (hours)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*s) return cmd_simulate(sim);
    if (*f) return cmd_fit(fit);
    if (*r) return cmd_reconstruct(rec);
    if (*g) return cmd_infer_aggregated(inf);
    if (*p) return cmd_report(report_model, report_d0);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
