#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <algorithm>
#include <filesystem>
#include <random>
#include <fstream>
#include <sstream>

#include "scenarios.hpp"
#include "stormqueue/data_io.hpp"
#include "stormqueue/model_io.hpp"

#ifndef STORMQUEUE_CLI
#error "STORMQUEUE_CLI must name the command-line binary"
#endif

namespace fs = std::filesystem;
using namespace stormqueue;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / "stormqueue_cli" / info->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  int run(const std::string& args) const {
    const std::string cmd = std::string(STORMQUEUE_CLI) + " " + args + " > " + (dir_ / "stdout.txt").string() +
                            " 2> " + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string slurp(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  nlohmann::json json_of(const std::string& name) const { return nlohmann::json::parse(slurp(name)); }

  fs::path dir_;
};

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::size_t lines_of(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_F(Cli, SimulateIsDeterministic) {
  const auto cfg = scenarios::data_path("ike_like.toml");
  ASSERT_EQ(run("simulate " + q(cfg) + " --seed 11 --out " + q(path("a"))), 0);
  ASSERT_EQ(run("simulate " + q(cfg) + " --seed 11 --out " + q(path("b"))), 0);
  for (const char* f : {"events.csv", "counts.csv", "truth.json"}) {
    EXPECT_EQ(slurp(std::string("a/") + f), slurp(std::string("b/") + f)) << f;
  }
  ASSERT_EQ(run("simulate " + q(cfg) + " --seed 12 --out " + q(path("c"))), 0);
  EXPECT_NE(slurp("a/events.csv"), slurp("c/events.csv"));
  const auto truth = json_of("a/truth.json");
  EXPECT_EQ(truth["provenance"]["seed"], 11);
  EXPECT_NE(slurp("a/events.csv").find("config_hash="), std::string::npos);
}

TEST_F(Cli, ZeroRateGivesEmptyEventFile) {
  ASSERT_EQ(run("simulate " + q(scenarios::data_path("zero_rate.toml")) + " --out " + q(path("z"))), 0);
  EXPECT_EQ(lines_of(slurp("z/events.csv")), 2u);  // header lines only
  const auto counts = read_counts_csv(path("z/counts.csv"));
  ASSERT_TRUE(counts.series);
  for (auto c : counts.series->counts(0)) EXPECT_EQ(c, 0);
}

TEST_F(Cli, MissingInputFailsWithoutOutputs) {
  EXPECT_EQ(run("fit " + q(path("nope.csv")) + " --out " + q(path("o"))), 2);
  EXPECT_FALSE(fs::exists(path("o/model.json")));
  EXPECT_EQ(run("simulate " + q(path("nope.toml")) + " --out " + q(path("o"))), 2);
  EXPECT_FALSE(fs::exists(path("o/events.csv")));
  EXPECT_EQ(run("infer-aggregated " + q(path("nope.csv")) + " --out " + q(path("o"))), 2);
  EXPECT_EQ(run("bogus-command"), 2);
  EXPECT_EQ(run("fit"), 2);
}

TEST_F(Cli, MalformedEventsStrictAndLenient) {
  std::ofstream(path("ev.csv")) << "# stormqueue-events v1, tz_offset_minutes=0\n"
                                   "region,failure_time,duration_hours\n"
                                   "A,2020-01-01T00:00,1.0\nA,garbage,1.0\n";
  EXPECT_EQ(run("fit " + q(path("ev.csv")) + " --out " + q(path("o"))), 2);
  EXPECT_NE(slurp("stderr.txt").find("line 4"), std::string::npos) << slurp("stderr.txt");
  EXPECT_FALSE(fs::exists(path("o")) && !fs::is_empty(path("o")));
}

TEST_F(Cli, FitRecoversCityMixtures) {
  // Durations from the bundled scenario, failures one per minute per region:
  // rows sharing (region, minute) would be grouped as one burst.
  const auto cfg = load_scenario(scenarios::data_path("city_mixtures.toml"));
  auto events = simulate_events(cfg.spec);
  std::vector<std::size_t> next(cfg.spec.partition.size(), 0);
  for (auto& e : events) e.failure_time = static_cast<double>(next[e.region]++) / 60.0;
  EventTable table{0, to_raw_events(events, cfg.spec.grid.origin_minutes(), cfg.spec.partition), {}};
  {
    std::ofstream out(path("events.csv"));
    write_event_csv(out, table);
  }
  const int rc = run("fit " + q(path("events.csv")) + " --out " + q(path("f")));
  ASSERT_LE(rc, 1) << slurp("stderr.txt");
  EXPECT_EQ(json_of("f/summary.json")["preprocess"]["grouped"].get<std::size_t>(), events.size());
  const auto model = read_model_json(path("f/model_geo.json"));
  const auto z1 = std::find(model.region_ids().begin(), model.region_ids().end(), "Z1") - model.region_ids().begin();
  const auto z3 = std::find(model.region_ids().begin(), model.region_ids().end(), "Z3") - model.region_ids().begin();
  EXPECT_NEAR(infant_recovery_prob(model, 0, z1, 24.0), 0.6663, 0.05);
  EXPECT_NEAR(infant_recovery_prob(model, 0, z3, 24.0), 0.4537, 0.05);
  for (const char* f : {"model.json", "rates_failure.csv", "rates_recovery.csv", "summary.json", "summary.txt",
                        "fig_histfr.csv"}) {
    EXPECT_TRUE(fs::exists(path(std::string("f/") + f))) << f;
  }
  EXPECT_NE(slurp("f/summary.txt").find("Z3"), std::string::npos);
}

TEST_F(Cli, SingleComponentOnExponentialData) {
  std::mt19937_64 rng(8);
  std::exponential_distribution<double> d(1.0 / 5.0);
  {
    std::ofstream out(path("ev.csv"));
    out << "# stormqueue-events v1, tz_offset_minutes=0\nregion,failure_time,duration_hours\n";
    for (int i = 0; i < 3000; ++i) {
      out << "A," << format_timestamp(parse_timestamp("2020-01-01T00:00", 0) + i, 0) << ',' << d(rng) << '\n';
    }
  }
  ASSERT_LE(run("fit " + q(path("ev.csv")) + " --components 1 --out " + q(path("f"))), 1) << slurp("stderr.txt");
  const auto model = read_model_json(path("f/model.json"));
  const auto& c = model.at(0, 0).components();
  ASSERT_EQ(c.size(), 1u);
  EXPECT_NEAR(c[0].shape, 1.0, 0.05);
  EXPECT_NEAR(c[0].scale, 5.0, 0.3);
}

TEST_F(Cli, ReconstructMatchesSimulatedPath) {
  ASSERT_EQ(run("simulate " + q(scenarios::data_path("ike_like.toml")) + " --seed 2008 --out " + q(path("s"))), 0);
  ASSERT_LE(run("fit " + q(path("s/events.csv")) + " --intervals 0,10,16,22,30,320 --hours 320 --out " +
                q(path("f"))),
            1)
      << slurp("stderr.txt");
  ASSERT_LE(run("reconstruct --model " + q(path("f/model.json")) + " --rates " + q(path("f/rates_failure.csv")) +
                " --events " + q(path("s/events.csv")) + " --out " + q(path("r"))),
            1)
      << slurp("stderr.txt");
  const auto m = json_of("r/metrics.json");
  const auto all = std::find_if(m["regions"].begin(), m["regions"].end(),
                                [](const auto& r) { return r["region"] == "ALL"; });
  ASSERT_NE(all, m["regions"].end());
  const double ratio = (*all)["peak_ratio"].get<double>();
  EXPECT_GE(ratio, 0.9);
  EXPECT_LE(ratio, 1.1);
  EXPECT_TRUE(fs::exists(path("r/fig_frp.csv")));
}

TEST_F(Cli, EqualRatesReconstructToZero) {
  const TimeGrid grid(parse_timestamp("2020-01-01T00:00", 0), 0.25, 100);
  std::vector<double> v(100);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 3.0 + std::sin(0.1 * static_cast<double>(i));
  {
    std::ofstream out(path("rates.csv"));
    write_rates_csv(out, RateSeries(grid, {"A"}, {v}), 0, "failure");
  }
  std::ofstream(path("model.json"))
      << model_to_json(PiecewiseDurationModel::stationary(WeibullMixture({{1.0, 2.0, 1.0}}), 0.0, 30.0,
                                                          grid.origin_minutes()))
             .dump();
  ASSERT_EQ(run("reconstruct --model " + q(path("model.json")) + " --rates " + q(path("rates.csv")) +
                " --recovery-rates " + q(path("rates.csv")) + " --out " + q(path("r"))),
            0)
      << slurp("stderr.txt");
  std::istringstream fig(slurp("r/fig_frp.csv"));
  std::string line;
  std::getline(fig, line);
  std::size_t rows = 0;
  while (std::getline(fig, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
    ASSERT_GE(f.size(), 4u);
    EXPECT_EQ(std::stod(f[3]), 0.0) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 200u);  // region A and ALL
}

TEST_F(Cli, ReconstructGridMismatch) {
  const TimeGrid grid(parse_timestamp("2020-01-01T00:00", 0), 0.25, 40);
  const TimeGrid other(parse_timestamp("2020-01-01T00:00", 0), 0.5, 40);
  std::ofstream(path("f.csv")) << [&] {
    std::ostringstream s;
    write_rates_csv(s, RateSeries(grid, {"A"}, {std::vector<double>(40, 1.0)}), 0, "failure");
    return s.str();
  }();
  std::ofstream(path("r.csv")) << [&] {
    std::ostringstream s;
    write_rates_csv(s, RateSeries(other, {"A"}, {std::vector<double>(40, 1.0)}), 0, "recovery");
    return s.str();
  }();
  std::ofstream(path("model.json"))
      << model_to_json(PiecewiseDurationModel::stationary(WeibullMixture({{1.0, 2.0, 1.0}}), 0.0, 30.0,
                                                          grid.origin_minutes()))
             .dump();
  EXPECT_EQ(run("reconstruct --model " + q(path("model.json")) + " --rates " + q(path("f.csv")) +
                " --recovery-rates " + q(path("r.csv")) + " --out " + q(path("o"))),
            2);
  EXPECT_FALSE(fs::exists(path("o/metrics.json")));
  EXPECT_EQ(run("reconstruct --model " + q(path("model.json")) + " --rates " + q(path("f.csv")) +
                " --rule trapezoid --out " + q(path("o"))),
            2);
}

TEST_F(Cli, InferAggregatedSandyLike) {
  // 14 regions, 2275 fifteen-minute bins, stationary Weibull(1.3, 54) durations.
  std::vector<std::string> ids;
  std::vector<PiecewiseLinearRate> rates;
  const TimeGrid grid(parse_timestamp("2012-10-29T00:00", -240), 0.25, 2275);
  for (int j = 0; j < 14; ++j) {
    ids.push_back("C" + std::to_string(j));
    rates.push_back(bell_rate(grid, 4.0 + j, 18.0 + j, 5.0));
  }
  const ScenarioSpec spec{grid, RegionPartition::from_ids(ids), rates,
                          PiecewiseDurationModel::stationary(WeibullMixture({{1.3, 54.0, 1.0}}), 0.0,
                                                             grid.last_time(), grid.origin_minutes()),
                          77};
  const auto paths = build_counting_paths(simulate_events(spec), grid, spec.partition);
  {
    std::ofstream out(path("counts.csv"));
    write_counts_csv(out, paths.active, -240);
  }
  ASSERT_EQ(run("infer-aggregated " + q(path("counts.csv")) + " --out " + q(path("o"))), 0) << slurp("stderr.txt");
  const auto w = json_of("o/weibull.json");
  EXPECT_NEAR(w["fit"]["shape"].get<double>(), 1.3, 0.3);
  EXPECT_NEAR(w["fit"]["scale"].get<double>(), 54.0, 0.2 * 54.0);
  EXPECT_EQ(w["sensitivity"]["span"], "active");
  EXPECT_EQ(lines_of(slurp("o/fig_sandy_rates.csv")), 2276u);
  EXPECT_EQ(lines_of(slurp("o/cumulative_bounds.csv")), 1u + 14u * 2275u);
  const auto bounds = read_rates_csv(path("o/bounds_failure.csv"));
  ASSERT_TRUE(bounds.series);
  EXPECT_EQ(bounds.series->region_count(), 14u);
}

TEST_F(Cli, InferAggregatedMonotoneIsDegenerate) {
  std::ofstream(path("c.csv")) << "# stormqueue-counts v1, step_minutes=60, tz_offset_minutes=0\n"
                                  "timestamp,region,count\n"
                                  "2020-01-01T00:00,A,0\n2020-01-01T01:00,A,2\n2020-01-01T02:00,A,5\n";
  EXPECT_EQ(run("infer-aggregated " + q(path("c.csv")) + " --out " + q(path("o"))), 1);
  EXPECT_TRUE(json_of("o/weibull.json")["fit"]["degenerate"].get<bool>());
  std::ofstream(path("flat.csv")) << "# stormqueue-counts v1, step_minutes=60, tz_offset_minutes=0\n"
                                     "timestamp,region,count\n"
                                     "2020-01-01T00:00,A,3\n2020-01-01T01:00,A,3\n";
  EXPECT_EQ(run("infer-aggregated " + q(path("flat.csv")) + " --out " + q(path("p"))), 1);
  EXPECT_TRUE(json_of("p/weibull.json")["fit"].is_null());
}

TEST_F(Cli, InferAggregatedMicroCase) {
  std::ofstream(path("c.csv")) << "# stormqueue-counts v1, step_minutes=60, tz_offset_minutes=0\n"
                                  "timestamp,region,count\n"
                                  "2020-01-01T00:00,A,0\n2020-01-01T01:00,A,3\n"
                                  "2020-01-01T02:00,A,3\n2020-01-01T03:00,A,1\n";
  EXPECT_LE(run("infer-aggregated " + q(path("c.csv")) + " --out " + q(path("o"))), 1);
  const auto b = read_rates_csv(path("o/bounds_recovery.csv"));
  ASSERT_TRUE(b.series);
  const auto v = b.series->values(0);
  EXPECT_EQ(std::vector<double>(v.begin(), v.end()), (std::vector<double>{0, 0, 0, 2}));
}

TEST_F(Cli, ReportPrintsInfantAndAging) {
  std::ofstream(path("m.json"))
      << model_to_json(PiecewiseDurationModel::stationary(WeibullMixture({{1.0, 24.0, 1.0}}), 0.0, 48.0)).dump();
  ASSERT_EQ(run("report " + q(path("m.json")) + " --d0 24"), 0);
  const auto out = slurp("stdout.txt");
  EXPECT_NE(out.find("63.2%"), std::string::npos) << out;
  EXPECT_NE(out.find("36.8%"), std::string::npos) << out;
  EXPECT_EQ(run("report " + q(path("m.json")) + " --d0 -1"), 2);
}
