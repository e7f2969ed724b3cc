#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "scenarios.hpp"
#include "stormqueue/data_io.hpp"
#include "stormqueue/scenario.hpp"

using namespace stormqueue;

namespace {

const std::string kBase = R"(
seed = 7
[grid]
origin = "2008-09-12T07:00"
tz_offset_minutes = -300
step_minutes = 15
hours = 45
[durations]
interval_boundaries_hours = [0, 12, 45]
[[regions]]
id = "Z1"
rate.bell = { peak = 27.0, center_hours = 18.0, width_hours = 4.0, base = 0.2 }
[[regions]]
id = "Z2"
rate.knots = [[0, 0.5], [18, 9.0], [45, 0.5]]
[[mixtures]]
components = [{ shape = 1.0, scale = 1.0, weight = 1.0 }]
[[mixtures]]
interval = 1
components = [{ shape = 2.0, scale = 2.0, weight = 1.0 }]
[[mixtures]]
region = "Z2"
components = [{ shape = 3.0, scale = 3.0, weight = 1.0 }]
[[mixtures]]
interval = 1
region = "Z2"
components = [{ shape = 4.0, scale = 4.0, weight = 1.0 }]
)";

std::string key_path_of(const std::string& text) {
  try {
    load_scenario_text(text, false);
  } catch (const ConfigError& e) {
    return e.key_path();
  }
  return "<no error>";
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST(Scenario, ParsesGridAndRates) {
  const auto cfg = load_scenario_text(kBase, false);
  EXPECT_EQ(cfg.spec.seed, 7u);
  EXPECT_EQ(cfg.tz_offset_minutes, -300);
  EXPECT_EQ(cfg.spec.grid.origin_minutes(), parse_timestamp("2008-09-12T07:00", -300));
  EXPECT_EQ(cfg.spec.grid.size(), 181u);
  EXPECT_DOUBLE_EQ(cfg.spec.grid.step(), 0.25);
  EXPECT_EQ(cfg.spec.partition.ids(), (std::vector<std::string>{"Z1", "Z2"}));
  EXPECT_NEAR(cfg.spec.rates[0](18.0), 27.0, 1e-9);
  EXPECT_NEAR(cfg.spec.rates[0](18.0 + 4.0), 0.2 + 26.8 * std::exp(-0.5), 1e-12);
  EXPECT_NEAR(cfg.spec.rates[1](9.0), 4.75, 1e-12);
  EXPECT_EQ(cfg.config_hash, fnv1a_hex(kBase));
}

TEST(Scenario, MostSpecificMixtureWins) {
  const auto m = load_scenario_text(kBase, false).spec.durations;
  EXPECT_EQ(m.at(0, 0).components()[0].shape, 1.0);  // catch-all
  EXPECT_EQ(m.at(1, 0).components()[0].shape, 2.0);  // interval-only
  EXPECT_EQ(m.at(0, 1).components()[0].shape, 3.0);  // region-only
  EXPECT_EQ(m.at(1, 1).components()[0].shape, 4.0);  // exact
}

TEST(Scenario, ErrorKeyPaths) {
  EXPECT_EQ(key_path_of(replace(kBase, "peak = 27.0", "peak = -1.0")), "regions[0].rate.bell.peak");
  EXPECT_EQ(key_path_of(replace(kBase, "[18, 9.0]", "[0, 9.0]")), "regions[1].rate.knots[1][0]");
  EXPECT_EQ(key_path_of(replace(kBase, "step_minutes = 15", "step_minutes = 0")), "grid.step_minutes");
  EXPECT_EQ(key_path_of(replace(kBase, "origin = \"2008-09-12T07:00\"", "origin = \"yesterday\"")), "grid.origin");
  EXPECT_EQ(key_path_of(replace(kBase, "[0, 12, 45]", "[0, 12, 12]")), "durations.interval_boundaries_hours[2]");
  EXPECT_EQ(key_path_of(replace(kBase, "id = \"Z2\"", "id = \"Z1\"")), "regions[1].id");
  EXPECT_EQ(key_path_of(replace(kBase, "region = \"Z2\"\ncomp", "region = \"Q\"\ncomp")), "mixtures[2].region");
  EXPECT_EQ(key_path_of(replace(kBase, "interval = 1\nregion", "interval = 5\nregion")), "mixtures[3].interval");
  EXPECT_EQ(key_path_of(replace(kBase, "shape = 4.0", "shape = 0.0")), "mixtures[3].components[0].shape");
  EXPECT_EQ(key_path_of(replace(kBase, "shape = 2.0, scale = 2.0, weight = 1.0", "shape = 2.0, scale = 2.0, weight = 0.5")),
            "mixtures[1].components");
  EXPECT_EQ(key_path_of(replace(kBase, "seed = 7", "seed = \"x\"")), "seed");
  EXPECT_EQ(key_path_of(replace(kBase, "hours = 45", "")), "grid.hours");
  EXPECT_EQ(key_path_of(replace(kBase, "origin = \"2008-09-12T07:00\"", "origin = 2008-09-12T07:00:00")), "grid.origin");
}

TEST(Scenario, UncoveredCellIsAnError) {
  std::string text = kBase.substr(0, kBase.find("[[mixtures]]"));
  text += "[[mixtures]]\ninterval = 0\ncomponents = [{ shape = 1.0, scale = 1.0, weight = 1.0 }]\n";
  EXPECT_EQ(key_path_of(text), "mixtures");
}

TEST(Scenario, TomlSyntaxErrorReportsLine) {
  try {
    load_scenario_text("seed = 1\n[grid\n", false);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Scenario, JsonAndTomlAreEquivalent) {
  const auto toml_cfg = load_scenario_text(kBase, false);
  const auto doc = nlohmann::json::parse(R"({
    "seed": 7,
    "grid": {"origin": "2008-09-12T07:00", "tz_offset_minutes": -300, "step_minutes": 15, "hours": 45},
    "durations": {"interval_boundaries_hours": [0, 12, 45]},
    "regions": [
      {"id": "Z1", "rate": {"bell": {"peak": 27.0, "center_hours": 18.0, "width_hours": 4.0, "base": 0.2}}},
      {"id": "Z2", "rate": {"knots": [[0, 0.5], [18, 9.0], [45, 0.5]]}}
    ],
    "mixtures": [
      {"components": [{"shape": 1.0, "scale": 1.0, "weight": 1.0}]},
      {"interval": 1, "components": [{"shape": 2.0, "scale": 2.0, "weight": 1.0}]},
      {"region": "Z2", "components": [{"shape": 3.0, "scale": 3.0, "weight": 1.0}]},
      {"interval": 1, "region": "Z2", "components": [{"shape": 4.0, "scale": 4.0, "weight": 1.0}]}
    ]
  })");
  const auto json_cfg = load_scenario_text(doc.dump(), true);
  EXPECT_EQ(json_cfg.spec.grid, toml_cfg.spec.grid);
  EXPECT_EQ(json_cfg.spec.partition, toml_cfg.spec.partition);
  EXPECT_EQ(json_cfg.spec.durations, toml_cfg.spec.durations);
  for (double t = 0.0; t <= 45.0; t += 0.5) {
    EXPECT_EQ(json_cfg.spec.rates[0](t), toml_cfg.spec.rates[0](t));
    EXPECT_EQ(json_cfg.spec.rates[1](t), toml_cfg.spec.rates[1](t));
  }
  EXPECT_EQ(simulate_events(json_cfg.spec), simulate_events(toml_cfg.spec));
}

TEST(Scenario, BundledConfigsLoad) {
  for (const char* name : {"ike_like.toml", "city_mixtures.toml", "zero_rate.toml", "theorem_check.toml"}) {
    EXPECT_NO_THROW(load_scenario(scenarios::data_path(name))) << name;
  }
  EXPECT_THROW(load_scenario(scenarios::data_path("missing.toml")), InputError);
}

TEST(Scenario, TruthDocument) {
  const auto cfg = load_scenario(scenarios::data_path("city_mixtures.toml"));
  const auto truth = scenario_truth_json(cfg);
  EXPECT_EQ(truth["provenance"]["config_hash"], cfg.config_hash);
  EXPECT_EQ(truth["regions"].size(), cfg.spec.partition.size());
  for (const auto& cell : truth["cells"]) {
    const auto j = *cfg.spec.partition.index_of(cell["region"].get<std::string>());
    EXPECT_DOUBLE_EQ(cell["p_recover_within_24h"].get<double>(),
                     cfg.spec.durations.at(cell["interval"].get<std::size_t>(), j).cdf(24.0));
  }
}
