// Scenario configuration (TOML or JSON) for the simulator.
//
//   seed = 7
//   [grid]
//   origin = "2008-09-12T07:00"     # local time
//   tz_offset_minutes = -300
//   step_minutes = 15
//   hours = 45
//   [durations]
//   interval_boundaries_hours = [0, 12, 25, 32, 40, 45]
//   [[regions]]
//   id = "Z1"
//   rate.bell = { peak = 27.0, center_hours = 18.0, width_hours = 4.0, base = 0.2 }
//   # or rate.knots = [[0, 0.5], [18, 27.0], [45, 0.5]]
//   [[mixtures]]
//   interval = 0            # omitted: every interval
//   region = "*"            # "*" or omitted: every region
//   components = [{ shape = 1.0, scale = 0.71, weight = 0.486 }, ...]
//
// A cell (interval, region) takes the most specific matching [[mixtures]]
// entry: exact > interval-only > region-only > catch-all.
#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "stormqueue/simulate.hpp"

namespace stormqueue {

/// Invalid configuration; `key_path()` names the offending key, e.g.
/// "regions[2].rate.bell.peak".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key_path, const std::string& message);
  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

struct ScenarioConfig {
  ScenarioSpec spec;
  int tz_offset_minutes = 0;
  /// FNV-1a 64 of the raw configuration bytes, hex.
  std::string config_hash;
};

ScenarioConfig scenario_from_json(const nlohmann::json& doc, std::string config_hash = {});
/// Parses TOML (any extension but .json) or JSON.
ScenarioConfig load_scenario(const std::filesystem::path& path);
ScenarioConfig load_scenario_text(const std::string& text, bool is_json);

std::string fnv1a_hex(std::string_view bytes);

/// The ground-truth parameters of a scenario as a JSON document.
nlohmann::json scenario_truth_json(const ScenarioConfig& config);

}  // namespace stormqueue
