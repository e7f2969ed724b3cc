#include "stormqueue/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "stormqueue/data_io.hpp"
#include "toml.hpp"

namespace stormqueue {

using nlohmann::json;

ConfigError::ConfigError(std::string key_path, const std::string& message)
    : std::runtime_error(key_path.empty() ? message : key_path + ": " + message),
      key_path_(std::move(key_path)) {}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

json toml_to_json(const toml::node& node, const std::string& path) {
  if (const auto* t = node.as_table()) {
    json j = json::object();
    for (auto&& [k, v] : *t) {
      const std::string key(k.str());
      j[key] = toml_to_json(v, path.empty() ? key : path + "." + key);
    }
    return j;
  }
  if (const auto* a = node.as_array()) {
    json j = json::array();
    std::size_t i = 0;
    for (auto&& v : *a) j.push_back(toml_to_json(v, path + "[" + std::to_string(i++) + "]"));
    return j;
  }
  if (const auto* s = node.as_string()) return s->get();
  if (const auto* i = node.as_integer()) return i->get();
  if (const auto* f = node.as_floating_point()) return f->get();
  if (const auto* b = node.as_boolean()) return b->get();
  throw ConfigError(path, "unsupported value type (write timestamps as strings)");
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

const json& require(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.is_object()) throw ConfigError(path, "expected a table");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(join(path, key), "missing required key");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
  return x;
}

double number_at(const json& obj, const std::string& path, const std::string& key) {
  return number(require(obj, path, key), join(path, key));
}

std::int64_t integer_at(const json& obj, const std::string& path, const std::string& key) {
  const auto& v = require(obj, path, key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return v.get<std::int64_t>();
}

std::string string_at(const json& obj, const std::string& path, const std::string& key) {
  const auto& v = require(obj, path, key);
  if (!v.is_string()) throw ConfigError(join(path, key), "expected a string");
  return v.get<std::string>();
}

PiecewiseLinearRate parse_rate(const json& rate, const TimeGrid& grid, const std::string& path) {
  if (!rate.is_object()) throw ConfigError(path, "expected a table with 'bell' or 'knots'");
  if (rate.contains("bell")) {
    const std::string p = join(path, "bell");
    const auto& b = rate.at("bell");
    const double peak = number_at(b, p, "peak");
    const double center = number_at(b, p, "center_hours");
    const double width = number_at(b, p, "width_hours");
    const double base = b.contains("base") ? number_at(b, p, "base") : 0.0;
    if (peak < 0.0) throw ConfigError(join(p, "peak"), "must be >= 0");
    if (base < 0.0) throw ConfigError(join(p, "base"), "must be >= 0");
    if (!(width > 0.0)) throw ConfigError(join(p, "width_hours"), "must be > 0");
    return bell_rate(grid, peak, center, width, base);
  }
  if (rate.contains("knots")) {
    const std::string p = join(path, "knots");
    const auto& k = rate.at("knots");
    if (!k.is_array() || k.empty()) throw ConfigError(p, "expected a nonempty array of [hour, rate]");
    std::vector<std::pair<double, double>> knots;
    for (std::size_t i = 0; i < k.size(); ++i) {
      const std::string pi = p + "[" + std::to_string(i) + "]";
      if (!k[i].is_array() || k[i].size() != 2) throw ConfigError(pi, "expected [hour, rate]");
      const double t = number(k[i][0], pi + "[0]");
      const double v = number(k[i][1], pi + "[1]");
      if (v < 0.0) throw ConfigError(pi + "[1]", "rate must be >= 0");
      if (!knots.empty() && !(t > knots.back().first)) throw ConfigError(pi + "[0]", "knot hours must increase");
      knots.emplace_back(t, v);
    }
    return PiecewiseLinearRate(std::move(knots));
  }
  if (rate.contains("constant")) {
    const double v = number_at(rate, path, "constant");
    if (v < 0.0) throw ConfigError(join(path, "constant"), "must be >= 0");
    return PiecewiseLinearRate::constant(v);
  }
  throw ConfigError(path, "expected 'bell', 'knots' or 'constant'");
}

struct MixtureEntry {
  std::optional<std::size_t> interval;
  std::optional<std::size_t> region;
  WeibullMixture mixture;
};

}  // namespace

ScenarioConfig scenario_from_json(const json& doc, std::string config_hash) {
  if (!doc.is_object()) throw ConfigError("", "configuration must be a table");
  std::uint64_t seed = 0;
  if (doc.contains("seed")) {
    const auto& s = doc.at("seed");
    if (!s.is_number_integer()) throw ConfigError("seed", "expected an integer");
    seed = s.is_number_unsigned() ? s.get<std::uint64_t>() : static_cast<std::uint64_t>(s.get<std::int64_t>());
  }

  const auto& g = require(doc, "", "grid");
  const auto tz = integer_at(g, "grid", "tz_offset_minutes");
  if (tz < -24 * 60 || tz > 24 * 60) throw ConfigError("grid.tz_offset_minutes", "out of range");
  std::int64_t origin = 0;
  try {
    origin = parse_timestamp(string_at(g, "grid", "origin"), static_cast<int>(tz));
  } catch (const InputError& e) {
    throw ConfigError("grid.origin", e.what());
  }
  const auto step_minutes = integer_at(g, "grid", "step_minutes");
  if (step_minutes <= 0) throw ConfigError("grid.step_minutes", "must be > 0");
  const double hours = number_at(g, "grid", "hours");
  if (!(hours >= 0.0)) throw ConfigError("grid.hours", "must be >= 0");
  const double step = static_cast<double>(step_minutes) / 60.0;
  const auto count = static_cast<std::size_t>(std::llround(std::floor(hours / step + 1e-9))) + 1;
  const TimeGrid grid(origin, step, count);

  const auto& regions_doc = require(doc, "", "regions");
  if (!regions_doc.is_array() || regions_doc.empty()) throw ConfigError("regions", "expected a nonempty array");
  std::vector<Region> regions;
  std::vector<PiecewiseLinearRate> rates;
  for (std::size_t j = 0; j < regions_doc.size(); ++j) {
    const std::string p = "regions[" + std::to_string(j) + "]";
    const auto& r = regions_doc[j];
    Region region{string_at(r, p, "id"), {}};
    region.name = r.contains("name") ? string_at(r, p, "name") : region.id;
    if (region.id.empty() || region.id == PiecewiseDurationModel::kPooledRegion) {
      throw ConfigError(join(p, "id"), "invalid region id");
    }
    for (const auto& prev : regions) {
      if (prev.id == region.id) throw ConfigError(join(p, "id"), "duplicate region id '" + region.id + "'");
    }
    rates.push_back(parse_rate(require(r, p, "rate"), grid, join(p, "rate")));
    regions.push_back(std::move(region));
  }
  RegionPartition partition(regions);

  const auto& d = require(doc, "", "durations");
  const auto& b = require(d, "durations", "interval_boundaries_hours");
  if (!b.is_array() || b.size() < 2) {
    throw ConfigError("durations.interval_boundaries_hours", "expected at least two boundaries");
  }
  std::vector<double> boundaries;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const std::string p = "durations.interval_boundaries_hours[" + std::to_string(i) + "]";
    boundaries.push_back(number(b[i], p));
    if (i > 0 && !(boundaries[i] > boundaries[i - 1])) throw ConfigError(p, "boundaries must increase");
  }
  const std::size_t intervals = boundaries.size() - 1;

  const auto& mixtures_doc = require(doc, "", "mixtures");
  if (!mixtures_doc.is_array() || mixtures_doc.empty()) throw ConfigError("mixtures", "expected a nonempty array");
  std::vector<MixtureEntry> entries;
  for (std::size_t e = 0; e < mixtures_doc.size(); ++e) {
    const std::string p = "mixtures[" + std::to_string(e) + "]";
    const auto& m = mixtures_doc[e];
    std::optional<std::size_t> interval;
    if (m.contains("interval")) {
      const auto i = integer_at(m, p, "interval");
      if (i < 0 || static_cast<std::size_t>(i) >= intervals) {
        throw ConfigError(join(p, "interval"), "must be in [0, " + std::to_string(intervals) + ")");
      }
      interval = static_cast<std::size_t>(i);
    }
    std::optional<std::size_t> region;
    if (m.contains("region")) {
      const auto id = string_at(m, p, "region");
      if (id != PiecewiseDurationModel::kPooledRegion) {
        region = partition.index_of(id);
        if (!region) throw ConfigError(join(p, "region"), "unknown region '" + id + "'");
      }
    }
    const auto& comps = require(m, p, "components");
    if (!comps.is_array() || comps.empty()) throw ConfigError(join(p, "components"), "expected a nonempty array");
    std::vector<WeibullComponent> parsed;
    for (std::size_t c = 0; c < comps.size(); ++c) {
      const std::string pc = join(p, "components") + "[" + std::to_string(c) + "]";
      WeibullComponent comp{number_at(comps[c], pc, "shape"), number_at(comps[c], pc, "scale"),
                            number_at(comps[c], pc, "weight")};
      if (!(comp.shape > 0.0)) throw ConfigError(join(pc, "shape"), "must be > 0");
      if (!(comp.scale > 0.0)) throw ConfigError(join(pc, "scale"), "must be > 0");
      if (!(comp.weight > 0.0 && comp.weight <= 1.0)) throw ConfigError(join(pc, "weight"), "must be in (0, 1]");
      parsed.push_back(comp);
    }
    try {
      entries.push_back({interval, region, WeibullMixture(std::move(parsed))});
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(join(p, "components"), ex.what());
    }
  }

  std::map<PiecewiseDurationModel::CellKey, WeibullMixture> cells;
  for (std::size_t i = 0; i < intervals; ++i) {
    for (std::size_t j = 0; j < partition.size(); ++j) {
      const MixtureEntry* best = nullptr;
      int best_rank = -1;
      for (const auto& e : entries) {
        if (e.interval && *e.interval != i) continue;
        if (e.region && *e.region != j) continue;
        const int rank = (e.interval ? 2 : 0) + (e.region ? 1 : 0);
        if (rank > best_rank) {
          best = &e;
          best_rank = rank;
        }
      }
      if (best == nullptr) {
        throw ConfigError("mixtures", "no mixture covers interval " + std::to_string(i) + ", region '" +
                                          partition[j].id + "'");
      }
      cells.emplace(PiecewiseDurationModel::CellKey{i, j}, best->mixture);
    }
  }

  ScenarioConfig out{ScenarioSpec{grid, partition, std::move(rates),
                                   PiecewiseDurationModel(boundaries, partition.ids(), std::move(cells), origin),
                                   seed},
                      static_cast<int>(tz), std::move(config_hash)};
  try {
    out.spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("durations.interval_boundaries_hours", e.what());
  }
  return out;
}

ScenarioConfig load_scenario_text(const std::string& text, bool is_json) {
  const std::string hash = fnv1a_hex(text);
  json doc;
  if (is_json) {
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError("", std::string("JSON parse error: ") + e.what());
    }
  } else {
    try {
      doc = toml_to_json(toml::parse(text), "");
    } catch (const toml::parse_error& e) {
      std::ostringstream msg;
      msg << "TOML parse error at line " << e.source().begin.line << ": " << e.description();
      throw ConfigError("", msg.str());
    }
  }
  return scenario_from_json(doc, hash);
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scenario_text(buf.str(), path.extension() == ".json");
}

json scenario_truth_json(const ScenarioConfig& config) {
  const auto& spec = config.spec;
  json regions = json::array();
  for (std::size_t j = 0; j < spec.partition.size(); ++j) {
    json knots = json::array();
    for (const auto& [t, v] : spec.rates[j].knots()) knots.push_back({t, v});
    regions.push_back({{"id", spec.partition[j].id}, {"name", spec.partition[j].name}, {"rate_knots", knots}});
  }
  json cells = json::array();
  for (const auto& [key, mix] : spec.durations.cells()) {
    json comps = json::array();
    for (const auto& c : mix.components()) {
      comps.push_back({{"shape", c.shape}, {"scale", c.scale}, {"weight", c.weight}});
    }
    cells.push_back({{"interval", key.first},
                     {"region", spec.partition[key.second].id},
                     {"components", comps},
                     {"p_recover_within_24h", mix.cdf(24.0)}});
  }
  return {{"grid",
           {{"origin", format_timestamp(spec.grid.origin_minutes(), config.tz_offset_minutes)},
            {"tz_offset_minutes", config.tz_offset_minutes},
            {"step_hours", spec.grid.step()},
            {"points", spec.grid.size()}}},
          {"regions", regions},
          {"interval_boundaries_hours", spec.durations.boundaries()},
          {"cells", cells},
          {"provenance", {{"config_hash", config.config_hash}, {"seed", spec.seed}}}};
}

}  // namespace stormqueue
