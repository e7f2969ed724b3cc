#include "stormqueue/model_io.hpp"

#include <fstream>

#include "stormqueue/data_io.hpp"

namespace stormqueue {

nlohmann::json model_to_json(const PiecewiseDurationModel& model) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& [key, mix] : model.cells()) {
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : mix.components()) {
      comps.push_back({{"shape", c.shape}, {"scale", c.scale}, {"weight", c.weight}});
    }
    cells.push_back({{"interval", key.first},
                     {"region", model.region_ids()[key.second]},
                     {"components", std::move(comps)}});
  }
  return {{"format", "stormqueue-model"},
          {"version", kModelFormatVersion},
          {"origin_minutes", model.origin_minutes()},
          {"origin", format_timestamp(model.origin_minutes(), 0)},
          {"interval_boundaries_hours", model.boundaries()},
          {"regions", model.region_ids()},
          {"cells", std::move(cells)}};
}

PiecewiseDurationModel model_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "stormqueue-model") {
      throw InputError("model: 'format' must be \"stormqueue-model\"");
    }
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw InputError("model: unsupported version " + std::to_string(version));
    }
    auto boundaries = doc.at("interval_boundaries_hours").get<std::vector<double>>();
    auto regions = doc.at("regions").get<std::vector<std::string>>();
    std::map<PiecewiseDurationModel::CellKey, WeibullMixture> cells;
    for (const auto& cell : doc.at("cells")) {
      const auto interval = cell.at("interval").get<std::size_t>();
      const auto region = cell.at("region").get<std::string>();
      const auto it = std::find(regions.begin(), regions.end(), region);
      if (it == regions.end()) throw InputError("model: cell names unknown region '" + region + "'");
      std::vector<WeibullComponent> comps;
      for (const auto& c : cell.at("components")) {
        comps.push_back({c.at("shape").get<double>(), c.at("scale").get<double>(),
                         c.at("weight").get<double>()});
      }
      const PiecewiseDurationModel::CellKey key{interval, static_cast<std::size_t>(it - regions.begin())};
      if (!cells.emplace(key, WeibullMixture(std::move(comps))).second) {
        throw InputError("model: duplicate cell for interval " + std::to_string(interval) +
                         ", region '" + region + "'");
      }
    }
    return PiecewiseDurationModel(std::move(boundaries), std::move(regions), std::move(cells),
                                  doc.at("origin_minutes").get<std::int64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("model: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("model: ") + e.what());
  } catch (const std::domain_error& e) {
    throw InputError(std::string("model: ") + e.what());
  }
}

PiecewiseDurationModel read_model_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("'" + path.string() + "': " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace stormqueue
