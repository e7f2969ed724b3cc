// Versioned JSON interchange document for fitted duration models.
//
//   {
//     "format": "stormqueue-model", "version": 1,
//     "origin_minutes": <int>, "origin": "YYYY-MM-DDTHH:MM" (UTC),
//     "interval_boundaries_hours": [b0, b1, ...],
//     "regions": ["Z1", ...],            // ["*"] for a pooled model
//     "cells": [{"interval": 0, "region": "Z1",
//                "components": [{"shape": k, "scale": g, "weight": r}, ...]}]
//   }
#pragma once

#include <filesystem>

#include "json.hpp"
#include "stormqueue/core.hpp"

namespace stormqueue {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const PiecewiseDurationModel& model);
/// Throws InputError on schema violations or an unsupported version.
PiecewiseDurationModel model_from_json(const nlohmann::json& doc);

PiecewiseDurationModel read_model_json(const std::filesystem::path& path);

}  // namespace stormqueue
