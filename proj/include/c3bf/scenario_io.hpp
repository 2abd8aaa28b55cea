#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "c3bf/sim_engine.hpp"

namespace c3bf {

/// Strict decoding: unknown keys, wrong types and missing required fields raise
/// ValidationError naming the JSON pointer of the offending field.
Scenario scenario_from_json(const nlohmann::json& doc);

/// Inverse of scenario_from_json. Infinite quantities (no perception boundary, no speed cap,
/// open input bounds) are omitted or written as null.
nlohmann::json scenario_to_json(const Scenario& sc);

/// Parses text; syntax errors are reported with line and column.
Scenario parse_scenario(const std::string& text);

Scenario load_scenario_file(const std::filesystem::path& path);

/// Structured run summary written next to the trajectory.
nlohmann::json summary_to_json(const TrajectoryLog& log);

}  // namespace c3bf
