// Scenario files (JSON) and trajectory output (CSV log plus JSON sidecar).
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "resest/median.hpp"
#include "resest/sim.hpp"

namespace resest {

/// Parses a scenario document. Unknown keys are rejected. Syntax errors carry
/// the line and column; schema errors carry the JSON pointer of the offending
/// value. `source` only labels messages. Throws ScenarioError.
Scenario parse_scenario(std::string_view text, std::string_view source = "<scenario>");

Scenario load_scenario(const std::filesystem::path& path);

/// Canonical JSON form. Presets are expanded, so the plant and the topology
/// are always written as explicit matrices; parsing the output gives back an
/// identical Scenario.
std::string serialize_scenario(const Scenario& scenario);

/// Column names of the trajectory CSV for the given log.
std::vector<std::string> log_columns(const TrajectoryLog& log);

void write_log_csv(const TrajectoryLog& log, std::ostream& out);

/// Sidecar with the scenario echo, seed, audit, bounds and the tail metrics
/// (plus any extra windows).
std::string sidecar_json(const Scenario& scenario, const TrajectoryLog& log,
                         const WindowMetrics& tail, const std::vector<WindowMetrics>& windows);

/// t, x_1..x_N, dist_to_median_set.
void write_median_csv(const MedianRun& run, std::ostream& out);

}  // namespace resest
