#pragma once

#include "morphwing/config.hpp"
#include "morphwing/flightsim.hpp"
#include "morphwing/placement.hpp"

#include <filesystem>
#include <string>
#include <vector>

// Scenario dispatch and artifact writing. Every artifact is plain text and
// depends only on the config (including its seed).
namespace morphwing::scenario {

struct RunResult {
  std::filesystem::path output_dir;
  std::vector<std::string> artifacts;  // file names, in write order
};

/// Run one scenario, writing into `dir` (created if missing). Module errors
/// propagate with their category; a diverged flight still leaves its
/// partial CSVs and a summary behind before rethrowing.
RunResult run_scenario(const config::ScenarioConfig& config, const std::filesystem::path& dir);

/// CLI exit status for an exception escaping run_scenario.
int exit_code(const std::exception& e);

/// Flight record artifacts: one CSV per panel (velocity, attitude, wrench,
/// joints, primer), a combined CSV and a long-format table.
std::vector<std::string> emit_report(const flightsim::SimOutput& out, const std::filesystem::path& dir);

/// Placement artifacts: a key: value report, the omega profile CSV and the
/// wingtip loop CSV.
std::vector<std::string> emit_report(const placement::PlacementSolution& solution,
                                     const placement::PlacementProblem& problem,
                                     const std::filesystem::path& dir);

/// Combined flight table header: time then every panel channel.
std::vector<std::string> combined_header();

/// Placement problem described by the config (desired directions resolved
/// against the unactuated baseline loop).
placement::PlacementProblem placement_problem(const config::ScenarioConfig& config);

}  // namespace morphwing::scenario
