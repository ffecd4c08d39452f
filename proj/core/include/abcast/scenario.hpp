#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "abcast/checks.hpp"
#include "abcast/simnet.hpp"

namespace abcast::harness {

inline constexpr int kScenarioVersion = 1;

/// A complete, runnable experiment.
struct Scenario {
  sim::SimConfig sim;
  LeaderSchedule schedule = LeaderSchedule::round_robin(4);
  std::vector<sim::Injection> injections;
  /// Empty means every check.
  std::vector<std::string> checks;
  /// When set, fuzzing draws GST per seed from this inclusive range.
  std::optional<std::pair<Time, Time>> gst_range;
  bool auto_horizon = false;
};

/// Parses and validates a scenario. Throws ConfigError (FaultBoundError for
/// n <= 3f) with a diagnostic on any problem.
Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);

/// Copy of `s` for another seed; GST is redrawn if the scenario has a range.
Scenario with_seed(const Scenario& s, std::uint64_t seed);

/// Installs the automatic horizon policy sized for the liveness bound.
void use_auto_horizon(Scenario& s);

Trace run_scenario(const Scenario& s);

/// Runs the scenario's checks on a trace, which must come from a run with
/// the same parameters.
std::vector<CheckReport> check_trace(const Trace& trace, const Scenario& s);

}  // namespace abcast::harness
