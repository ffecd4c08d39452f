#pragma once

#include <map>
#include <string>
#include <vector>

#include "abcast/checks.hpp"
#include "abcast/scenario.hpp"
#include "abcast/simnet.hpp"

namespace abcast::testing {

inline harness::Scenario base_scenario(std::uint32_t n, std::uint32_t f, Time delta, Time gst,
                                       Time Delta, BackendKind backend = BackendKind::bracha) {
  harness::Scenario s;
  s.sim.params = Params{n, f, delta, gst, Delta};
  s.sim.backend.kind = backend;
  s.sim.pre_gst_max_delay = delta;
  s.schedule = LeaderSchedule::round_robin(n);
  s.auto_horizon = true;
  harness::use_auto_horizon(s);
  return s;
}

inline void set_horizon(harness::Scenario& s, Time horizon) {
  s.auto_horizon = false;
  s.sim.horizon = horizon;
  s.sim.horizon_policy = nullptr;
}

inline void inject(harness::Scenario& s, Time t, std::uint32_t node, const std::string& value) {
  s.injections.push_back({t, NodeId{node}, value});
  if (s.auto_horizon) harness::use_auto_horizon(s);
}

inline void add_adversary(harness::Scenario& s, std::uint32_t node,
                          std::vector<sim::AdversaryBehavior> behaviors) {
  s.sim.adversaries.push_back({NodeId{node}, std::move(behaviors)});
  if (s.auto_horizon) harness::use_auto_horizon(s);
}

/// Delivered sequence per node.
inline std::map<NodeId, std::vector<std::pair<Round, Value>>> outputs(const Trace& t) {
  std::map<NodeId, std::vector<std::pair<Round, Value>>> out;
  for (const auto& e : t.events) {
    if (e.kind == EventKind::ab_output) out[e.node].emplace_back(*e.round, *e.payload);
  }
  return out;
}

/// Subprotocol outputs per instance and node.
inline std::map<InstanceKey, std::map<NodeId, std::pair<Time, SubprotoValue>>> subproto_outputs(
    const Trace& t) {
  std::map<InstanceKey, std::map<NodeId, std::pair<Time, SubprotoValue>>> out;
  for (const auto& e : t.events) {
    if (e.kind == EventKind::subproto_output) out[*e.instance][e.node] = {e.time, *e.value};
  }
  return out;
}

inline const harness::CheckReport* find_report(const std::vector<harness::CheckReport>& reports,
                                               const std::string& name) {
  for (const auto& r : reports) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

}  // namespace abcast::testing
