#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "abcast/adversary.hpp"
#include "abcast/core_model.hpp"
#include "abcast/engine.hpp"
#include "abcast/trace.hpp"

namespace abcast::sim {

/// Post-GST delay law: always delta, or uniform in [1, delta].
enum class DelayLaw : std::uint8_t { fixed, uniform };

struct BackendConfig {
  BackendKind kind = BackendKind::bracha;
  bool digest_mode = false;
};

struct Injection {
  Time time{0};
  NodeId node;
  Value value;
};

/// Picks the horizon once the run passes max(GST, horizon_anchor), given the
/// largest current round among correct nodes at that moment.
using HorizonPolicy = std::function<Time(Round max_current)>;

struct SimConfig {
  Params params;
  std::uint32_t observers = 0;
  std::uint64_t seed = 0;
  /// Messages sent before GST take 1..pre_gst_max_delay ticks, but never
  /// arrive later than GST + delta.
  Time pre_gst_max_delay = 1;
  DelayLaw delay_law = DelayLaw::fixed;
  Time gossip_relay_latency = 0;
  /// Fixed horizon. When unset, `horizon_policy` decides at GST.
  std::optional<Time> horizon;
  HorizonPolicy horizon_policy;
  Time horizon_anchor = 0;
  std::vector<AdversarySpec> adversaries;
  BackendConfig backend;
  EngineOptions engine;

  void validate() const;
};

/// Delivery time of a message sent at `sent`, given the two drawn delays.
Time delivery_time(Time sent, Time gst, Time d_pre, Time d_post);

/// Runs one deterministic simulation and returns its trace.
Trace run(const SimConfig& config, const LeaderSchedule& schedule,
          std::span<const Injection> injections);

}  // namespace abcast::sim
