#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "abcast/core_model.hpp"
#include "abcast/subproto.hpp"

namespace abcast {

inline constexpr int kTraceVersion = 1;

enum class EventKind : std::uint8_t {
  send,
  deliver,
  drop,
  timer_set,
  timer_fire,
  injection,
  subproto_input,
  subproto_output,
  advance,
  ab_output,
  forge_rejected,
  crash,
};

std::string to_string(EventKind k);
EventKind event_kind_from_string(const std::string& s);

enum class BackendKind : std::uint8_t { bracha, gossip };

std::string to_string(BackendKind k);

/// Message summary as recorded in the trace.
struct MessageInfo {
  std::string kind;
  InstanceKey instance;
  std::string payload;
  std::optional<NodeId> signer;
  /// Short hex id of the full encoding; equal ids mean equal messages.
  std::string id;
  bool gossip = false;

  bool operator==(const MessageInfo&) const = default;
};

MessageInfo describe(const Message& m, bool gossip);

/// One line of the trace. Which optional fields are set depends on `kind`:
///   send            peer=recipient, due=delivery time, message
///   deliver / drop  peer=sender, message (drop: note=reason)
///   timer_set       due=fire time, generation
///   timer_fire      generation
///   injection       payload=value
///   subproto_input / subproto_output   instance, value
///   advance         round=new current round
///   ab_output       round, payload=value
struct TraceEvent {
  std::uint64_t index = 0;
  Time time = 0;
  EventKind kind = EventKind::send;
  NodeId node;
  std::optional<NodeId> peer;
  std::optional<Time> due;
  std::optional<std::uint64_t> generation;
  std::optional<InstanceKey> instance;
  std::optional<SubprotoValue> value;
  std::optional<Round> round;
  std::optional<Value> payload;
  std::optional<MessageInfo> message;
  std::string note;

  bool operator==(const TraceEvent&) const = default;
};

/// Run metadata written as the first trace line.
struct TraceHeader {
  int version = kTraceVersion;
  Params params;
  std::uint32_t observers = 0;
  std::uint64_t seed = 0;
  Time horizon = 0;
  Time pre_gst_max_delay = 0;
  Time gossip_relay_latency = 0;
  BackendKind backend = BackendKind::bracha;
  bool digest_mode = false;
  std::vector<NodeId> leader_order;
  std::set<NodeId> faulty;
  std::optional<Time> start_time;

  std::uint32_t node_count() const { return params.n + observers; }
  bool is_correct(NodeId id) const { return !faulty.contains(id); }

  bool operator==(const TraceHeader&) const = default;
};

/// Totally ordered, append-only log of one simulation run.
struct Trace {
  TraceHeader header;
  std::vector<TraceEvent> events;

  std::vector<NodeId> correct_nodes() const;
  NodeId leader_of(Round r) const;

  bool operator==(const Trace&) const = default;
};

nlohmann::json to_json(const TraceHeader& h);
nlohmann::json to_json(const TraceEvent& e);
TraceHeader header_from_json(const nlohmann::json& j);
TraceEvent event_from_json(const nlohmann::json& j);

/// JSON-lines: header line, then one event per line.
void write_jsonl(std::ostream& os, const Trace& trace);
Trace read_jsonl(std::istream& is);

}  // namespace abcast
