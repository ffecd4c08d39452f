#include "abcast/trace.hpp"

#include <array>
#include <istream>
#include <ostream>

#include "abcast/encoding.hpp"
#include "abcast/gossip_quorum.hpp"

namespace abcast {

namespace {

constexpr std::array kEventNames = {
    "send",           "deliver", "drop",      "timer_set",      "timer_fire", "injection",
    "subproto_input", "subproto_output", "advance", "ab_output", "forge_rejected", "crash",
};

using json = nlohmann::json;

json instance_json(const InstanceKey& k) {
  return {{"kind", k.kind == InstanceKind::rb ? "RB" : "WBA"}, {"round", k.round}};
}

InstanceKey instance_from(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind != "RB" && kind != "WBA") throw ConfigError("bad instance kind: " + kind);
  return {kind == "RB" ? InstanceKind::rb : InstanceKind::wba, j.at("round").get<Round>()};
}

json value_json(const SubprotoValue& v) {
  if (const auto* p = std::get_if<Proposal>(&v)) {
    return {{"value", p->value},
            {"parent", p->parent ? json(*p->parent) : json(nullptr)},
            {"timestamp", p->timestamp}};
  }
  return to_int(std::get<Bit>(v));
}

SubprotoValue value_from(const json& j) {
  if (j.is_object()) {
    Proposal p;
    p.value = j.at("value").get<std::string>();
    if (!j.at("parent").is_null()) p.parent = j.at("parent").get<Round>();
    p.timestamp = j.value("timestamp", Time{0});
    return p;
  }
  const int b = j.get<int>();
  if (b != 0 && b != 1) throw ConfigError("bit must be 0 or 1");
  return b == 0 ? Bit::zero : Bit::one;
}

}  // namespace

std::string to_string(EventKind k) { return kEventNames.at(static_cast<std::size_t>(k)); }

EventKind event_kind_from_string(const std::string& s) {
  for (std::size_t i = 0; i < kEventNames.size(); ++i) {
    if (s == kEventNames[i]) return static_cast<EventKind>(i);
  }
  throw ConfigError("unknown event kind: " + s);
}

std::string to_string(BackendKind k) { return k == BackendKind::bracha ? "bracha" : "gossip"; }

MessageInfo describe(const Message& m, bool gossip) {
  MessageInfo info;
  info.kind = kind_name(m);
  info.instance = instance_of(m);
  info.payload = payload_string(m);
  if (const auto* s = std::get_if<SignedMsg>(&m)) info.signer = s->signer;
  info.id = to_hex(gossip::digest(encode(m))).substr(0, 16);
  info.gossip = gossip;
  return info;
}

std::vector<NodeId> Trace::correct_nodes() const {
  std::vector<NodeId> out;
  for (std::uint32_t i = 0; i < header.node_count(); ++i) {
    if (header.is_correct(NodeId{i})) out.push_back(NodeId{i});
  }
  return out;
}

NodeId Trace::leader_of(Round r) const {
  return header.leader_order.at(r % header.leader_order.size());
}

json to_json(const TraceHeader& h) {
  json faulty = json::array();
  for (NodeId id : h.faulty) faulty.push_back(id.index);
  json order = json::array();
  for (NodeId id : h.leader_order) order.push_back(id.index);
  return {
      {"kind", "header"},
      {"version", h.version},
      {"params",
       {{"n", h.params.n},
        {"f", h.params.f},
        {"delta", h.params.delta},
        {"gst", h.params.gst},
        {"Delta", h.params.subproto_delay}}},
      {"observers", h.observers},
      {"seed", h.seed},
      {"horizon", h.horizon},
      {"pre_gst_max_delay", h.pre_gst_max_delay},
      {"gossip_relay_latency", h.gossip_relay_latency},
      {"backend", to_string(h.backend)},
      {"digest_mode", h.digest_mode},
      {"leader_order", order},
      {"faulty", faulty},
      {"start_time", h.start_time ? json(*h.start_time) : json(nullptr)},
  };
}

TraceHeader header_from_json(const json& j) {
  TraceHeader h;
  h.version = j.at("version").get<int>();
  if (h.version != kTraceVersion) {
    throw ConfigError("unsupported trace version " + std::to_string(h.version));
  }
  const auto& p = j.at("params");
  h.params.n = p.at("n").get<std::uint32_t>();
  h.params.f = p.at("f").get<std::uint32_t>();
  h.params.delta = p.at("delta").get<Time>();
  h.params.gst = p.at("gst").get<Time>();
  h.params.subproto_delay = p.at("Delta").get<Time>();
  h.observers = j.value("observers", 0u);
  h.seed = j.at("seed").get<std::uint64_t>();
  h.horizon = j.at("horizon").get<Time>();
  h.pre_gst_max_delay = j.value("pre_gst_max_delay", Time{0});
  h.gossip_relay_latency = j.value("gossip_relay_latency", Time{0});
  const auto backend = j.at("backend").get<std::string>();
  h.backend = backend == "gossip" ? BackendKind::gossip : BackendKind::bracha;
  h.digest_mode = j.value("digest_mode", false);
  for (const auto& id : j.at("leader_order")) h.leader_order.push_back(NodeId{id.get<std::uint32_t>()});
  for (const auto& id : j.at("faulty")) h.faulty.insert(NodeId{id.get<std::uint32_t>()});
  if (j.contains("start_time") && !j.at("start_time").is_null()) {
    h.start_time = j.at("start_time").get<Time>();
  }
  return h;
}

json to_json(const TraceEvent& e) {
  json j = {{"index", e.index}, {"time", e.time}, {"kind", to_string(e.kind)}, {"node", e.node.index}};
  if (e.peer) j["peer"] = e.peer->index;
  if (e.due) j["due"] = *e.due;
  if (e.generation) j["generation"] = *e.generation;
  if (e.instance) j["instance"] = instance_json(*e.instance);
  if (e.value) j["value"] = value_json(*e.value);
  if (e.round) j["round"] = *e.round;
  if (e.payload) j["payload"] = *e.payload;
  if (e.message) {
    json m = {{"kind", e.message->kind},
              {"instance", instance_json(e.message->instance)},
              {"payload", e.message->payload},
              {"id", e.message->id},
              {"gossip", e.message->gossip}};
    if (e.message->signer) m["signer"] = e.message->signer->index;
    j["message"] = std::move(m);
  }
  if (!e.note.empty()) j["note"] = e.note;
  return j;
}

TraceEvent event_from_json(const json& j) {
  TraceEvent e;
  e.index = j.at("index").get<std::uint64_t>();
  e.time = j.at("time").get<Time>();
  e.kind = event_kind_from_string(j.at("kind").get<std::string>());
  e.node = NodeId{j.at("node").get<std::uint32_t>()};
  if (j.contains("peer")) e.peer = NodeId{j.at("peer").get<std::uint32_t>()};
  if (j.contains("due")) e.due = j.at("due").get<Time>();
  if (j.contains("generation")) e.generation = j.at("generation").get<std::uint64_t>();
  if (j.contains("instance")) e.instance = instance_from(j.at("instance"));
  if (j.contains("value")) e.value = value_from(j.at("value"));
  if (j.contains("round")) e.round = j.at("round").get<Round>();
  if (j.contains("payload")) e.payload = j.at("payload").get<std::string>();
  if (j.contains("message")) {
    const auto& m = j.at("message");
    MessageInfo info;
    info.kind = m.at("kind").get<std::string>();
    info.instance = instance_from(m.at("instance"));
    info.payload = m.at("payload").get<std::string>();
    info.id = m.at("id").get<std::string>();
    info.gossip = m.value("gossip", false);
    if (m.contains("signer")) info.signer = NodeId{m.at("signer").get<std::uint32_t>()};
    e.message = std::move(info);
  }
  e.note = j.value("note", std::string{});
  return e;
}

void write_jsonl(std::ostream& os, const Trace& trace) {
  os << to_json(trace.header).dump() << '\n';
  for (const auto& e : trace.events) os << to_json(e).dump() << '\n';
}

Trace read_jsonl(std::istream& is) {
  Trace trace;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& err) {
      throw ConfigError("trace line " + std::to_string(line_no) + ": " + err.what());
    }
    if (!have_header) {
      if (j.value("kind", std::string{}) != "header") {
        throw ConfigError("trace must start with a header line");
      }
      trace.header = header_from_json(j);
      have_header = true;
      continue;
    }
    trace.events.push_back(event_from_json(j));
  }
  if (!have_header) throw ConfigError("empty trace");
  return trace;
}

}  // namespace abcast
