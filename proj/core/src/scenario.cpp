#include "abcast/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <type_traits>

namespace abcast::harness {

namespace {

using json = nlohmann::json;

void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
}

void allow_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  expect_object(j, where);
  for (const auto& [k, v] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
      throw ConfigError(where + ": unknown key \"" + k + "\"");
    }
  }
}

template <typename T>
T get(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
  if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
    const auto& v = j.at(key);
    if (!v.is_number_unsigned() && (!v.is_number_integer() || v.get<std::int64_t>() < 0)) {
      throw ConfigError(where + ": \"" + key + "\" must be a non-negative integer");
    }
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": \"" + key + "\" has the wrong type");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return get<T>(j, key, where);
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get<T>(j, key, where);
}

NodeId node_at(const json& j, const std::string& where) {
  if (!j.is_number_unsigned() && (!j.is_number_integer() || j.get<std::int64_t>() < 0)) throw ConfigError(where + ": node ids are non-negative integers");
  return NodeId{j.get<std::uint32_t>()};
}

std::vector<NodeId> nodes_of(const json& j, const char* key, const std::string& where) {
  std::vector<NodeId> out;
  if (!j.contains(key)) return out;
  if (!j.at(key).is_array()) throw ConfigError(where + ": \"" + key + "\" must be an array");
  for (const auto& x : j.at(key)) out.push_back(node_at(x, where));
  return out;
}

Round round_key(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const auto r = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return r;
  } catch (const std::exception&) {
    throw ConfigError(where + ": \"" + s + "\" is not a round number");
  }
}

Bit bit_of(const json& j, const std::string& where) {
  if (!j.is_number_integer() || (j.get<int>() != 0 && j.get<int>() != 1)) {
    throw ConfigError(where + ": bit must be 0 or 1");
  }
  return j.get<int>() == 0 ? Bit::zero : Bit::one;
}

SubprotoValue payload_of(const json& j, const std::string& where) {
  if (j.is_object()) {
    allow_keys(j, {"value", "parent", "timestamp"}, where);
    Proposal p;
    p.value = get<std::string>(j, "value", where);
    p.parent = get_opt<Round>(j, "parent", where);
    p.timestamp = get_or<Time>(j, "timestamp", 0, where);
    return p;
  }
  return bit_of(j, where);
}

sim::AdversaryBehavior behavior_of(const json& j, const std::string& where) {
  const auto kind = get<std::string>(j, "kind", where);
  const std::string at = where + " (" + kind + ")";
  if (kind == "crash") {
    allow_keys(j, {"kind", "at"}, at);
    return sim::adversary::Crash{get<Time>(j, "at", at)};
  }
  if (kind == "silent_leader") {
    allow_keys(j, {"kind", "rounds"}, at);
    return sim::adversary::SilentLeader{get_or<std::vector<Round>>(j, "rounds", {}, at)};
  }
  if (kind == "equivocating_proposer") {
    allow_keys(j, {"kind", "partition_a"}, at);
    return sim::adversary::EquivocatingProposer{nodes_of(j, "partition_a", at)};
  }
  if (kind == "flip_voter") {
    allow_keys(j, {"kind", "bits", "rb_values"}, at);
    sim::adversary::FlipVoter fv;
    if (j.contains("bits")) {
      expect_object(j.at("bits"), at + ".bits");
      for (const auto& [r, b] : j.at("bits").items()) fv.bits[round_key(r, at)] = bit_of(b, at);
    }
    if (j.contains("rb_values")) {
      expect_object(j.at("rb_values"), at + ".rb_values");
      for (const auto& [r, v] : j.at("rb_values").items()) {
        if (!v.is_string()) throw ConfigError(at + ": rb_values entries must be strings");
        fv.rb_values[round_key(r, at)] = v.get<std::string>();
      }
    }
    return fv;
  }
  if (kind == "scripted") {
    allow_keys(j, {"kind", "messages"}, at);
    sim::adversary::Scripted s;
    const auto& msgs = j.contains("messages") ? j.at("messages") : json::array();
    if (!msgs.is_array()) throw ConfigError(at + ": messages must be an array");
    for (const auto& m : msgs) {
      allow_keys(m, {"time", "to", "kind", "round", "payload", "signer", "digest"}, at);
      sim::adversary::ScriptedMessage sm;
      sm.time = get<Time>(m, "time", at);
      sm.to = nodes_of(m, "to", at);
      sm.kind = get<std::string>(m, "kind", at);
      sm.round = get<Round>(m, "round", at);
      if (!m.contains("payload")) throw ConfigError(at + ": missing \"payload\"");
      sm.payload = payload_of(m.at("payload"), at);
      if (m.contains("signer") && !m.at("signer").is_null()) sm.signer = node_at(m.at("signer"), at);
      sm.digest = get_or<bool>(m, "digest", false, at);
      sim::bracha_kind_from_string(sm.kind);
      const bool bit = std::holds_alternative<Bit>(sm.payload);
      if (bit != (sm.kind == "vote" || (sm.kind == "ready" && bit))) {
        throw ConfigError(at + ": payload type does not fit a " + sm.kind + " message");
      }
      if (sm.time < 0) throw ConfigError(at + ": time must be non-negative");
      s.messages.push_back(std::move(sm));
    }
    return s;
  }
  throw ConfigError(where + ": unknown behavior \"" + kind + "\"");
}

}  // namespace

Scenario parse_scenario(const json& j) {
  allow_keys(j, {"version", "description", "params", "backend", "schedule", "adversaries",
                 "injections", "engine_options", "sim", "checks"},
             "scenario");
  const int version = get<int>(j, "version", "scenario");
  if (version != kScenarioVersion) {
    throw ConfigError("unsupported scenario version " + std::to_string(version));
  }
  Scenario s;
  auto& cfg = s.sim;

  const auto& p = j.contains("params") ? j.at("params") : throw ConfigError("scenario: missing \"params\"");
  allow_keys(p, {"n", "f", "delta", "gst", "Delta"}, "params");
  cfg.params.n = get<std::uint32_t>(p, "n", "params");
  cfg.params.f = get<std::uint32_t>(p, "f", "params");
  cfg.params.delta = get<Time>(p, "delta", "params");
  cfg.params.gst = get_or<Time>(p, "gst", 0, "params");
  cfg.params.subproto_delay = get<Time>(p, "Delta", "params");
  cfg.params.validate();
  const std::uint32_t n = cfg.params.n;

  if (j.contains("backend")) {
    const auto& b = j.at("backend");
    allow_keys(b, {"kind", "digest_mode"}, "backend");
    const auto kind = get<std::string>(b, "kind", "backend");
    if (kind == "bracha") {
      cfg.backend.kind = BackendKind::bracha;
    } else if (kind == "gossip" || kind == "gossip_quorum") {
      cfg.backend.kind = BackendKind::gossip;
    } else {
      throw ConfigError("backend: unknown kind \"" + kind + "\"");
    }
    cfg.backend.digest_mode = get_or<bool>(b, "digest_mode", false, "backend");
    if (cfg.backend.digest_mode && cfg.backend.kind != BackendKind::gossip) {
      throw ConfigError("backend: digest_mode needs the gossip backend");
    }
  }

  s.schedule = LeaderSchedule::round_robin(n);
  if (j.contains("schedule")) {
    const auto& sc = j.at("schedule");
    allow_keys(sc, {"kind", "order"}, "schedule");
    const auto kind = get_or<std::string>(sc, "kind", "round_robin", "schedule");
    if (kind == "list") {
      s.schedule = LeaderSchedule::repeating(nodes_of(sc, "order", "schedule"), n);
    } else if (kind != "round_robin") {
      throw ConfigError("schedule: unknown kind \"" + kind + "\"");
    }
  }

  if (j.contains("engine_options")) {
    const auto& e = j.at("engine_options");
    const std::string w = "engine_options";
    allow_keys(e, {"queue", "spam_window", "start_time", "min_parent_delay", "validity"}, w);
    const auto queue = get_or<std::string>(e, "queue", "fifo", w);
    if (queue == "fifo") {
      cfg.engine.queue = QueueDiscipline::fifo;
    } else if (queue == "lifo") {
      cfg.engine.queue = QueueDiscipline::lifo;
    } else {
      throw ConfigError(w + ": queue must be fifo or lifo");
    }
    if (e.contains("spam_window")) cfg.engine.spam_window = get_opt<std::uint64_t>(e, "spam_window", w);
    cfg.engine.start_time = get_opt<Time>(e, "start_time", w);
    cfg.engine.min_parent_delay = get_opt<Time>(e, "min_parent_delay", w);
    const auto validity = get_or<std::string>(e, "validity", "no_duplicate_ancestor", w);
    if (validity == "no_duplicate_ancestor") {
      cfg.engine.validity = no_duplicate_ancestor;
    } else if (validity == "any") {
      cfg.engine.validity = [](const Proposal&, const AncestorChain&) { return true; };
    } else {
      throw ConfigError(w + ": unknown validity \"" + validity + "\"");
    }
  }

  json simj = j.contains("sim") ? j.at("sim") : json::object();
  allow_keys(simj, {"seed", "horizon", "pre_gst_max_delay", "delay_law", "gossip_relay_latency",
                    "observers", "gst_range"},
             "sim");
  cfg.seed = get_or<std::uint64_t>(simj, "seed", 0, "sim");
  cfg.pre_gst_max_delay = get_or<Time>(simj, "pre_gst_max_delay", cfg.params.delta, "sim");
  const auto law = get_or<std::string>(simj, "delay_law", "fixed", "sim");
  if (law == "fixed") {
    cfg.delay_law = sim::DelayLaw::fixed;
  } else if (law == "uniform") {
    cfg.delay_law = sim::DelayLaw::uniform;
  } else {
    throw ConfigError("sim: delay_law must be fixed or uniform");
  }
  cfg.gossip_relay_latency = get_or<Time>(simj, "gossip_relay_latency", 0, "sim");
  cfg.observers = get_or<std::uint32_t>(simj, "observers", 0, "sim");
  if (simj.contains("gst_range")) {
    const auto r = get<std::vector<Time>>(simj, "gst_range", "sim");
    if (r.size() != 2 || r[0] < 0 || r[1] < r[0]) {
      throw ConfigError("sim: gst_range must be [lo, hi] with 0 <= lo <= hi");
    }
    s.gst_range = std::make_pair(r[0], r[1]);
  }
  if (!simj.contains("horizon") || (simj.at("horizon").is_string() && simj.at("horizon") == "auto")) {
    s.auto_horizon = true;
  } else {
    cfg.horizon = get<Time>(simj, "horizon", "sim");
    if (*cfg.horizon <= cfg.params.gst) throw ConfigError("sim: horizon must exceed gst");
    if (s.gst_range && *cfg.horizon <= s.gst_range->second) {
      throw ConfigError("sim: horizon must exceed every gst in gst_range");
    }
  }

  const std::uint32_t total = n + cfg.observers;
  if (j.contains("adversaries")) {
    if (!j.at("adversaries").is_array()) throw ConfigError("adversaries must be an array");
    for (const auto& a : j.at("adversaries")) {
      allow_keys(a, {"node", "behaviors"}, "adversary");
      sim::AdversarySpec spec;
      if (!a.contains("node")) throw ConfigError("adversary: missing \"node\"");
      spec.node = node_at(a.at("node"), "adversary");
      const std::string where = "adversary " + to_string(spec.node);
      if (!a.contains("behaviors") || !a.at("behaviors").is_array()) {
        throw ConfigError(where + ": behaviors must be an array");
      }
      for (const auto& b : a.at("behaviors")) spec.behaviors.push_back(behavior_of(b, where));
      for (const auto& b : spec.behaviors) {
        if (const auto* eq = std::get_if<sim::adversary::EquivocatingProposer>(&b)) {
          for (NodeId id : eq->partition_a) {
            if (id.index >= total) throw ConfigError(where + ": partition names unknown node");
          }
        }
      }
      cfg.adversaries.push_back(std::move(spec));
    }
  }

  if (j.contains("injections")) {
    if (!j.at("injections").is_array()) throw ConfigError("injections must be an array");
    for (const auto& inj : j.at("injections")) {
      allow_keys(inj, {"time", "node", "value"}, "injection");
      sim::Injection in;
      in.time = get<Time>(inj, "time", "injection");
      if (!inj.contains("node")) throw ConfigError("injection: missing \"node\"");
      in.node = node_at(inj.at("node"), "injection");
      in.value = get<std::string>(inj, "value", "injection");
      if (in.time < 0) throw ConfigError("injection: time must be non-negative");
      if (in.node.index >= total) {
        throw ConfigError("injection: node " + to_string(in.node) + " does not exist");
      }
      if (cfg.horizon && in.time >= *cfg.horizon) {
        throw ConfigError("injection at " + std::to_string(in.time) + " is not before the horizon");
      }
      s.injections.push_back(std::move(in));
    }
  }

  if (j.contains("checks")) {
    s.checks = get<std::vector<std::string>>(j, "checks", "scenario");
    for (const auto& c : s.checks) {
      const auto& names = all_check_names();
      if (std::find(names.begin(), names.end(), c) == names.end()) {
        throw ConfigError("unknown check \"" + c + "\"");
      }
    }
  }

  if (s.auto_horizon) use_auto_horizon(s);
  cfg.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_scenario(j);
}

Scenario with_seed(const Scenario& s, std::uint64_t seed) {
  Scenario out = s;
  out.sim.seed = seed;
  if (s.gst_range) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const auto span = static_cast<std::uint64_t>(s.gst_range->second - s.gst_range->first) + 1;
    out.sim.params.gst = s.gst_range->first + static_cast<Time>(rng() % span);
  }
  if (out.auto_horizon) use_auto_horizon(out);
  return out;
}

void use_auto_horizon(Scenario& s) {
  auto& cfg = s.sim;
  std::set<NodeId> faulty;
  for (const auto& a : cfg.adversaries) faulty.insert(a.node);
  std::map<NodeId, std::uint64_t> per_node;
  Time last = 0;
  for (const auto& in : s.injections) {
    if (in.node.index >= cfg.params.n || faulty.contains(in.node)) continue;
    ++per_node[in.node];
    last = std::max(last, in.time);
  }
  std::uint64_t k = 0;
  for (const auto& [id, c] : per_node) k = std::max(k, c);
  const Time base = std::max(last, cfg.params.gst);
  const std::size_t cycle = s.schedule.order().size();
  const Time Delta = cfg.params.subproto_delay;
  cfg.horizon.reset();
  cfg.horizon_anchor = last;
  cfg.horizon_policy = [base, k, cycle, Delta](Round current) {
    return liveness_bound(base, current, k, cycle, Delta);
  };
}

Trace run_scenario(const Scenario& s) {
  return sim::run(s.sim, s.schedule, s.injections);
}

std::vector<CheckReport> check_trace(const Trace& trace, const Scenario& s) {
  const auto& h = trace.header;
  if (h.params != s.sim.params && !s.gst_range) {
    throw ConfigError("trace parameters do not match the scenario");
  }
  if (h.params.n != s.sim.params.n || h.params.f != s.sim.params.f ||
      h.backend != s.sim.backend.kind) {
    throw ConfigError("trace does not belong to this scenario");
  }
  return run_checks(s.checks, trace);
}

}  // namespace abcast::harness
