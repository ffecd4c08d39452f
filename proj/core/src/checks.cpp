#include "abcast/checks.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace abcast::harness {

namespace {

using json = nlohmann::json;

struct Checker {
  CheckReport report;

  explicit Checker(std::string name, const Trace& trace) {
    report.name = std::move(name);
    report.seed = trace.header.seed;
  }

  void fail(std::uint64_t index, std::string message) {
    if (report.status == Status::fail) return;
    report.status = Status::fail;
    report.first_violation = index;
    report.message = std::move(message);
  }

  void inconclusive(std::string message) {
    if (report.status == Status::fail) return;
    report.status = Status::inconclusive;
    report.message = std::move(message);
  }

  void measure_max(const std::string& key, std::int64_t v) {
    auto [it, fresh] = report.measures.emplace(key, v);
    if (!fresh) it->second = std::max(it->second, v);
  }

  CheckReport done(std::string pass_message = {}) {
    if (report.status == Status::pass && report.message.empty()) {
      report.message = std::move(pass_message);
    }
    return std::move(report);
  }
};

bool is_correct(const TraceHeader& h, NodeId id) {
  return id.index < h.node_count() && h.is_correct(id);
}

bool is_correct_validator(const TraceHeader& h, NodeId id) {
  return id.index < h.params.n && h.is_correct(id);
}

std::string node_str(NodeId id) { return to_string(id); }

Time after_gst(const TraceHeader& h, Time t) { return std::max(t, h.params.gst); }

/// Latest `advance` round per node up to and including time `t`.
std::map<NodeId, Round> currents_at(const Trace& trace, Time t) {
  std::map<NodeId, Round> cur;
  for (const auto& e : trace.events) {
    if (e.time > t) break;
    if (e.kind == EventKind::advance && e.round) cur[e.node] = *e.round;
  }
  return cur;
}

struct Record {
  SubprotoValue value;
  std::uint64_t index;
  Time time;
};

/// Per-instance inputs and outputs of correct nodes.
struct InstanceRecords {
  std::map<NodeId, Record> inputs;
  std::map<NodeId, Record> outputs;
};

std::map<InstanceKey, InstanceRecords> collect_instances(const Trace& trace, InstanceKind kind) {
  std::map<InstanceKey, InstanceRecords> out;
  for (const auto& e : trace.events) {
    if (!e.instance || e.instance->kind != kind || !e.value) continue;
    if (!is_correct(trace.header, e.node)) continue;
    if (e.kind == EventKind::subproto_input) {
      out[*e.instance].inputs.emplace(e.node, Record{*e.value, e.index, e.time});
    } else if (e.kind == EventKind::subproto_output) {
      out[*e.instance].outputs.emplace(e.node, Record{*e.value, e.index, e.time});
    }
  }
  return out;
}

/// Delay clauses: every correct node outputs by `deadline` (when it is
/// within the horizon) and, if `strict`, no later than it.
void require_all_output(Checker& c, const Trace& trace, const InstanceKey& key,
                        const InstanceRecords& rec, Time eventual_deadline, Time strict_deadline,
                        bool strict, const std::string& why, std::uint64_t anchor_index) {
  const Time horizon = trace.header.horizon;
  for (NodeId id : trace.correct_nodes()) {
    auto it = rec.outputs.find(id);
    if (it == rec.outputs.end()) {
      if (eventual_deadline <= horizon) {
        c.fail(anchor_index, to_string(key) + ": " + node_str(id) + " never outputs although " + why);
      }
      continue;
    }
    if (strict && strict_deadline <= horizon && it->second.time > strict_deadline) {
      c.fail(it->second.index, to_string(key) + ": " + node_str(id) + " outputs at " +
                                   std::to_string(it->second.time) + ", after deadline " +
                                   std::to_string(strict_deadline) + " (" + why + ")");
    }
  }
}

}  // namespace

std::string to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::inconclusive: return "inconclusive";
  }
  return "?";
}

json to_json(const CheckReport& r) {
  json j = {{"name", r.name}, {"status", to_string(r.status)}, {"seed", r.seed}};
  if (!r.message.empty()) j["message"] = r.message;
  if (r.first_violation) j["first_violation"] = *r.first_violation;
  if (!r.measures.empty()) j["measures"] = r.measures;
  return j;
}

Time backend_rb_delay(const TraceHeader& h) {
  const Time d = h.params.delta;
  if (h.backend == BackendKind::bracha) return 3 * d;
  return std::max(2 * d, d + h.gossip_relay_latency);
}

Time backend_wba_delay(const TraceHeader& h) {
  const Time d = h.params.delta;
  if (h.backend == BackendKind::bracha) return 2 * d;
  return d + h.gossip_relay_latency;
}

CheckReport check_safety(const Trace& trace) {
  Checker c("safety", trace);
  std::map<NodeId, std::vector<Value>> seq;
  std::map<NodeId, std::set<Value>> seen;
  std::vector<std::pair<Time, Time>> spread;  // first/last delivery time per position
  for (const auto& e : trace.events) {
    if (e.kind != EventKind::ab_output || !is_correct(trace.header, e.node) || !e.payload) continue;
    auto& mine = seq[e.node];
    const std::size_t k = mine.size();
    if (!seen[e.node].insert(*e.payload).second) {
      c.fail(e.index, node_str(e.node) + " outputs " + *e.payload + " twice");
    }
    for (const auto& [other, theirs] : seq) {
      if (other == e.node || theirs.size() <= k) continue;
      if (theirs[k] != *e.payload) {
        c.fail(e.index, "output #" + std::to_string(k) + ": " + node_str(e.node) + " has " +
                            *e.payload + " but " + node_str(other) + " has " + theirs[k]);
      }
    }
    mine.push_back(*e.payload);
    if (spread.size() <= k) spread.emplace_back(e.time, e.time);
    spread[k].second = std::max(spread[k].second, e.time);
  }
  std::int64_t lo = -1, hi = 0;
  for (NodeId id : trace.correct_nodes()) {
    const auto n = static_cast<std::int64_t>(seq[id].size());
    lo = lo < 0 ? n : std::min(lo, n);
    hi = std::max(hi, n);
  }
  c.report.measures["outputs_min"] = std::max<std::int64_t>(lo, 0);
  c.report.measures["outputs_max"] = hi;
  std::int64_t max_spread = 0;
  for (const auto& [first, last] : spread) max_spread = std::max(max_spread, last - first);
  c.report.measures["max_finality_spread"] = max_spread;
  return c.done("delivered sequences are prefix-comparable");
}

std::optional<Time> required_liveness_horizon(const Trace& trace) {
  const auto& h = trace.header;
  std::optional<Time> last;
  std::map<NodeId, std::uint64_t> per_node;
  for (const auto& e : trace.events) {
    if (e.kind != EventKind::injection || !is_correct_validator(h, e.node)) continue;
    last = std::max(last.value_or(e.time), e.time);
    ++per_node[e.node];
  }
  if (!last) return std::nullopt;
  std::uint64_t k = 0;
  for (const auto& [id, count] : per_node) k = std::max(k, count);
  const Time base = after_gst(h, *last);
  Round r = 0;
  for (const auto& [id, cur] : currents_at(trace, base)) {
    if (is_correct(h, id)) r = std::max(r, cur);
  }
  return liveness_bound(base, r, k, h.leader_order.size(), h.params.subproto_delay);
}

Time liveness_bound(Time base, Round current, std::uint64_t per_proposer, std::size_t cycle,
                    Time subproto_delay) {
  const std::uint64_t slots = std::max<std::uint64_t>(2, per_proposer + 1);
  const auto rounds = static_cast<Time>(current + slots * cycle + 1);
  return base + 3 * rounds * subproto_delay + 2 * subproto_delay;
}

CheckReport check_liveness(const Trace& trace) {
  Checker c("liveness", trace);
  const auto& h = trace.header;
  struct Obligation {
    Value value;
    Time time;
    std::uint64_t index;
  };
  std::vector<Obligation> obligations;
  std::map<NodeId, std::map<Value, Time>> delivered;
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::injection && is_correct_validator(h, e.node) && e.payload) {
      obligations.push_back({*e.payload, e.time, e.index});
    } else if (e.kind == EventKind::ab_output && is_correct(h, e.node) && e.payload) {
      delivered[e.node].emplace(*e.payload, e.time);
    }
  }
  if (obligations.empty()) return c.done("no values injected into correct validators");
  const auto required = required_liveness_horizon(trace);
  c.report.measures["required_horizon"] = *required;
  c.report.measures["horizon"] = h.horizon;
  if (h.horizon < *required) {
    c.inconclusive("horizon " + std::to_string(h.horizon) + " is below the bound " +
                   std::to_string(*required));
    return c.done();
  }
  for (const auto& ob : obligations) {
    Time latest = ob.time;
    for (NodeId id : trace.correct_nodes()) {
      auto it = delivered[id].find(ob.value);
      if (it == delivered[id].end()) {
        c.fail(ob.index, "value " + ob.value + " injected at " + std::to_string(ob.time) +
                             " never delivered by " + node_str(id));
        continue;
      }
      latest = std::max(latest, it->second);
    }
    c.measure_max("max_latency", latest - ob.time);
  }
  return c.done("every injected value delivered by every correct node");
}

CheckReport check_wba_contract(const Trace& trace) {
  Checker c("wba_contract", trace);
  const auto& h = trace.header;
  const std::uint32_t q = h.params.quorum();
  const std::uint32_t validity_threshold = q - h.params.f;
  const Time eff = backend_wba_delay(h);
  const bool strict = h.params.subproto_delay >= eff;
  const Time Delta = h.params.subproto_delay;

  for (const auto& [key, rec] : collect_instances(trace, InstanceKind::wba)) {
    std::vector<Record> outs;
    for (const auto& [id, r] : rec.outputs) outs.push_back(r);
    std::sort(outs.begin(), outs.end(), [](const Record& a, const Record& b) { return a.index < b.index; });

    for (const auto& o : outs) {
      if (o.value != outs.front().value) {
        c.fail(o.index, to_string(key) + ": correct nodes output both 0 and 1");
      }
      std::uint32_t support = 0;
      for (const auto& [id, in] : rec.inputs) {
        if (is_correct_validator(h, id) && in.value == o.value && in.index < o.index) ++support;
      }
      if (support < validity_threshold) {
        c.fail(o.index, to_string(key) + ": output " + to_string(o.value) + " backed by only " +
                            std::to_string(support) + " correct inputs, need " +
                            std::to_string(validity_threshold));
      }
    }

    for (Bit b : {Bit::zero, Bit::one}) {
      std::vector<Record> backing;
      for (const auto& [id, in] : rec.inputs) {
        if (is_correct_validator(h, id) && in.value == SubprotoValue{b}) backing.push_back(in);
      }
      if (backing.size() < q) continue;
      std::sort(backing.begin(), backing.end(),
                [](const Record& x, const Record& y) { return x.index < y.index; });
      const Record& qth = backing[q - 1];
      const Time start = after_gst(h, qth.time);
      require_all_output(c, trace, key, rec, start + eff, start + Delta, strict,
                         "a quorum of correct validators input " + std::to_string(to_int(b)),
                         qth.index);
      for (const auto& o : outs) {
        if (o.value == SubprotoValue{b} && o.time >= start) {
          c.measure_max("max_input_latency", o.time - start);
        }
      }
    }

    if (!outs.empty()) {
      const Time start = after_gst(h, outs.front().time);
      require_all_output(c, trace, key, rec, start + eff, start + Delta, strict,
                         "another correct node output", outs.front().index);
      for (const auto& o : outs) c.measure_max("max_output_spread", o.time - outs.front().time);
    }
  }
  if (!strict && c.report.status == Status::pass) {
    c.report.message = "delay clauses skipped: Delta below backend delay " + std::to_string(eff);
  }
  return c.done("agreement, validity and termination hold for every WBA instance");
}

CheckReport check_rb_contract(const Trace& trace) {
  Checker c("rb_contract", trace);
  const auto& h = trace.header;
  const Time eff = backend_rb_delay(h);
  const bool strict = h.params.subproto_delay >= eff;
  const Time Delta = h.params.subproto_delay;

  for (const auto& [key, rec] : collect_instances(trace, InstanceKind::rb)) {
    std::vector<Record> outs;
    for (const auto& [id, r] : rec.outputs) outs.push_back(r);
    std::sort(outs.begin(), outs.end(), [](const Record& a, const Record& b) { return a.index < b.index; });
    for (const auto& o : outs) {
      if (o.value != outs.front().value) {
        c.fail(o.index, to_string(key) + ": correct nodes output " + to_string(outs.front().value) +
                            " and " + to_string(o.value));
      }
    }

    const NodeId proposer = trace.leader_of(key.round);
    auto in = rec.inputs.find(proposer);
    if (in != rec.inputs.end() && is_correct_validator(h, proposer)) {
      for (const auto& o : outs) {
        if (o.value != in->second.value) {
          c.fail(o.index, to_string(key) + ": output differs from the correct proposer's input");
        }
      }
      const Time start = after_gst(h, in->second.time);
      require_all_output(c, trace, key, rec, start + eff, start + Delta, strict,
                         "its proposer is correct", in->second.index);
      for (const auto& o : outs) {
        if (o.time >= start) c.measure_max("max_input_latency", o.time - start);
      }
    }

    if (!outs.empty()) {
      const Time start = after_gst(h, outs.front().time);
      require_all_output(c, trace, key, rec, start + eff, start + Delta, strict,
                         "another correct node output", outs.front().index);
      for (const auto& o : outs) c.measure_max("max_output_spread", o.time - outs.front().time);
    }
  }
  if (!strict && c.report.status == Status::pass) {
    c.report.message = "delay clauses skipped: Delta below backend delay " + std::to_string(eff);
  }
  return c.done("agreement and weak termination hold for every RB instance");
}

CheckReport check_round_advance(const Trace& trace) {
  Checker c("round_advance", trace);
  const auto& h = trace.header;
  const Time eff = std::max(backend_rb_delay(h), backend_wba_delay(h));
  if (h.params.subproto_delay < eff) {
    c.inconclusive("Delta " + std::to_string(h.params.subproto_delay) +
                   " is below the backend delay " + std::to_string(eff));
    return c.done();
  }
  if (h.start_time && *h.start_time > h.params.gst) {
    c.inconclusive("nodes start after GST");
    return c.done();
  }
  const Time step = 3 * h.params.subproto_delay;
  const auto correct = trace.correct_nodes();
  std::map<NodeId, Round> cur;
  std::size_t pos = 0;
  Round r = 0;
  for (; h.params.gst + static_cast<Time>(r) * step <= h.horizon; ++r) {
    const Time t = h.params.gst + static_cast<Time>(r) * step;
    while (pos < trace.events.size() && trace.events[pos].time <= t) {
      const auto& e = trace.events[pos++];
      if (e.kind == EventKind::advance && e.round) cur[e.node] = *e.round;
    }
    for (NodeId id : correct) {
      const Round have = cur.count(id) ? cur[id] : 0;
      if (have < r) {
        c.fail(pos, node_str(id) + " is in round " + std::to_string(have) + " at time " +
                        std::to_string(t) + ", expected at least " + std::to_string(r));
      }
    }
  }
  c.report.measures["rounds_checked"] = static_cast<std::int64_t>(r);
  return c.done("every correct node reaches round r by gst + 3r*Delta");
}

CheckReport check_finalization_order(const Trace& trace) {
  Checker c("finalization_order", trace);
  std::map<NodeId, std::map<Round, Proposal>> rb;
  std::map<NodeId, OptionalRound> last;
  for (const auto& e : trace.events) {
    if (!is_correct(trace.header, e.node)) continue;
    if (e.kind == EventKind::subproto_output && e.instance && e.instance->kind == InstanceKind::rb &&
        e.value) {
      if (const auto* p = std::get_if<Proposal>(&*e.value)) rb[e.node][e.instance->round] = *p;
      continue;
    }
    if (e.kind != EventKind::ab_output || !e.round || !e.payload) continue;
    const Round r = *e.round;
    auto it = rb[e.node].find(r);
    if (it == rb[e.node].end() || it->second.value != *e.payload) {
      c.fail(e.index, node_str(e.node) + " finalizes round " + std::to_string(r) +
                          " without a matching RB output");
      continue;
    }
    const OptionalRound prev = last[e.node];
    if (prev && r <= *prev) {
      c.fail(e.index, node_str(e.node) + " finalizes round " + std::to_string(r) + " after round " +
                          std::to_string(*prev));
    } else if (it->second.parent != prev) {
      c.fail(e.index, node_str(e.node) + " finalizes round " + std::to_string(r) +
                          " whose parent is not the previously finalized round");
    }
    last[e.node] = r;
  }
  return c.done("finalized rounds form one parent chain per node");
}

CheckReport check_delivery(const Trace& trace) {
  Checker c("delivery", trace);
  const auto& h = trace.header;
  using Key = std::tuple<NodeId, NodeId, std::string, Time>;
  std::map<Key, std::vector<std::uint64_t>> pending;
  std::int64_t checked = 0;
  for (const auto& e : trace.events) {
    if (!e.message || !e.peer) continue;
    if (e.kind == EventKind::send) {
      if (!is_correct(h, e.node) || !is_correct(h, *e.peer) || !e.due) continue;
      const Time bound = after_gst(h, e.time) + h.params.delta;
      if (*e.due > bound) {
        c.fail(e.index, "message due at " + std::to_string(*e.due) + " exceeds max(t, gst) + delta = " +
                            std::to_string(bound));
      }
      if (e.time < h.params.gst && *e.due > e.time + h.pre_gst_max_delay) {
        c.fail(e.index, "pre-GST message exceeds pre_gst_max_delay");
      }
      pending[{*e.peer, e.node, e.message->id, *e.due}].push_back(e.index);
      ++checked;
    } else if (e.kind == EventKind::deliver || e.kind == EventKind::drop) {
      auto it = pending.find({e.node, *e.peer, e.message->id, e.time});
      if (it == pending.end()) continue;
      it->second.erase(it->second.begin());
      if (it->second.empty()) pending.erase(it);
    }
  }
  for (const auto& [key, sends] : pending) {
    if (std::get<3>(key) <= h.horizon) {
      c.fail(sends.front(), "message from " + node_str(std::get<1>(key)) + " to " +
                                node_str(std::get<0>(key)) + " due at " +
                                std::to_string(std::get<3>(key)) + " never delivered");
    }
  }
  c.report.measures["messages_checked"] = checked;
  return c.done("every correct-to-correct message delivered on time");
}

CheckReport check_gossip_signatures(const Trace& trace) {
  Checker c("gossip_signatures", trace);
  const auto& h = trace.header;
  std::set<std::pair<NodeId, std::string>> originated;
  std::int64_t checked = 0;
  for (const auto& e : trace.events) {
    if (!e.message || !e.message->gossip || !e.message->signer) continue;
    const NodeId signer = *e.message->signer;
    if (e.kind == EventKind::send && e.node == signer) {
      originated.emplace(signer, e.message->id);
      continue;
    }
    if (!is_correct_validator(h, signer) || !is_correct(h, e.node)) continue;
    const bool relayed = e.kind == EventKind::send;
    const bool accepted = e.kind == EventKind::deliver;
    if (!relayed && !accepted) continue;
    ++checked;
    if (!originated.contains({signer, e.message->id})) {
      c.fail(e.index, node_str(e.node) + (relayed ? " relays " : " accepts ") + e.message->kind +
                          " signed by " + node_str(signer) + " that its signer never sent");
    }
  }
  c.report.measures["messages_checked"] = checked;
  if (checked == 0 && c.report.status == Status::pass) return c.done("no gossip traffic");
  return c.done("no correct node accepts a forged signature");
}

CheckReport check_gossip_closure(const Trace& trace) {
  Checker c("gossip_closure", trace);
  const auto& h = trace.header;
  struct Seen {
    Time first = 0;
    std::uint64_t index = 0;
    std::set<NodeId> holders;
  };
  std::map<std::string, Seen> msgs;
  for (const auto& e : trace.events) {
    if (!e.message || !e.message->gossip || !is_correct(h, e.node)) continue;
    const bool holds = e.kind == EventKind::send ||
                       e.kind == EventKind::deliver ||
                       (e.kind == EventKind::drop && e.note == "duplicate");
    if (!holds) continue;
    auto [it, fresh] = msgs.try_emplace(e.message->id);
    if (fresh) {
      it->second.first = e.time;
      it->second.index = e.index;
    }
    it->second.holders.insert(e.node);
  }
  const auto correct = trace.correct_nodes();
  for (const auto& [id, seen] : msgs) {
    const Time deadline = std::max(seen.first + h.gossip_relay_latency, h.params.gst) + h.params.delta;
    if (deadline > h.horizon) continue;
    for (NodeId n : correct) {
      if (!seen.holders.contains(n)) {
        c.fail(seen.index, "gossip message " + id + " never reaches " + node_str(n));
        break;
      }
    }
  }
  c.report.measures["messages_checked"] = static_cast<std::int64_t>(msgs.size());
  if (msgs.empty() && c.report.status == Status::pass) return c.done("no gossip traffic");
  return c.done("every gossip message reaches all correct nodes");
}

const std::vector<std::string>& all_check_names() {
  static const std::vector<std::string> names = {
      "safety",           "liveness", "wba_contract",      "rb_contract",   "round_advance",
      "finalization_order", "delivery", "gossip_signatures", "gossip_closure",
  };
  return names;
}

CheckReport run_check(const std::string& name, const Trace& trace) {
  static const std::map<std::string, std::function<CheckReport(const Trace&)>> table = {
      {"safety", check_safety},
      {"liveness", check_liveness},
      {"wba_contract", check_wba_contract},
      {"rb_contract", check_rb_contract},
      {"round_advance", check_round_advance},
      {"finalization_order", check_finalization_order},
      {"delivery", check_delivery},
      {"gossip_signatures", check_gossip_signatures},
      {"gossip_closure", check_gossip_closure},
  };
  auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown check: " + name);
  return it->second(trace);
}

std::vector<CheckReport> run_checks(const std::vector<std::string>& names, const Trace& trace) {
  std::vector<CheckReport> out;
  for (const auto& n : names.empty() ? all_check_names() : names) out.push_back(run_check(n, trace));
  return out;
}

bool all_passed(const std::vector<CheckReport>& reports) {
  return std::none_of(reports.begin(), reports.end(), [](const CheckReport& r) { return r.failed(); });
}

}  // namespace abcast::harness
