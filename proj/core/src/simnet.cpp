#include "abcast/simnet.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <memory>
#include <queue>
#include <random>
#include <set>
#include <unordered_set>

#include "abcast/bracha.hpp"
#include "abcast/encoding.hpp"
#include "abcast/gossip_quorum.hpp"

namespace abcast::sim {

void SimConfig::validate() const {
  params.validate();
  if (pre_gst_max_delay < 1) throw ConfigError("pre_gst_max_delay must be at least 1");
  if (gossip_relay_latency < 0) throw ConfigError("gossip_relay_latency must be non-negative");
  if (horizon && *horizon < 0) throw ConfigError("horizon must be non-negative");
  if (!horizon && !horizon_policy) throw ConfigError("no horizon and no horizon policy");
  if (engine.spam_window && *engine.spam_window == 0) {
    throw ConfigError("spam window must be at least 1");
  }
  std::set<NodeId> seen;
  for (const auto& a : adversaries) {
    if (!params.is_validator(a.node)) {
      throw ConfigError("adversary " + to_string(a.node) + " is not a validator");
    }
    if (!seen.insert(a.node).second) {
      throw ConfigError("adversary " + to_string(a.node) + " listed twice");
    }
    for (const auto& b : a.behaviors) {
      if (const auto* s = std::get_if<adversary::Scripted>(&b)) {
        for (const auto& m : s->messages) {
          for (NodeId to : m.to) {
            if (to.index >= params.n + observers) {
              throw ConfigError("scripted message to unknown node " + to_string(to));
            }
          }
        }
      }
    }
  }
  if (seen.size() > params.f) {
    throw ConfigError(std::to_string(seen.size()) + " faulty nodes exceed f = " +
                      std::to_string(params.f));
  }
}

Time delivery_time(Time sent, Time gst, Time d_pre, Time d_post) {
  if (sent >= gst) return sent + d_post;
  return std::min(sent + d_pre, gst + d_post);
}

namespace {

namespace ev {
struct Start {};
struct Delivery {
  NodeId from;
  Message msg;
  bool gossip;
  std::uint64_t send_index;
};
struct Relay {
  NodeId from;
  Message msg;
};
struct TimerFire {
  std::uint64_t generation;
};
struct Inject {
  Value value;
};
struct Wakeup {};
struct Crash {};
struct Script {
  adversary::ScriptedMessage msg;
};
}  // namespace ev

using Body = std::variant<ev::Start, ev::Delivery, ev::Relay, ev::TimerFire, ev::Inject,
                          ev::Wakeup, ev::Crash, ev::Script>;

struct Pending {
  Time time;
  std::uint64_t seq;
  NodeId node;
  Body body;
};

struct Later {
  bool operator()(const Pending& a, const Pending& b) const {
    return std::tie(a.time, a.seq) > std::tie(b.time, b.seq);
  }
};

struct Node {
  NodeId id;
  std::unique_ptr<InstanceTable> table;
  std::unique_ptr<Engine> engine;
  std::optional<AdversaryDriver> adversary;
  bool crashed = false;
  std::unordered_set<std::string> gossip_seen;
  std::multimap<Round, std::pair<NodeId, Message>> held;
  Round reported_current = 0;
  std::uint64_t synthetic = 0;
  /// Initials an equivocating node rewrote on the way out; it accepts them
  /// itself once the current event is handled.
  std::vector<Message> own_rewrites;
};

class Simulator {
 public:
  Simulator(const SimConfig& config, const LeaderSchedule& schedule)
      : config_(config), schedule_(schedule), rng_(config.seed) {
    config_.validate();
    const std::uint32_t total = config_.params.n + config_.observers;

    std::set<NodeId> faulty;
    for (const auto& a : config_.adversaries) faulty.insert(a.node);
    auto scheme = std::make_shared<gossip::SimSignatureScheme>(total, config_.seed);
    keyring_.emplace(scheme, faulty);

    for (std::uint32_t i = 0; i < total; ++i) {
      const NodeId id{i};
      Node node;
      node.id = id;
      std::unique_ptr<Backend> backend;
      if (config_.backend.kind == BackendKind::bracha) {
        backend = std::make_unique<bracha::BrachaBackend>(config_.params, schedule_, id);
      } else {
        std::optional<gossip::Signer> signer;
        if (config_.params.is_validator(id)) signer = keyring_->own_signer(id);
        backend = std::make_unique<gossip::GossipBackend>(
            config_.params, schedule_, id, config_.backend.digest_mode, scheme, signer);
      }
      node.table = std::make_unique<InstanceTable>(id, config_.params, schedule_, std::move(backend));
      node.engine = std::make_unique<Engine>(config_.params, schedule_, id, config_.engine);
      nodes_.push_back(std::move(node));
    }
    for (const auto& a : config_.adversaries) {
      std::optional<gossip::Signer> signer;
      if (config_.backend.kind == BackendKind::gossip) signer = keyring_->own_signer(a.node);
      nodes_[a.node.index].adversary.emplace(a.node, total, a.behaviors, schedule_, signer);
    }

    trace_.header.params = config_.params;
    trace_.header.observers = config_.observers;
    trace_.header.seed = config_.seed;
    trace_.header.pre_gst_max_delay = config_.pre_gst_max_delay;
    trace_.header.gossip_relay_latency = config_.gossip_relay_latency;
    trace_.header.backend = config_.backend.kind;
    trace_.header.digest_mode = config_.backend.digest_mode;
    trace_.header.leader_order = schedule_.order();
    trace_.header.faulty = faulty;
    trace_.header.start_time = config_.engine.start_time;
  }

  Trace run(std::span<const Injection> injections) {
    for (auto& node : nodes_) push(0, node.id, ev::Start{});
    for (const auto& inj : injections) {
      if (inj.node.index >= nodes_.size()) {
        throw ConfigError("injection at unknown node " + to_string(inj.node));
      }
      if (inj.time < 0) throw ConfigError("injection time must be non-negative");
      push(inj.time, inj.node, ev::Inject{inj.value});
    }
    for (auto& node : nodes_) {
      if (!node.adversary) continue;
      if (auto at = node.adversary->crash_time()) push(*at, node.id, ev::Crash{});
      for (auto& m : node.adversary->scripted()) push(m.time, node.id, ev::Script{m});
    }

    std::optional<Time> horizon = config_.horizon;
    const Time decide_after = std::max(config_.params.gst, config_.horizon_anchor);
    while (!queue_.empty()) {
      const Time next = queue_.top().time;
      if (!horizon && next > decide_after) horizon = config_.horizon_policy(max_current());
      if (horizon && next > *horizon) break;
      Pending p = queue_.top();
      queue_.pop();
      now_ = p.time;
      handle(p);
    }
    if (!horizon) horizon = config_.horizon_policy(max_current());
    trace_.header.horizon = *horizon;
    return std::move(trace_);
  }

 private:
  void push(Time t, NodeId node, Body body) {
    queue_.push(Pending{t, seq_++, node, std::move(body)});
  }

  Round max_current() const {
    Round best = 0;
    for (const auto& n : nodes_) {
      if (!n.adversary) best = std::max(best, n.engine->current());
    }
    return best;
  }

  TraceEvent& log(EventKind kind, NodeId node) {
    TraceEvent e;
    e.index = trace_.events.size();
    e.time = now_;
    e.kind = kind;
    e.node = node;
    trace_.events.push_back(std::move(e));
    return trace_.events.back();
  }

  Time draw_delay() {
    const Time d_pre =
        1 + static_cast<Time>(rng_() % static_cast<std::uint64_t>(config_.pre_gst_max_delay));
    const Time delta = config_.params.delta;
    const Time drawn = 1 + static_cast<Time>(rng_() % static_cast<std::uint64_t>(delta));
    const Time d_post = config_.delay_law == DelayLaw::fixed ? delta : drawn;
    return delivery_time(now_, config_.params.gst, d_pre, d_post);
  }

  void send_direct(NodeId from, NodeId to, const Message& msg, bool gossip) {
    const Time due = draw_delay();
    auto& e = log(EventKind::send, from);
    e.peer = to;
    e.due = due;
    e.message = describe(msg, gossip);
    push(due, to, ev::Delivery{from, msg, gossip, e.index});
  }

  void dispatch(Node& node, const Outgoing& out) {
    std::vector<Outgoing> outs;
    if (node.adversary) {
      outs = node.adversary->transform(out);
    } else {
      outs.push_back(out);
    }
    for (const auto& o : outs) {
      if (const auto* sm = std::get_if<SignedMsg>(&o.msg);
          node.adversary && sm && sm->kind == SignedMsg::Kind::initial && o.msg != out.msg) {
        node.own_rewrites.push_back(o.msg);
      }
      const bool gossip = std::holds_alternative<SignedMsg>(o.msg);
      if (gossip) node.gossip_seen.insert(encode(o.msg));
      if (o.mode == Dissemination::to) {
        for (NodeId to : o.recipients) {
          if (to != node.id) send_direct(node.id, to, o.msg, gossip);
        }
      } else {
        for (const auto& peer : nodes_) {
          if (peer.id != node.id) send_direct(node.id, peer.id, o.msg, gossip);
        }
      }
    }
  }

  void process_effects(Node& node, Effects effects, std::deque<EngineAction>& work) {
    for (const auto& s : effects.sends) dispatch(node, s);
    for (const auto& o : effects.outputs) {
      if (!node.table->record_output(o.key, o.value)) continue;
      auto& e = log(EventKind::subproto_output, node.id);
      e.instance = o.key;
      e.value = o.value;
      auto actions = node.engine->on_subproto_output(o.key, o.value, now_);
      work.insert(work.end(), actions.begin(), actions.end());
    }
  }

  void run_actions(Node& node, EngineActions actions) {
    std::deque<EngineAction> work(actions.begin(), actions.end());
    while (!work.empty()) {
      EngineAction a = std::move(work.front());
      work.pop_front();
      if (const auto* t = std::get_if<action::RestartTimer>(&a)) {
        auto& e = log(EventKind::timer_set, node.id);
        e.due = now_ + t->delay;
        e.generation = t->generation;
        push(now_ + t->delay, node.id, ev::TimerFire{t->generation});
      } else if (const auto* rb = std::get_if<action::InputRb>(&a)) {
        submit(node, rb_key(rb->round), rb->proposal, work);
      } else if (const auto* wba = std::get_if<action::InputWba>(&a)) {
        submit(node, wba_key(wba->round), wba->bit, work);
      } else if (const auto* d = std::get_if<action::Deliver>(&a)) {
        auto& e = log(EventKind::ab_output, node.id);
        e.round = d->round;
        e.payload = d->value;
      } else if (const auto* w = std::get_if<action::Wakeup>(&a)) {
        push(w->at, node.id, ev::Wakeup{});
      }
    }
    if (node.engine->current() != node.reported_current) {
      node.reported_current = node.engine->current();
      log(EventKind::advance, node.id).round = node.reported_current;
      release_held(node);
    }
  }

  void submit(Node& node, const InstanceKey& key, const SubprotoValue& value,
              std::deque<EngineAction>& work) {
    if (node.table->input_made(key)) return;
    Effects effects = node.table->submit_input(key, value);
    if (!node.table->input_made(key)) return;
    auto& e = log(EventKind::subproto_input, node.id);
    e.instance = key;
    e.value = value;
    process_effects(node, std::move(effects), work);
  }

  bool beyond_window(const Node& node, const Message& msg) const {
    const auto& w = config_.engine.spam_window;
    return w && instance_of(msg).round > node.engine->current() + *w;
  }

  void feed(Node& node, const Message& msg) {
    std::deque<EngineAction> work;
    process_effects(node, node.table->deliver(msg), work);
    run_actions(node, EngineActions(work.begin(), work.end()));
  }

  void accept_own_rewrites(Node& node) {
    while (!node.own_rewrites.empty()) {
      Message msg = std::move(node.own_rewrites.front());
      node.own_rewrites.erase(node.own_rewrites.begin());
      feed(node, msg);
    }
  }

  void release_held(Node& node) {
    while (!node.held.empty() && !beyond_window(node, node.held.begin()->second.second)) {
      Message msg = std::move(node.held.begin()->second.second);
      node.held.erase(node.held.begin());
      feed(node, msg);
    }
  }

  void top_up_equivocator(Node& node) {
    if (!node.adversary || !node.adversary->equivocates()) return;
    if (node.engine->inputs().empty()) {
      node.engine->on_input("byz" + std::to_string(node.id.index) + "." +
                            std::to_string(node.synthetic++));
    }
  }

  void handle(const Pending& p) {
    Node& node = nodes_[p.node.index];
    if (const auto* d = std::get_if<ev::Delivery>(&p.body)) {
      on_delivery(node, *d);
      return;
    }
    if (node.crashed) return;
    top_up_equivocator(node);

    std::visit(
        [&](const auto& body) {
          using T = std::decay_t<decltype(body)>;
          if constexpr (std::is_same_v<T, ev::Start>) {
            run_actions(node, node.engine->start(now_));
          } else if constexpr (std::is_same_v<T, ev::Relay>) {
            for (const auto& peer : nodes_) {
              if (peer.id != node.id && peer.id != body.from) {
                send_direct(node.id, peer.id, body.msg, true);
              }
            }
          } else if constexpr (std::is_same_v<T, ev::TimerFire>) {
            log(EventKind::timer_fire, node.id).generation = body.generation;
            run_actions(node, node.engine->on_timeout(body.generation, now_));
          } else if constexpr (std::is_same_v<T, ev::Inject>) {
            log(EventKind::injection, node.id).payload = body.value;
            node.engine->on_input(body.value);
            run_actions(node, node.engine->evaluate(now_));
          } else if constexpr (std::is_same_v<T, ev::Wakeup>) {
            run_actions(node, node.engine->evaluate(now_));
          } else if constexpr (std::is_same_v<T, ev::Crash>) {
            node.crashed = true;
            log(EventKind::crash, node.id);
          } else if constexpr (std::is_same_v<T, ev::Script>) {
            send_scripted(node, body.msg);
          }
        },
        p.body);
    accept_own_rewrites(node);
  }

  void on_delivery(Node& node, const ev::Delivery& d) {
    auto drop = [&](const char* why) {
      auto& e = log(EventKind::drop, node.id);
      e.peer = d.from;
      e.message = describe(d.msg, d.gossip);
      e.note = why;
    };
    if (node.crashed) return drop("crashed");
    if (d.gossip) {
      if (!node.gossip_seen.insert(encode(d.msg)).second) return drop("duplicate");
      if (!gossip::verify(keyring_->scheme(), std::get<SignedMsg>(d.msg))) {
        return drop("bad_signature");
      }
    }
    auto& e = log(EventKind::deliver, node.id);
    e.peer = d.from;
    e.message = describe(d.msg, d.gossip);
    if (d.gossip && !node.adversary) {
      if (config_.gossip_relay_latency == 0) {
        for (const auto& peer : nodes_) {
          if (peer.id != node.id && peer.id != d.from) send_direct(node.id, peer.id, d.msg, true);
        }
      } else {
        push(now_ + config_.gossip_relay_latency, node.id, ev::Relay{d.from, d.msg});
      }
    }
    if (const auto* sm = std::get_if<SignedMsg>(&d.msg); sm && sm->signer == node.id) return;
    top_up_equivocator(node);
    if (beyond_window(node, d.msg)) {
      trace_.events.back().note = "held";
      node.held.emplace(instance_of(d.msg).round, std::make_pair(d.from, d.msg));
      return;
    }
    feed(node, d.msg);
    accept_own_rewrites(node);
  }

  void send_scripted(Node& node, const adversary::ScriptedMessage& m) {
    const InstanceKey key{std::holds_alternative<Bit>(m.payload) ? InstanceKind::wba
                                                                 : InstanceKind::rb,
                          m.round};
    Message msg;
    if (config_.backend.kind == BackendKind::bracha) {
      msg = BrachaMsg{bracha_kind_from_string(m.kind), key, node.id, m.payload};
    } else {
      SignedMsg::Payload payload;
      if (const auto* bit = std::get_if<Bit>(&m.payload)) {
        payload = *bit;
      } else if (m.digest) {
        payload = gossip::digest(std::get<Proposal>(m.payload));
      } else {
        payload = std::get<Proposal>(m.payload);
      }
      const auto kind = signed_kind_from_string(m.kind);
      const NodeId as = m.signer.value_or(node.id);
      if (auto signer = keyring_->adversary_signer(node.id, as)) {
        msg = gossip::make_signed(kind, key, payload, *signer);
      } else {
        auto& e = log(EventKind::forge_rejected, node.id);
        e.peer = as;
        e.instance = key;
        SignedMsg bogus;
        bogus.kind = kind;
        bogus.instance = key;
        bogus.payload = payload;
        bogus.signer = as;
        bogus.sig = Signature{as, Digest{}};
        msg = bogus;
      }
    }
    Outgoing out{msg, m.to.empty() ? Dissemination::all : Dissemination::to, m.to};
    const bool gossip = std::holds_alternative<SignedMsg>(msg);
    if (gossip) node.gossip_seen.insert(encode(msg));
    if (out.mode == Dissemination::to) {
      for (NodeId to : out.recipients) {
        if (to != node.id) send_direct(node.id, to, msg, gossip);
      }
    } else {
      for (const auto& peer : nodes_) {
        if (peer.id != node.id) send_direct(node.id, peer.id, msg, gossip);
      }
    }
  }

  SimConfig config_;
  LeaderSchedule schedule_;
  std::mt19937_64 rng_;
  std::optional<gossip::KeyRing> keyring_;
  std::vector<Node> nodes_;
  std::priority_queue<Pending, std::vector<Pending>, Later> queue_;
  std::uint64_t seq_ = 0;
  Time now_ = 0;
  Trace trace_;
};

}  // namespace

Trace run(const SimConfig& config, const LeaderSchedule& schedule,
          std::span<const Injection> injections) {
  Simulator sim(config, schedule);
  return sim.run(injections);
}

}  // namespace abcast::sim
