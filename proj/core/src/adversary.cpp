#include "abcast/adversary.hpp"

#include <algorithm>

namespace abcast::sim {

namespace {

bool leads(const LeaderSchedule& s, NodeId self, const InstanceKey& k) {
  return k.kind == InstanceKind::rb && s.leader_of(k.round) == self;
}

Proposal tagged(const Proposal& p, const char* tag, Round r) {
  return Proposal{p.value + "|" + tag + "@" + std::to_string(r), p.parent, p.timestamp};
}

}  // namespace

BrachaMsg::Kind bracha_kind_from_string(const std::string& s) {
  if (s == "initial") return BrachaMsg::Kind::initial;
  if (s == "echo") return BrachaMsg::Kind::echo;
  if (s == "ready") return BrachaMsg::Kind::ready;
  if (s == "vote") return BrachaMsg::Kind::vote;
  throw ConfigError("unknown message kind: " + s);
}

SignedMsg::Kind signed_kind_from_string(const std::string& s) {
  if (s == "initial") return SignedMsg::Kind::initial;
  if (s == "echo") return SignedMsg::Kind::echo;
  if (s == "vote") return SignedMsg::Kind::vote;
  throw ConfigError("unknown gossip message kind: " + s);
}

AdversaryDriver::AdversaryDriver(NodeId self, std::uint32_t node_count,
                                 std::vector<AdversaryBehavior> behaviors, LeaderSchedule schedule,
                                 std::optional<gossip::Signer> signer)
    : self_(self),
      node_count_(node_count),
      behaviors_(std::move(behaviors)),
      schedule_(std::move(schedule)),
      signer_(std::move(signer)) {}

std::optional<Time> AdversaryDriver::crash_time() const {
  std::optional<Time> at;
  for (const auto& b : behaviors_) {
    if (const auto* c = std::get_if<adversary::Crash>(&b)) {
      if (!at || c->at < *at) at = c->at;
    }
  }
  return at;
}

bool AdversaryDriver::equivocates() const {
  return std::any_of(behaviors_.begin(), behaviors_.end(), [](const AdversaryBehavior& b) {
    return std::holds_alternative<adversary::EquivocatingProposer>(b);
  });
}

std::vector<adversary::ScriptedMessage> AdversaryDriver::scripted() const {
  std::vector<adversary::ScriptedMessage> out;
  for (const auto& b : behaviors_) {
    if (const auto* s = std::get_if<adversary::Scripted>(&b)) {
      out.insert(out.end(), s->messages.begin(), s->messages.end());
    }
  }
  return out;
}

std::vector<Outgoing> AdversaryDriver::transform(Outgoing out) {
  std::vector<Outgoing> current{std::move(out)};
  for (const auto& b : behaviors_) {
    std::vector<Outgoing> next;
    for (auto& o : current) {
      auto produced = apply(b, std::move(o));
      next.insert(next.end(), std::make_move_iterator(produced.begin()),
                  std::make_move_iterator(produced.end()));
    }
    current = std::move(next);
  }
  return current;
}

std::vector<NodeId> AdversaryDriver::targets(const Outgoing& out) const {
  if (out.mode == Dissemination::to) return out.recipients;
  std::vector<NodeId> all;
  for (std::uint32_t i = 0; i < node_count_; ++i) {
    if (NodeId{i} != self_) all.push_back(NodeId{i});
  }
  return all;
}

Outgoing AdversaryDriver::resign(Outgoing out, SignedMsg::Payload payload) const {
  auto& m = std::get<SignedMsg>(out.msg);
  if (signer_) {
    m = gossip::make_signed(m.kind, m.instance, std::move(payload), *signer_);
  } else {
    m.payload = std::move(payload);
  }
  return out;
}

std::vector<Outgoing> AdversaryDriver::apply(const AdversaryBehavior& b, Outgoing out) {
  const InstanceKey key = instance_of(out.msg);

  if (const auto* silent = std::get_if<adversary::SilentLeader>(&b)) {
    const bool initial = std::visit([](const auto& m) { return m.kind == std::decay_t<decltype(m)>::Kind::initial; },
                                    out.msg);
    const bool listed = silent->rounds.empty() ||
                        std::find(silent->rounds.begin(), silent->rounds.end(), key.round) !=
                            silent->rounds.end();
    if (initial && listed && leads(schedule_, self_, key)) return {};
    return {std::move(out)};
  }

  if (const auto* eq = std::get_if<adversary::EquivocatingProposer>(&b)) {
    if (!leads(schedule_, self_, key)) return {std::move(out)};
    if (const auto* sm = std::get_if<SignedMsg>(&out.msg)) {
      if (sm->kind == SignedMsg::Kind::initial) {
        own_proposals_[key.round] = std::get<Proposal>(sm->payload);
      }
    }
    std::vector<NodeId> a, rest;
    for (NodeId to : targets(out)) {
      const bool in_a = std::find(eq->partition_a.begin(), eq->partition_a.end(), to) !=
                        eq->partition_a.end();
      (in_a ? a : rest).push_back(to);
    }
    std::vector<Outgoing> produced;
    for (int side = 0; side < 2; ++side) {
      const auto& group = side == 0 ? a : rest;
      if (group.empty()) continue;
      const char* tag = side == 0 ? "A" : "B";
      Outgoing copy = out;
      copy.mode = Dissemination::to;
      copy.recipients = group;
      if (auto* bm = std::get_if<BrachaMsg>(&copy.msg)) {
        if (const auto* p = std::get_if<Proposal>(&bm->payload)) {
          bm->payload = tagged(*p, tag, key.round);
        }
        produced.push_back(std::move(copy));
        continue;
      }
      const auto& sm = std::get<SignedMsg>(copy.msg);
      if (const auto* p = std::get_if<Proposal>(&sm.payload)) {
        const Proposal t = tagged(*p, tag, key.round);
        produced.push_back(resign(std::move(copy), t));
      } else if (std::holds_alternative<Digest>(sm.payload)) {
        auto it = own_proposals_.find(key.round);
        if (it == own_proposals_.end()) {
          produced.push_back(std::move(copy));
        } else {
          const Digest d = gossip::digest(tagged(it->second, tag, key.round));
          produced.push_back(resign(std::move(copy), d));
        }
      } else {
        produced.push_back(std::move(copy));
      }
    }
    return produced;
  }

  if (const auto* flip_voter = std::get_if<adversary::FlipVoter>(&b)) {
    if (key.kind == InstanceKind::wba) {
      auto choose = [&](Bit own) {
        auto it = flip_voter->bits.find(key.round);
        return it != flip_voter->bits.end() ? it->second : flip(own);
      };
      if (auto* bm = std::get_if<BrachaMsg>(&out.msg)) {
        if (const auto* bit = std::get_if<Bit>(&bm->payload)) bm->payload = choose(*bit);
        return {std::move(out)};
      }
      const auto& sm = std::get<SignedMsg>(out.msg);
      if (const auto* bit = std::get_if<Bit>(&sm.payload)) {
        const Bit chosen = choose(*bit);
        return {resign(std::move(out), chosen)};
      }
      return {std::move(out)};
    }
    auto it = flip_voter->rb_values.find(key.round);
    if (it == flip_voter->rb_values.end()) return {std::move(out)};
    if (auto* bm = std::get_if<BrachaMsg>(&out.msg)) {
      if (bm->kind == BrachaMsg::Kind::echo || bm->kind == BrachaMsg::Kind::ready) {
        if (auto* p = std::get_if<Proposal>(&bm->payload)) p->value = it->second;
      }
      return {std::move(out)};
    }
    const auto& sm = std::get<SignedMsg>(out.msg);
    if (sm.kind != SignedMsg::Kind::echo) return {std::move(out)};
    if (const auto* p = std::get_if<Proposal>(&sm.payload)) {
      Proposal q = *p;
      q.value = it->second;
      return {resign(std::move(out), q)};
    }
    const Digest d = gossip::digest(Proposal{it->second, std::nullopt, 0});
    return {resign(std::move(out), d)};
  }

  return {std::move(out)};
}

}  // namespace abcast::sim
