#include "abcast/bracha.hpp"

namespace abcast::bracha {

namespace {

using Kind = BrachaMsg::Kind;

template <typename T>
std::size_t tally(const std::map<T, std::set<NodeId>>& m, const T& v) {
  auto it = m.find(v);
  return it == m.end() ? 0 : it->second.size();
}

bool sender_is_validator(const BrachaMsg& m, const Context& ctx) {
  return ctx.params.is_validator(m.sender);
}

}  // namespace

Step rb_step(RbState& state, const Event& event, const Context& ctx) {
  Step out;
  const InstanceKey key = rb_key(ctx.round);
  const bool validator = ctx.params.is_validator(ctx.self);
  const std::size_t quorum = ctx.params.quorum();
  const std::size_t amplify = ctx.params.f + 1;
  const std::size_t deliver = 2 * static_cast<std::size_t>(ctx.params.f) + 1;

  auto send = [&](Kind kind, const Proposal& v) {
    out.broadcasts.push_back(BrachaMsg{kind, key, ctx.self, v});
    if (kind == Kind::echo) state.echoes[v].insert(ctx.self);
    if (kind == Kind::ready) state.readies[v].insert(ctx.self);
  };

  Proposal v;
  if (const auto* in = std::get_if<LocalInput>(&event)) {
    const auto* p = std::get_if<Proposal>(&in->value);
    if (p == nullptr || ctx.self != ctx.proposer || state.sent_initial) {
      out.dropped = p == nullptr;
      return out;
    }
    state.sent_initial = true;
    v = *p;
    out.broadcasts.push_back(BrachaMsg{Kind::initial, key, ctx.self, v});
    if (!state.initial) state.initial = v;
  } else {
    const auto& m = std::get<BrachaMsg>(event);
    const auto* p = std::get_if<Proposal>(&m.payload);
    if (p == nullptr || m.instance != key || m.kind == Kind::vote) {
      out.dropped = true;
      return out;
    }
    v = *p;
    switch (m.kind) {
      case Kind::initial:
        if (m.sender != ctx.proposer) {
          out.dropped = true;
          return out;
        }
        // Only the first initial counts; a second one is proposer equivocation.
        if (state.initial) return out;
        state.initial = v;
        break;
      case Kind::echo:
      case Kind::ready:
        if (!sender_is_validator(m, ctx)) {
          out.dropped = true;
          return out;
        }
        (m.kind == Kind::echo ? state.echoes : state.readies)[v].insert(m.sender);
        break;
      case Kind::vote:
        break;
    }
  }

  // Sending one message can enable the next trigger through self-counting.
  for (bool changed = true; changed;) {
    changed = false;
    if (validator && !state.sent_echo &&
        ((state.initial && *state.initial == v) || tally(state.echoes, v) >= quorum ||
         tally(state.readies, v) >= amplify)) {
      state.sent_echo = true;
      send(Kind::echo, v);
      changed = true;
    }
    if (validator && !state.sent_ready &&
        (tally(state.echoes, v) >= quorum || tally(state.readies, v) >= amplify)) {
      state.sent_ready = true;
      send(Kind::ready, v);
      changed = true;
    }
    if (!state.delivered && tally(state.readies, v) >= deliver) {
      state.delivered = true;
      out.output = v;
      changed = true;
    }
  }
  return out;
}

Step wba_step(WbaState& state, const Event& event, const Context& ctx) {
  Step out;
  const InstanceKey key = wba_key(ctx.round);
  const bool validator = ctx.params.is_validator(ctx.self);
  const std::size_t quorum = ctx.params.quorum();
  const std::size_t amplify = ctx.params.f + 1;
  const std::size_t deliver = 2 * static_cast<std::size_t>(ctx.params.f) + 1;

  auto send = [&](Kind kind, Bit b) {
    out.broadcasts.push_back(BrachaMsg{kind, key, ctx.self, b});
    (kind == Kind::vote ? state.votes : state.readies)[b].insert(ctx.self);
  };

  Bit b{};
  if (const auto* in = std::get_if<LocalInput>(&event)) {
    const auto* bit = std::get_if<Bit>(&in->value);
    if (bit == nullptr || !validator) {
      out.dropped = bit == nullptr;
      return out;
    }
    b = *bit;
    if (!state.sent_vote) {
      state.sent_vote = true;
      send(Kind::vote, b);
    }
  } else {
    const auto& m = std::get<BrachaMsg>(event);
    const auto* bit = std::get_if<Bit>(&m.payload);
    if (bit == nullptr || m.instance != key ||
        (m.kind != Kind::vote && m.kind != Kind::ready) || !sender_is_validator(m, ctx)) {
      out.dropped = true;
      return out;
    }
    b = *bit;
    (m.kind == Kind::vote ? state.votes : state.readies)[b].insert(m.sender);
  }

  for (bool changed = true; changed;) {
    changed = false;
    if (validator && !state.sent_vote &&
        (tally(state.votes, b) >= quorum || tally(state.readies, b) >= amplify)) {
      state.sent_vote = true;
      send(Kind::vote, b);
      changed = true;
    }
    if (validator && !state.sent_ready &&
        (tally(state.votes, b) >= quorum || tally(state.readies, b) >= amplify)) {
      state.sent_ready = true;
      send(Kind::ready, b);
      changed = true;
    }
    if (!state.delivered && tally(state.readies, b) >= deliver) {
      state.delivered = true;
      out.output = b;
      changed = true;
    }
  }
  return out;
}

BrachaBackend::BrachaBackend(Params params, LeaderSchedule schedule, NodeId self)
    : params_(params), schedule_(std::move(schedule)), self_(self) {}

Effects BrachaBackend::apply(const InstanceKey& key, const Event& event) {
  const Context ctx{params_, self_, schedule_.leader_of(key.round), key.round};
  Step step = key.kind == InstanceKind::rb ? rb_step(rb_[key.round], event, ctx)
                                           : wba_step(wba_[key.round], event, ctx);
  if (step.dropped) ++dropped_;
  Effects effects;
  for (auto& m : step.broadcasts) {
    effects.sends.push_back(Outgoing{std::move(m), Dissemination::all, {}});
  }
  if (step.output) effects.outputs.push_back(SubprotoOutput{key, std::move(*step.output)});
  return effects;
}

Effects BrachaBackend::input(const InstanceKey& key, const SubprotoValue& value) {
  return apply(key, LocalInput{value});
}

Effects BrachaBackend::receive(const Message& msg) {
  const auto* m = std::get_if<BrachaMsg>(&msg);
  if (m == nullptr) {
    ++dropped_;
    return {};
  }
  return apply(m->instance, *m);
}

const RbState* BrachaBackend::rb_state(Round r) const {
  auto it = rb_.find(r);
  return it == rb_.end() ? nullptr : &it->second;
}

const WbaState* BrachaBackend::wba_state(Round r) const {
  auto it = wba_.find(r);
  return it == wba_.end() ? nullptr : &it->second;
}

}  // namespace abcast::bracha
