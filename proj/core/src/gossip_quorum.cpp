#include "abcast/gossip_quorum.hpp"

#include <openssl/sha.h>

#include "abcast/encoding.hpp"

namespace abcast::gossip {

Digest digest(std::string_view bytes) {
  Digest out{};
  SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), out.data());
  return out;
}

Digest digest(const Proposal& p) { return digest(encode(p)); }

namespace {

Digest keyed(const Digest& key, std::string_view payload) {
  std::string buf(reinterpret_cast<const char*>(key.data()), key.size());
  buf.append(payload);
  return digest(buf);
}

}  // namespace

SimSignatureScheme::SimSignatureScheme(std::uint32_t nodes, std::uint64_t seed) {
  keys_.reserve(nodes);
  for (std::uint32_t i = 0; i < nodes; ++i) {
    ByteWriter w;
    w.bytes("abcast-sim-key");
    w.u64(seed);
    w.u64(i);
    keys_.push_back(digest(w.str()));
  }
}

Signature SimSignatureScheme::sign(NodeId signer, std::string_view payload) const {
  if (signer.index >= keys_.size()) throw std::out_of_range("no key for " + to_string(signer));
  return Signature{signer, keyed(keys_[signer.index], payload)};
}

bool SimSignatureScheme::verify(NodeId signer, std::string_view payload,
                                const Signature& sig) const {
  if (signer.index >= keys_.size() || sig.signer != signer) return false;
  return keyed(keys_[signer.index], payload) == sig.mac;
}

std::optional<Signer> KeyRing::adversary_signer(NodeId requester, NodeId owner) {
  if (!faulty_.contains(requester) || !faulty_.contains(owner)) {
    ++refused_;
    return std::nullopt;
  }
  return Signer(scheme_, owner);
}

SignedMsg make_signed(SignedMsg::Kind kind, const InstanceKey& instance,
                      SignedMsg::Payload payload, const Signer& signer) {
  SignedMsg m{kind, instance, std::move(payload), signer.owner(), {}};
  m.sig = signer.sign(signing_bytes(m.kind, m.instance, m.payload));
  return m;
}

bool verify(const SignatureScheme& scheme, const SignedMsg& m) {
  return scheme.verify(m.signer, signing_bytes(m.kind, m.instance, m.payload), m.sig);
}

namespace {

using Kind = SignedMsg::Kind;

EchoKey echo_key_for(const Proposal& p, bool digest_mode) {
  if (digest_mode) return digest(p);
  return p;
}

/// Output check shared by initial and echo arrivals.
void try_output(RbState& state, const Context& ctx, Step& out) {
  if (state.delivered) return;
  for (const auto& [key, signers] : state.echoes) {
    if (signers.size() < ctx.params.quorum()) continue;
    if (const auto* p = std::get_if<Proposal>(&key)) {
      state.delivered = true;
      out.output = *p;
      return;
    }
    auto it = state.initials.find(std::get<Digest>(key));
    if (it != state.initials.end()) {
      state.delivered = true;
      out.output = it->second;
      return;
    }
  }
}

}  // namespace

Step grb_step(RbState& state, const Event& event, const Context& ctx) {
  Step out;
  const InstanceKey key = rb_key(ctx.round);
  const bool validator = ctx.params.is_validator(ctx.self) && ctx.signer != nullptr;

  auto on_initial = [&](const Proposal& p) {
    state.initials.emplace(digest(p), p);
    if (state.first_initial) return;
    state.first_initial = p;
    if (validator && !state.signed_echo) {
      state.signed_echo = true;
      EchoKey ek = echo_key_for(p, ctx.digest_mode);
      SignedMsg::Payload payload =
          std::visit([](const auto& v) -> SignedMsg::Payload { return v; }, ek);
      out.gossip.push_back(make_signed(Kind::echo, key, std::move(payload), *ctx.signer));
      state.echoes[ek].insert(ctx.self);
      state.echo_of.emplace(ctx.self, std::move(ek));
    }
  };

  if (const auto* in = std::get_if<LocalInput>(&event)) {
    const auto* p = std::get_if<Proposal>(&in->value);
    if (p == nullptr || ctx.self != ctx.proposer || ctx.signer == nullptr || state.sent_initial) {
      out.dropped = p == nullptr;
      return out;
    }
    state.sent_initial = true;
    out.gossip.push_back(make_signed(Kind::initial, key, *p, *ctx.signer));
    on_initial(*p);
  } else {
    const auto& m = std::get<SignedMsg>(event);
    if (m.instance != key || m.kind == Kind::vote) {
      out.dropped = true;
      return out;
    }
    if (!verify(*ctx.verifier, m)) {
      out.dropped = out.bad_signature = true;
      return out;
    }
    if (m.kind == Kind::initial) {
      const auto* p = std::get_if<Proposal>(&m.payload);
      if (p == nullptr || m.signer != ctx.proposer) {
        out.dropped = true;
        return out;
      }
      on_initial(*p);
    } else {
      if (!ctx.params.is_validator(m.signer)) {
        out.dropped = true;
        return out;
      }
      EchoKey ek;
      if (ctx.digest_mode) {
        const auto* d = std::get_if<Digest>(&m.payload);
        if (d == nullptr) {
          out.dropped = true;
          return out;
        }
        ek = *d;
      } else {
        const auto* p = std::get_if<Proposal>(&m.payload);
        if (p == nullptr) {
          out.dropped = true;
          return out;
        }
        ek = *p;
      }
      auto [it, fresh] = state.echo_of.emplace(m.signer, ek);
      if (!fresh && it->second != ek) ++state.equivocations;
      state.echoes[ek].insert(m.signer);
    }
  }
  try_output(state, ctx, out);
  return out;
}

Step gwba_step(WbaState& state, const Event& event, const Context& ctx) {
  Step out;
  const InstanceKey key = wba_key(ctx.round);
  const bool validator = ctx.params.is_validator(ctx.self) && ctx.signer != nullptr;

  if (const auto* in = std::get_if<LocalInput>(&event)) {
    const auto* b = std::get_if<Bit>(&in->value);
    if (b == nullptr || !validator || state.signed_vote) {
      out.dropped = b == nullptr;
      return out;
    }
    state.signed_vote = true;
    out.gossip.push_back(make_signed(Kind::vote, key, *b, *ctx.signer));
    state.votes[*b].insert(ctx.self);
    state.vote_of.emplace(ctx.self, *b);
  } else {
    const auto& m = std::get<SignedMsg>(event);
    const auto* b = std::get_if<Bit>(&m.payload);
    if (m.instance != key || m.kind != Kind::vote || b == nullptr ||
        !ctx.params.is_validator(m.signer)) {
      out.dropped = true;
      return out;
    }
    if (!verify(*ctx.verifier, m)) {
      out.dropped = out.bad_signature = true;
      return out;
    }
    auto [it, fresh] = state.vote_of.emplace(m.signer, *b);
    if (!fresh && it->second != *b) ++state.equivocations;
    state.votes[*b].insert(m.signer);
  }

  if (!state.delivered) {
    for (const auto& [bit, signers] : state.votes) {
      if (signers.size() >= ctx.params.quorum()) {
        state.delivered = true;
        out.output = bit;
        break;
      }
    }
  }
  return out;
}

GossipBackend::GossipBackend(Params params, LeaderSchedule schedule, NodeId self,
                             bool digest_mode, std::shared_ptr<const SignatureScheme> scheme,
                             std::optional<Signer> signer)
    : params_(params),
      schedule_(std::move(schedule)),
      self_(self),
      digest_mode_(digest_mode),
      scheme_(std::move(scheme)),
      signer_(std::move(signer)) {}

Effects GossipBackend::apply(const InstanceKey& key, const Event& event) {
  const Context ctx{params_,     self_,         schedule_.leader_of(key.round),
                    key.round,   digest_mode_,  scheme_.get(),
                    signer_ ? &*signer_ : nullptr};
  Step step = key.kind == InstanceKind::rb ? grb_step(rb_[key.round], event, ctx)
                                           : gwba_step(wba_[key.round], event, ctx);
  if (step.dropped) ++dropped_;
  if (step.bad_signature) ++bad_signatures_;
  Effects effects;
  for (auto& m : step.gossip) {
    effects.sends.push_back(Outgoing{std::move(m), Dissemination::gossip, {}});
  }
  if (step.output) effects.outputs.push_back(SubprotoOutput{key, std::move(*step.output)});
  return effects;
}

Effects GossipBackend::input(const InstanceKey& key, const SubprotoValue& value) {
  return apply(key, LocalInput{value});
}

Effects GossipBackend::receive(const Message& msg) {
  const auto* m = std::get_if<SignedMsg>(&msg);
  if (m == nullptr) {
    ++dropped_;
    return {};
  }
  return apply(m->instance, *m);
}

const RbState* GossipBackend::rb_state(Round r) const {
  auto it = rb_.find(r);
  return it == rb_.end() ? nullptr : &it->second;
}

const WbaState* GossipBackend::wba_state(Round r) const {
  auto it = wba_.find(r);
  return it == wba_.end() ? nullptr : &it->second;
}

}  // namespace abcast::gossip
