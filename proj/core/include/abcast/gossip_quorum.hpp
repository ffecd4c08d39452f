#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string_view>
#include <variant>
#include <vector>

#include "abcast/subproto.hpp"

namespace abcast::gossip {

/// SHA-256 of the given bytes.
Digest digest(std::string_view bytes);

/// Digest of a proposal's canonical encoding.
Digest digest(const Proposal& p);

class SignatureScheme {
 public:
  virtual ~SignatureScheme() = default;
  virtual Signature sign(NodeId signer, std::string_view payload) const = 0;
  virtual bool verify(NodeId signer, std::string_view payload, const Signature& sig) const = 0;
};

/// Deterministic simulation scheme: a keyed hash under per-node secrets
/// derived from a seed. Secrets never leave this object, so a valid
/// signature can only come from a sign() call made through a Signer.
class SimSignatureScheme final : public SignatureScheme {
 public:
  SimSignatureScheme(std::uint32_t nodes, std::uint64_t seed);

  Signature sign(NodeId signer, std::string_view payload) const override;
  bool verify(NodeId signer, std::string_view payload, const Signature& sig) const override;

 private:
  std::vector<Digest> keys_;
};

/// Capability to sign as one node.
class Signer {
 public:
  Signer(std::shared_ptr<const SignatureScheme> scheme, NodeId owner)
      : scheme_(std::move(scheme)), owner_(owner) {}

  NodeId owner() const { return owner_; }
  Signature sign(std::string_view payload) const { return scheme_->sign(owner_, payload); }

 private:
  std::shared_ptr<const SignatureScheme> scheme_;
  NodeId owner_;
};

/// Hands out signing capabilities. Faulty nodes may sign for each other but
/// never for a correct node; refused requests are counted.
class KeyRing {
 public:
  KeyRing(std::shared_ptr<const SignatureScheme> scheme, std::set<NodeId> faulty)
      : scheme_(std::move(scheme)), faulty_(std::move(faulty)) {}

  Signer own_signer(NodeId owner) const { return Signer(scheme_, owner); }

  /// Signer for `owner` requested by faulty node `requester`, or nullopt if
  /// `owner` is correct.
  std::optional<Signer> adversary_signer(NodeId requester, NodeId owner);

  const SignatureScheme& scheme() const { return *scheme_; }
  std::shared_ptr<const SignatureScheme> shared_scheme() const { return scheme_; }
  std::uint64_t refused() const { return refused_; }

 private:
  std::shared_ptr<const SignatureScheme> scheme_;
  std::set<NodeId> faulty_;
  std::uint64_t refused_ = 0;
};

/// Builds and signs a message.
SignedMsg make_signed(SignedMsg::Kind kind, const InstanceKey& instance,
                      SignedMsg::Payload payload, const Signer& signer);

bool verify(const SignatureScheme& scheme, const SignedMsg& m);

/// Echo payload: the proposal itself, or its digest in digest mode.
using EchoKey = std::variant<Proposal, Digest>;

struct RbState {
  bool sent_initial = false;
  bool signed_echo = false;
  bool delivered = false;
  std::optional<Proposal> first_initial;
  /// Every verified initial from the proposer, keyed by digest.
  std::map<Digest, Proposal> initials;
  std::map<EchoKey, std::set<NodeId>> echoes;
  /// Every signature counts toward its own value. The first echo per
  /// signer is kept so that a second, different one shows up as evidence.
  std::map<NodeId, EchoKey> echo_of;
  std::uint64_t equivocations = 0;
};

struct WbaState {
  bool signed_vote = false;
  bool delivered = false;
  std::map<Bit, std::set<NodeId>> votes;
  std::map<NodeId, Bit> vote_of;
  std::uint64_t equivocations = 0;
};

struct Context {
  Params params;
  NodeId self;
  NodeId proposer;
  Round round{0};
  bool digest_mode = false;
  const SignatureScheme* verifier = nullptr;
  /// Null for nodes that cannot sign (observers).
  const Signer* signer = nullptr;
};

struct LocalInput {
  SubprotoValue value;
};

using Event = std::variant<LocalInput, SignedMsg>;

struct Step {
  std::vector<SignedMsg> gossip;
  std::optional<SubprotoValue> output;
  bool dropped = false;
  bool bad_signature = false;
};

Step grb_step(RbState& state, const Event& event, const Context& ctx);
Step gwba_step(WbaState& state, const Event& event, const Context& ctx);

class GossipBackend final : public Backend {
 public:
  GossipBackend(Params params, LeaderSchedule schedule, NodeId self, bool digest_mode,
                std::shared_ptr<const SignatureScheme> scheme, std::optional<Signer> signer);

  Effects input(const InstanceKey& key, const SubprotoValue& value) override;
  Effects receive(const Message& msg) override;
  std::uint64_t dropped() const override { return dropped_; }

  std::uint64_t bad_signatures() const { return bad_signatures_; }
  const RbState* rb_state(Round r) const;
  const WbaState* wba_state(Round r) const;

 private:
  Effects apply(const InstanceKey& key, const Event& event);

  Params params_;
  LeaderSchedule schedule_;
  NodeId self_;
  bool digest_mode_;
  std::shared_ptr<const SignatureScheme> scheme_;
  std::optional<Signer> signer_;
  std::map<Round, RbState> rb_;
  std::map<Round, WbaState> wba_;
  std::uint64_t dropped_ = 0;
  std::uint64_t bad_signatures_ = 0;
};

}  // namespace abcast::gossip
