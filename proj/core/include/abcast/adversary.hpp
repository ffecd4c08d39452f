#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "abcast/core_model.hpp"
#include "abcast/gossip_quorum.hpp"
#include "abcast/subproto.hpp"

namespace abcast::sim {

namespace adversary {

/// Follows the protocol until `at`, then goes silent and ignores everything.
struct Crash {
  Time at{0};
};

/// Never broadcasts its own proposals in the listed rounds (all rounds it
/// leads if the list is empty). Otherwise follows the protocol.
struct SilentLeader {
  std::vector<Round> rounds;
};

/// In every round it leads, sends one proposal to `partition_a` and a
/// different one to everyone else, including its own echoes and readies.
struct EquivocatingProposer {
  std::vector<NodeId> partition_a;
};

/// Votes (and readies, for Bracha) carry the configured bit per round, or
/// the flipped bit where none is configured. Echo/ready values of RB rounds
/// listed in `rb_values` are replaced.
struct FlipVoter {
  std::map<Round, Bit> bits;
  std::map<Round, Value> rb_values;
};

/// One hand-written message. Empty `to` means every other node. `signer`
/// names the key to sign with (gossip backend); asking for a correct
/// node's key is refused and the message goes out with a bogus signature.
struct ScriptedMessage {
  Time time{0};
  std::vector<NodeId> to;
  std::string kind;
  Round round{0};
  SubprotoValue payload;
  std::optional<NodeId> signer;
  /// Gossip echo carries the digest of the proposal instead of the proposal.
  bool digest = false;
};

struct Scripted {
  std::vector<ScriptedMessage> messages;
};

}  // namespace adversary

using AdversaryBehavior =
    std::variant<adversary::Crash, adversary::SilentLeader, adversary::EquivocatingProposer,
                 adversary::FlipVoter, adversary::Scripted>;

/// Behaviours of one faulty validator, applied in order.
struct AdversarySpec {
  NodeId node;
  std::vector<AdversaryBehavior> behaviors;
};

/// Rewrites the outgoing traffic of one faulty node. Stateless apart from
/// the proposals it has seen itself make.
class AdversaryDriver {
 public:
  AdversaryDriver(NodeId self, std::uint32_t node_count, std::vector<AdversaryBehavior> behaviors,
                  LeaderSchedule schedule, std::optional<gossip::Signer> signer);

  /// Applies every behaviour in order to one message the node's protocol
  /// stack wants to send.
  std::vector<Outgoing> transform(Outgoing out);

  std::optional<Time> crash_time() const;
  bool equivocates() const;
  std::vector<adversary::ScriptedMessage> scripted() const;

  const std::vector<AdversaryBehavior>& behaviors() const { return behaviors_; }

 private:
  std::vector<Outgoing> apply(const AdversaryBehavior& b, Outgoing out);
  Outgoing resign(Outgoing out, SignedMsg::Payload payload) const;

  std::vector<NodeId> targets(const Outgoing& out) const;

  NodeId self_;
  std::uint32_t node_count_;
  std::vector<AdversaryBehavior> behaviors_;
  LeaderSchedule schedule_;
  std::optional<gossip::Signer> signer_;
  std::map<Round, Proposal> own_proposals_;
};

/// Parses a scripted message kind name ("initial", "echo", "ready", "vote").
BrachaMsg::Kind bracha_kind_from_string(const std::string& s);
SignedMsg::Kind signed_kind_from_string(const std::string& s);

}  // namespace abcast::sim
