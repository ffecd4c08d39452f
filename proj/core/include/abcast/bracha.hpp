#pragma once

#include <map>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "abcast/subproto.hpp"

namespace abcast::bracha {

/// Reliable broadcast by message counting: initial, echo, ready.
struct RbState {
  bool sent_initial = false;
  bool sent_echo = false;
  bool sent_ready = false;
  bool delivered = false;
  /// First initial received from the proposer.
  std::optional<Proposal> initial;
  std::map<Proposal, std::set<NodeId>> echoes;
  std::map<Proposal, std::set<NodeId>> readies;
};

/// Weakly-terminating binary agreement: vote replaces echo and carries the
/// validator's own input.
struct WbaState {
  bool sent_vote = false;
  bool sent_ready = false;
  bool delivered = false;
  std::map<Bit, std::set<NodeId>> votes;
  std::map<Bit, std::set<NodeId>> readies;
};

struct Context {
  Params params;
  NodeId self;
  /// Designated RB proposer for this round; unused by WBA.
  NodeId proposer;
  Round round{0};
};

struct LocalInput {
  SubprotoValue value;
};

using Event = std::variant<LocalInput, BrachaMsg>;

struct Step {
  /// Messages to send to every node. The node's own copy is already counted.
  std::vector<BrachaMsg> broadcasts;
  std::optional<SubprotoValue> output;
  bool dropped = false;
};

Step rb_step(RbState& state, const Event& event, const Context& ctx);
Step wba_step(WbaState& state, const Event& event, const Context& ctx);

class BrachaBackend final : public Backend {
 public:
  BrachaBackend(Params params, LeaderSchedule schedule, NodeId self);

  Effects input(const InstanceKey& key, const SubprotoValue& value) override;
  Effects receive(const Message& msg) override;
  std::uint64_t dropped() const override { return dropped_; }

  const RbState* rb_state(Round r) const;
  const WbaState* wba_state(Round r) const;

 private:
  Effects apply(const InstanceKey& key, const Event& event);

  Params params_;
  LeaderSchedule schedule_;
  NodeId self_;
  std::map<Round, RbState> rb_;
  std::map<Round, WbaState> wba_;
  std::uint64_t dropped_ = 0;
};

}  // namespace abcast::bracha
