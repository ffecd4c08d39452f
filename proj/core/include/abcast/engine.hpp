#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "abcast/core_model.hpp"
#include "abcast/subproto.hpp"

namespace abcast {

enum class QueueDiscipline : std::uint8_t { fifo, lifo };

/// Ancestors of a proposal, parent first, back to the first proposal.
using AncestorChain = std::vector<const Proposal*>;

/// Extra acceptance condition on a proposal given its ancestors. A proposal
/// failing it is never accepted, exactly as if its parent were not fertile.
using ValidityPredicate = std::function<bool(const Proposal&, const AncestorChain&)>;

/// Rejects a proposal whose value already occurs among its ancestors.
bool no_duplicate_ancestor(const Proposal& p, const AncestorChain& ancestors);

struct EngineOptions {
  QueueDiscipline queue = QueueDiscipline::fifo;
  /// Messages for rounds above current + window are held back. Unset disables.
  std::optional<std::uint64_t> spam_window = 100;
  /// No round becomes current before this time.
  std::optional<Time> start_time;
  /// A round only becomes current this long after the newest accepted timestamp.
  std::optional<Time> min_parent_delay;
  ValidityPredicate validity = no_duplicate_ancestor;
};

namespace action {

/// Cancel any pending round timer and start a new one.
struct RestartTimer {
  Time delay{0};
  std::uint64_t generation{0};
  auto operator<=>(const RestartTimer&) const = default;
};

struct InputRb {
  Round round{0};
  Proposal proposal;
  auto operator<=>(const InputRb&) const = default;
};

struct InputWba {
  Round round{0};
  Bit bit{Bit::zero};
  auto operator<=>(const InputWba&) const = default;
};

/// Atomic-broadcast output, in finalization order.
struct Deliver {
  Round round{0};
  Value value;
  auto operator<=>(const Deliver&) const = default;
};

/// Re-run the engine at `at`; emitted only while a start-time or
/// minimum-delay gate holds back round advancement.
struct Wakeup {
  Time at{0};
  auto operator<=>(const Wakeup&) const = default;
};

}  // namespace action

using EngineAction = std::variant<action::RestartTimer, action::InputRb, action::InputWba,
                                  action::Deliver, action::Wakeup>;
using EngineActions = std::vector<EngineAction>;

/// Atomic broadcast on top of one RB and one WBA instance per round. The
/// engine only sees subprotocol outputs; the caller routes its InputRb and
/// InputWba actions into the instance table and feeds outputs back.
class Engine {
 public:
  Engine(Params params, LeaderSchedule schedule, NodeId self, EngineOptions options = {});

  /// Starts the round-0 timer (or waits for the start time) and runs one
  /// evaluation pass.
  EngineActions start(Time now);

  /// Buffers a value for proposing. Values this node already delivered are
  /// ignored.
  void on_input(Value v);

  /// Inputs 0 into WBA[current] if `generation` is the live timer.
  EngineActions on_timeout(std::uint64_t generation, Time now);

  /// Records an output in this node's view and re-evaluates to a fixpoint.
  EngineActions on_subproto_output(const InstanceKey& key, const SubprotoValue& out, Time now);

  /// Evaluation pass without new output: after inputs or a wakeup.
  EngineActions evaluate(Time now);

  bool fertile(Round r, OptionalRound s) const;
  std::optional<Proposal> accepted(Round r) const;

  /// Parent a proposal in round `r` would use: the largest fertile round,
  /// bottom if only bottom is fertile, nullopt if nothing is.
  std::optional<OptionalRound> fertile_parent(Round r) const;

  bool committed(Round r) const;
  bool skippable(Round r) const;

  /// Finalizes round `r` and its ancestors at or above undecided_round,
  /// lowest round first, removing their values from the buffer. Requires
  /// accepted(r).
  std::vector<Value> finalize_chain(Round r);

  Round current() const { return current_; }
  Round undecided_round() const { return undecided_; }
  const std::deque<Value>& inputs() const { return inputs_; }
  std::uint64_t timer_generation() const { return timer_generation_; }
  bool started() const { return started_; }
  const std::vector<action::Deliver>& delivered() const { return delivered_; }
  const EngineOptions& options() const { return options_; }
  NodeId self() const { return self_; }

  const std::optional<Proposal> rb_output(Round r) const;
  std::optional<Bit> wba_output(Round r) const;

 private:
  bool gates_open(Time now, EngineActions& out);
  AncestorChain chain_from(OptionalRound parent) const;
  void remove_input(const Value& v);

  Params params_;
  LeaderSchedule schedule_;
  NodeId self_;
  EngineOptions options_;

  Round current_ = 0;
  Round undecided_ = 0;
  std::deque<Value> inputs_;
  std::set<Value> delivered_values_;
  std::vector<action::Deliver> delivered_;

  std::uint64_t timer_generation_ = 0;
  bool started_ = false;
  std::optional<Time> pending_wakeup_;

  std::map<Round, Proposal> rb_out_;
  std::map<Round, Bit> wba_out_;
  std::set<Round> committed_;
  /// Rounds 0..skippable_prefix_-1 are all skippable.
  Round skippable_prefix_ = 0;
  std::set<Round> awaiting_acceptance_;
  std::set<Round> rb_inputs_;
  std::set<Round> wba_inputs_;

  /// Acceptance never reverts once outputs are write-once, so positive
  /// answers are cached.
  mutable std::set<Round> accepted_cache_;
  mutable std::optional<Time> max_accepted_timestamp_;
};

}  // namespace abcast
