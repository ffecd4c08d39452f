#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace abcast {

/// Simulation time in integer ticks.
using Time = std::int64_t;

/// Round number. Rounds start at 0 and have no upper bound.
using Round = std::uint64_t;

/// A parent round, or no parent (the bottom symbol).
using OptionalRound = std::optional<Round>;

/// Raised for invalid parameters, schedules and scenario files.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when n <= 3f.
class FaultBoundError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// A state machine broke one of its own invariants. Never caused by peers.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Node identifier. Indices 0..n-1 are the validators; any higher index is
/// an observer that follows the protocol but carries no vote.
struct NodeId {
  std::uint32_t index{0};

  auto operator<=>(const NodeId&) const = default;
};

std::string to_string(NodeId id);

/// Protocol parameters shared by every node of a network.
struct Params {
  std::uint32_t n{4};
  std::uint32_t f{1};
  /// Maximum message delay once the network has stabilized.
  Time delta{1};
  /// Global stabilization time.
  Time gst{0};
  /// Bound on how long an RB or WBA instance takes to output after GST.
  Time subproto_delay{3};

  /// Throws ConfigError (FaultBoundError for n <= 3f) if any invariant fails.
  void validate() const;

  /// Smallest validator count that forms a quorum.
  std::uint32_t quorum() const;

  bool is_validator(NodeId id) const { return id.index < n; }

  /// Timer delay used by the engine for every round.
  Time round_timeout() const { return 2 * subproto_delay; }

  auto operator<=>(const Params&) const = default;
};

/// Smallest integer strictly greater than (n + f) / 2.
std::uint32_t quorum_min_size(std::uint32_t n, std::uint32_t f);

/// True iff `size` validators form a quorum under `params`.
bool is_quorum(std::uint32_t size, const Params& params);

/// Deterministic map from rounds to leaders. Every validator occurs in the
/// repeating order, so each one leads infinitely many rounds.
class LeaderSchedule {
 public:
  static LeaderSchedule round_robin(std::uint32_t n);

  /// Throws ConfigError unless every validator 0..n-1 occurs in `order` and
  /// every entry is a validator.
  static LeaderSchedule repeating(std::vector<NodeId> order, std::uint32_t n);

  NodeId leader_of(Round r) const { return order_[r % order_.size()]; }

  const std::vector<NodeId>& order() const { return order_; }

  bool is_round_robin() const;

 private:
  explicit LeaderSchedule(std::vector<NodeId> order) : order_(std::move(order)) {}

  std::vector<NodeId> order_;
};

}  // namespace abcast
