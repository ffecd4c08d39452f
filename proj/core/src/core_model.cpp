#include "abcast/core_model.hpp"

#include <algorithm>

namespace abcast {

std::string to_string(NodeId id) { return "node" + std::to_string(id.index); }

void Params::validate() const {
  if (n <= 3 * static_cast<std::uint64_t>(f)) {
    throw FaultBoundError("fault bound violated: need n > 3f, got n=" +
                          std::to_string(n) + " f=" + std::to_string(f));
  }
  if (delta <= 0) throw ConfigError("delta must be positive");
  if (subproto_delay <= 0) throw ConfigError("Delta must be positive");
  if (gst < 0) throw ConfigError("gst must be non-negative");
}

std::uint32_t Params::quorum() const { return quorum_min_size(n, f); }

std::uint32_t quorum_min_size(std::uint32_t n, std::uint32_t f) {
  if (n <= 3 * static_cast<std::uint64_t>(f)) {
    throw FaultBoundError("fault bound violated: need n > 3f, got n=" +
                          std::to_string(n) + " f=" + std::to_string(f));
  }
  // floor((n + f) / 2) + 1 is the least integer > (n + f) / 2 for either parity.
  return (n + f) / 2 + 1;
}

bool is_quorum(std::uint32_t size, const Params& params) {
  return size >= quorum_min_size(params.n, params.f);
}

LeaderSchedule LeaderSchedule::round_robin(std::uint32_t n) {
  if (n == 0) throw ConfigError("leader schedule needs at least one validator");
  std::vector<NodeId> order;
  order.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) order.push_back(NodeId{i});
  return LeaderSchedule(std::move(order));
}

LeaderSchedule LeaderSchedule::repeating(std::vector<NodeId> order, std::uint32_t n) {
  if (order.empty()) throw ConfigError("leader list must not be empty");
  std::vector<bool> seen(n, false);
  for (NodeId id : order) {
    if (id.index >= n) {
      throw ConfigError("leader list names non-validator " + to_string(id));
    }
    seen[id.index] = true;
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
    throw ConfigError("every validator must occur in the leader list");
  }
  return LeaderSchedule(std::move(order));
}

bool LeaderSchedule::is_round_robin() const {
  for (std::size_t i = 0; i < order_.size(); ++i) {
    if (order_[i].index != i) return false;
  }
  return true;
}

}  // namespace abcast
