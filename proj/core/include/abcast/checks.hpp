#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "abcast/trace.hpp"

namespace abcast::harness {

enum class Status : std::uint8_t { pass, fail, inconclusive };

std::string to_string(Status s);

struct CheckReport {
  std::string name;
  Status status = Status::pass;
  /// Trace index of the first violation; replay up to it to reproduce.
  std::optional<std::uint64_t> first_violation;
  std::string message;
  std::map<std::string, std::int64_t> measures;
  std::uint64_t seed = 0;

  bool failed() const { return status == Status::fail; }
};

nlohmann::json to_json(const CheckReport& r);

/// Time a subprotocol instance needs after GST with the header's backend,
/// delta and relay latency: the smallest Delta for which the delay clauses
/// are guaranteed.
Time backend_rb_delay(const TraceHeader& h);
Time backend_wba_delay(const TraceHeader& h);

/// Correct nodes' delivered sequences are prefix-comparable at every point.
CheckReport check_safety(const Trace& trace);

/// Every value injected into a correct validator is delivered by every
/// correct node. Inconclusive when the horizon is too short for the bound.
CheckReport check_liveness(const Trace& trace);

/// Horizon that makes check_liveness conclusive for this trace, or nullopt
/// if there are no obligations.
std::optional<Time> required_liveness_horizon(const Trace& trace);

/// Liveness horizon: enough rounds after `base` for every correct proposer
/// to get `per_proposer` + 1 (at least two) leader slots, at 3*Delta each.
Time liveness_bound(Time base, Round current, std::uint64_t per_proposer, std::size_t cycle,
                    Time subproto_delay);

CheckReport check_wba_contract(const Trace& trace);
CheckReport check_rb_contract(const Trace& trace);

/// At gst + 3*r*Delta every correct node's current round is at least r.
CheckReport check_round_advance(const Trace& trace);

/// Each node's outputs follow one parent chain in increasing rounds.
CheckReport check_finalization_order(const Trace& trace);

/// Every correct-to-correct send is received on time.
CheckReport check_delivery(const Trace& trace);

/// Correct nodes only pass on signed messages their signer really sent.
CheckReport check_gossip_signatures(const Trace& trace);

/// A gossip message received by one correct node reaches all of them.
CheckReport check_gossip_closure(const Trace& trace);

/// Names accepted by run_check, in their default order.
const std::vector<std::string>& all_check_names();

/// Throws ConfigError on an unknown name.
CheckReport run_check(const std::string& name, const Trace& trace);

std::vector<CheckReport> run_checks(const std::vector<std::string>& names, const Trace& trace);

bool all_passed(const std::vector<CheckReport>& reports);

}  // namespace abcast::harness
