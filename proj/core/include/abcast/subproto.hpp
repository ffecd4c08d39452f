#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "abcast/core_model.hpp"

namespace abcast {

/// Opaque application payload.
using Value = std::string;

enum class Bit : std::uint8_t { zero = 0, one = 1 };

inline int to_int(Bit b) { return static_cast<int>(b); }
inline Bit flip(Bit b) { return b == Bit::zero ? Bit::one : Bit::zero; }

/// The unit broadcast through RB in each round: "output `value` right after
/// the value of round `parent`". `timestamp` is the proposer's clock and is
/// only consulted when minimum-delay gates are enabled.
struct Proposal {
  Value value;
  OptionalRound parent;
  Time timestamp{0};

  auto operator<=>(const Proposal&) const = default;
};

enum class InstanceKind : std::uint8_t { rb, wba };

struct InstanceKey {
  InstanceKind kind{InstanceKind::rb};
  Round round{0};

  auto operator<=>(const InstanceKey&) const = default;
};

inline InstanceKey rb_key(Round r) { return {InstanceKind::rb, r}; }
inline InstanceKey wba_key(Round r) { return {InstanceKind::wba, r}; }

std::string to_string(const InstanceKey& key);
std::string to_string(const Proposal& p);

/// Input to or output of an instance: a Proposal for RB, a Bit for WBA.
using SubprotoValue = std::variant<Proposal, Bit>;

bool kind_matches(InstanceKind kind, const SubprotoValue& v);
std::string to_string(const SubprotoValue& v);

using Digest = std::array<std::uint8_t, 32>;

std::string to_hex(const Digest& d);

struct Signature {
  NodeId signer;
  Digest mac{};

  auto operator<=>(const Signature&) const = default;
};

/// Bracha message. `sender` is stamped by the channel, so it is authentic.
struct BrachaMsg {
  enum class Kind : std::uint8_t { initial, echo, ready, vote };

  Kind kind{Kind::initial};
  InstanceKey instance;
  NodeId sender;
  SubprotoValue payload;

  auto operator<=>(const BrachaMsg&) const = default;
};

/// Signed message of the gossip-quorum backend. The payload is a Proposal
/// for `initial` and plain `echo`, a Digest for digest-mode `echo` and a Bit
/// for `vote`.
struct SignedMsg {
  enum class Kind : std::uint8_t { initial, echo, vote };
  using Payload = std::variant<Proposal, Digest, Bit>;

  Kind kind{Kind::initial};
  InstanceKey instance;
  Payload payload;
  NodeId signer;
  Signature sig;

  auto operator<=>(const SignedMsg&) const = default;
};

using Message = std::variant<BrachaMsg, SignedMsg>;

std::string kind_name(BrachaMsg::Kind k);
std::string kind_name(SignedMsg::Kind k);
std::string kind_name(const Message& m);
InstanceKey instance_of(const Message& m);
std::string payload_string(const Message& m);

/// How an outgoing message leaves the node.
enum class Dissemination : std::uint8_t {
  /// Direct send to every node except the sender itself.
  all,
  /// Hand to the gossip layer.
  gossip,
  /// Direct send to the listed recipients only.
  to,
};

struct Outgoing {
  Message msg;
  Dissemination mode{Dissemination::all};
  std::vector<NodeId> recipients;
};

struct SubprotoOutput {
  InstanceKey key;
  SubprotoValue value;
};

/// Everything a backend asks for after one input or one message.
struct Effects {
  std::vector<Outgoing> sends;
  std::vector<SubprotoOutput> outputs;

  bool empty() const { return sends.empty() && outputs.empty(); }
  void append(Effects&& other);
};

/// A passive RB/WBA implementation for one node. Instances are created on
/// first contact. Backends own no timers.
class Backend {
 public:
  virtual ~Backend() = default;

  /// Called only for the first input to an instance, and only when this node
  /// is entitled to make it.
  virtual Effects input(const InstanceKey& key, const SubprotoValue& value) = 0;

  virtual Effects receive(const Message& msg) = 0;

  /// Messages discarded as malformed, unauthenticated or from the wrong sender.
  virtual std::uint64_t dropped() const = 0;
};

/// Per-node record of which instances received an input and what each one
/// output. Inputs that are not expected are ignored; outputs are write-once.
class InstanceTable {
 public:
  InstanceTable(NodeId self, Params params, LeaderSchedule schedule,
                std::unique_ptr<Backend> backend);

  /// Forwards the first expected input to the backend. Returns no effects if
  /// an input was already made, if this node is not the RB proposer, or if a
  /// non-validator tries to vote.
  Effects submit_input(const InstanceKey& key, const SubprotoValue& value);

  Effects deliver(const Message& msg);

  /// Stores the first output for `key` and returns true. A repeated equal
  /// output returns false; a conflicting one throws InternalError.
  bool record_output(const InstanceKey& key, const SubprotoValue& value);

  bool input_made(const InstanceKey& key) const;
  const SubprotoValue* output(const InstanceKey& key) const;

  Backend& backend() { return *backend_; }
  const Backend& backend() const { return *backend_; }

 private:
  struct Entry {
    bool input_made = false;
    std::optional<SubprotoValue> output;
  };

  NodeId self_;
  Params params_;
  LeaderSchedule schedule_;
  std::unique_ptr<Backend> backend_;
  std::map<InstanceKey, Entry> entries_;
};

}  // namespace abcast
