#include "abcast/subproto.hpp"

#include <iterator>

namespace abcast {

std::string to_string(const InstanceKey& key) {
  return std::string(key.kind == InstanceKind::rb ? "RB[" : "WBA[") +
         std::to_string(key.round) + "]";
}

std::string to_string(const Proposal& p) {
  return "(" + p.value + "," + (p.parent ? std::to_string(*p.parent) : "_") + ")";
}

bool kind_matches(InstanceKind kind, const SubprotoValue& v) {
  return kind == InstanceKind::rb ? std::holds_alternative<Proposal>(v)
                                  : std::holds_alternative<Bit>(v);
}

std::string to_string(const SubprotoValue& v) {
  if (const auto* p = std::get_if<Proposal>(&v)) return to_string(*p);
  return std::to_string(to_int(std::get<Bit>(v)));
}

std::string to_hex(const Digest& d) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(d.size() * 2);
  for (auto byte : d) {
    out.push_back(digits[byte >> 4]);
    out.push_back(digits[byte & 0xf]);
  }
  return out;
}

std::string kind_name(BrachaMsg::Kind k) {
  switch (k) {
    case BrachaMsg::Kind::initial: return "initial";
    case BrachaMsg::Kind::echo: return "echo";
    case BrachaMsg::Kind::ready: return "ready";
    case BrachaMsg::Kind::vote: return "vote";
  }
  return "?";
}

std::string kind_name(SignedMsg::Kind k) {
  switch (k) {
    case SignedMsg::Kind::initial: return "initial";
    case SignedMsg::Kind::echo: return "echo";
    case SignedMsg::Kind::vote: return "vote";
  }
  return "?";
}

std::string kind_name(const Message& m) {
  return std::visit([](const auto& msg) { return kind_name(msg.kind); }, m);
}

InstanceKey instance_of(const Message& m) {
  return std::visit([](const auto& msg) { return msg.instance; }, m);
}

std::string payload_string(const Message& m) {
  if (const auto* b = std::get_if<BrachaMsg>(&m)) return to_string(b->payload);
  const auto& s = std::get<SignedMsg>(m);
  if (const auto* p = std::get_if<Proposal>(&s.payload)) return to_string(*p);
  if (const auto* d = std::get_if<Digest>(&s.payload)) return "#" + to_hex(*d).substr(0, 16);
  return std::to_string(to_int(std::get<Bit>(s.payload)));
}

void Effects::append(Effects&& other) {
  sends.insert(sends.end(), std::make_move_iterator(other.sends.begin()),
               std::make_move_iterator(other.sends.end()));
  outputs.insert(outputs.end(), std::make_move_iterator(other.outputs.begin()),
                 std::make_move_iterator(other.outputs.end()));
}

InstanceTable::InstanceTable(NodeId self, Params params, LeaderSchedule schedule,
                             std::unique_ptr<Backend> backend)
    : self_(self),
      params_(params),
      schedule_(std::move(schedule)),
      backend_(std::move(backend)) {}

Effects InstanceTable::submit_input(const InstanceKey& key, const SubprotoValue& value) {
  if (!kind_matches(key.kind, value)) {
    throw std::invalid_argument("input kind does not match " + to_string(key));
  }
  if (key.kind == InstanceKind::rb && schedule_.leader_of(key.round) != self_) return {};
  if (key.kind == InstanceKind::wba && !params_.is_validator(self_)) return {};

  auto& entry = entries_[key];
  if (entry.input_made) return {};
  entry.input_made = true;
  return backend_->input(key, value);
}

Effects InstanceTable::deliver(const Message& msg) { return backend_->receive(msg); }

bool InstanceTable::record_output(const InstanceKey& key, const SubprotoValue& value) {
  auto& entry = entries_[key];
  if (entry.output) {
    if (*entry.output != value) {
      throw InternalError("conflicting output for " + to_string(key) + ": " +
                          to_string(*entry.output) + " then " + to_string(value));
    }
    return false;
  }
  entry.output = value;
  return true;
}

bool InstanceTable::input_made(const InstanceKey& key) const {
  auto it = entries_.find(key);
  return it != entries_.end() && it->second.input_made;
}

const SubprotoValue* InstanceTable::output(const InstanceKey& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end() || !it->second.output) return nullptr;
  return &*it->second.output;
}

}  // namespace abcast
