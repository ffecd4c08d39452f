#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "abcast/subproto.hpp"

namespace abcast {

/// Canonical length-prefixed binary encoding. Used for signing, digests and
/// gossip deduplication, so equal values always encode to equal bytes.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u64(std::uint64_t v);
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void bytes(std::string_view s);

  const std::string& str() const { return out_; }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

void encode(ByteWriter& w, const Proposal& p);
void encode(ByteWriter& w, const InstanceKey& k);
void encode(ByteWriter& w, const SubprotoValue& v);

std::string encode(const Proposal& p);

/// Bytes covered by a SignedMsg signature: kind, instance and payload.
std::string signing_bytes(SignedMsg::Kind kind, const InstanceKey& instance,
                          const SignedMsg::Payload& payload);

/// Full encoding of a message including sender/signature.
std::string encode(const Message& m);

}  // namespace abcast
