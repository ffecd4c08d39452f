#include "abcast/encoding.hpp"

namespace abcast {

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::bytes(std::string_view s) {
  u64(s.size());
  out_.append(s);
}

void encode(ByteWriter& w, const Proposal& p) {
  w.bytes(p.value);
  w.u8(p.parent ? 1 : 0);
  w.u64(p.parent.value_or(0));
  w.i64(p.timestamp);
}

void encode(ByteWriter& w, const InstanceKey& k) {
  w.u8(static_cast<std::uint8_t>(k.kind));
  w.u64(k.round);
}

void encode(ByteWriter& w, const SubprotoValue& v) {
  w.u8(static_cast<std::uint8_t>(v.index()));
  if (const auto* p = std::get_if<Proposal>(&v)) {
    encode(w, *p);
  } else {
    w.u8(static_cast<std::uint8_t>(std::get<Bit>(v)));
  }
}

std::string encode(const Proposal& p) {
  ByteWriter w;
  encode(w, p);
  return w.take();
}

namespace {

void encode_payload(ByteWriter& w, const SignedMsg::Payload& payload) {
  w.u8(static_cast<std::uint8_t>(payload.index()));
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Proposal>) {
          encode(w, v);
        } else if constexpr (std::is_same_v<T, Digest>) {
          w.bytes(std::string_view(reinterpret_cast<const char*>(v.data()), v.size()));
        } else {
          w.u8(static_cast<std::uint8_t>(v));
        }
      },
      payload);
}

}  // namespace

std::string signing_bytes(SignedMsg::Kind kind, const InstanceKey& instance,
                          const SignedMsg::Payload& payload) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(kind));
  encode(w, instance);
  encode_payload(w, payload);
  return w.take();
}

std::string encode(const Message& m) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(m.index()));
  if (const auto* b = std::get_if<BrachaMsg>(&m)) {
    w.u8(static_cast<std::uint8_t>(b->kind));
    encode(w, b->instance);
    w.u64(b->sender.index);
    encode(w, b->payload);
  } else {
    const auto& s = std::get<SignedMsg>(m);
    w.bytes(signing_bytes(s.kind, s.instance, s.payload));
    w.u64(s.signer.index);
    w.u64(s.sig.signer.index);
    w.bytes(std::string_view(reinterpret_cast<const char*>(s.sig.mac.data()), s.sig.mac.size()));
  }
  return w.take();
}

}  // namespace abcast
