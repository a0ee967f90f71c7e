#pragma once

#include <cstdint>
#include <string_view>

#include "iotchain/bytes.hpp"

namespace iotchain {

// Byte writer for the canonical state encoding: big-endian integers,
// u32-length-prefixed variable data, fixed-width values written raw.
// docs/state-format.md lists the field order.
class CanonicalWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void boolean(bool v) { u8(v ? 1 : 0); }
  void u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) {
      out_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
  }
  void u64(std::uint64_t v) { append_u64_be(out_, v); }
  void bytes(ByteView v) {
    u32(static_cast<std::uint32_t>(v.size()));
    append(out_, v);
  }
  void str(std::string_view s) { bytes(as_bytes(s)); }
  template <std::size_t N, typename Tag>
  void fixed(const FixedBytes<N, Tag>& v) {
    append(out_, v.view());
  }

  const Bytes& buffer() const { return out_; }

 private:
  Bytes out_;
};

}  // namespace iotchain
