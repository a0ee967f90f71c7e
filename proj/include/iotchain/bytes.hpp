#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace iotchain {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

std::string to_hex(ByteView bytes);

// Throws std::invalid_argument on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline Bytes to_bytes(std::string_view s) {
  auto v = as_bytes(s);
  return {v.begin(), v.end()};
}

inline std::string to_string(ByteView bytes) {
  return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

inline void append(Bytes& out, ByteView tail) {
  out.insert(out.end(), tail.begin(), tail.end());
}

inline void append_u64_be(Bytes& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

// Fixed-width opaque byte string. The tag keeps addresses, hashes and keys
// from being mixed up at compile time.
template <std::size_t N, typename Tag>
class FixedBytes {
 public:
  static constexpr std::size_t kSize = N;

  constexpr FixedBytes() = default;
  explicit FixedBytes(const std::array<std::uint8_t, N>& data) : data_(data) {}

  // Throws std::invalid_argument if the view is not exactly N bytes.
  static FixedBytes from_view(ByteView v) {
    if (v.size() != N) {
      throw std::invalid_argument("expected " + std::to_string(N) +
                                  " bytes, got " + std::to_string(v.size()));
    }
    FixedBytes out;
    std::copy(v.begin(), v.end(), out.data_.begin());
    return out;
  }

  static FixedBytes from_hex(std::string_view hex) {
    return from_view(iotchain::from_hex(hex));
  }

  std::string hex() const { return to_hex(data_); }

  ByteView view() const { return data_; }
  std::uint8_t* data() { return data_.data(); }
  const std::uint8_t* data() const { return data_.data(); }
  static constexpr std::size_t size() { return N; }

  bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](std::uint8_t b) { return b == 0; });
  }

  friend auto operator<=>(const FixedBytes&, const FixedBytes&) = default;
  friend bool operator==(const FixedBytes&, const FixedBytes&) = default;

 private:
  std::array<std::uint8_t, N> data_{};
};

struct AddressTag {};
struct HashTag {};

/// 20-byte account identifier. Used for wallets and contracts alike.
using Address = FixedBytes<20, AddressTag>;

/// 256-bit digest used for content addressing and state digests.
using ContentHash = FixedBytes<32, HashTag>;

}  // namespace iotchain
