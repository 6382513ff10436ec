#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace clonewatch {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

Bytes to_bytes(std::string_view s);
std::string to_string(ByteView b);

std::string to_hex(ByteView b);
Bytes from_hex(std::string_view hex);

std::string base64_encode(ByteView b);
/// Throws DecodeError on malformed input.
Bytes base64_decode(std::string_view s);

Bytes xor_bytes(ByteView a, ByteView b);

/// SHA-256 digest.
Bytes sha256(ByteView data);
std::string sha256_hex(ByteView data);

/// True when `needle` occurs as a contiguous run inside `haystack`.
bool contains_bytes(ByteView haystack, ByteView needle);

/// Length-prefixed framing: 4-byte big-endian length followed by the bytes.
void append_lp(Bytes& out, ByteView field);
void append_u32(Bytes& out, std::uint32_t v);

/// Sequential reader over length-prefixed fields. Throws DecodeError on
/// truncation.
class ByteReader {
 public:
  explicit ByteReader(ByteView data) : data_(data) {}

  std::uint32_t u32();
  Bytes lp();
  bool done() const { return pos_ == data_.size(); }
  void expect_done() const;

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

}  // namespace clonewatch
