#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kcsprng/error.hpp"

namespace kcsprng {

/// Packed bit sequence. Bit 0 is the most significant bit of byte 0, which is
/// also the on-disk layout of every raw stream this project reads or writes.
class BitStream {
 public:
  BitStream() = default;

  explicit BitStream(std::size_t n, bool value = false)
      : bytes_((n + 7) / 8, value ? std::uint8_t{0xFF} : std::uint8_t{0}), size_(n) {
    clear_padding();
  }

  /// Takes the first `nbits` bits of `bytes` (all of them when nbits is npos).
  static BitStream from_bytes(std::span<const std::uint8_t> bytes,
                              std::size_t nbits = static_cast<std::size_t>(-1)) {
    if (nbits == static_cast<std::size_t>(-1)) nbits = bytes.size() * 8;
    if (nbits > bytes.size() * 8) throw SizeError("BitStream::from_bytes: not enough bytes");
    BitStream s;
    s.bytes_.assign(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>((nbits + 7) / 8));
    s.size_ = nbits;
    s.clear_padding();
    return s;
  }

  /// Parses a string of '0'/'1' characters.
  static BitStream from_string(std::string_view text) {
    BitStream s;
    s.reserve(text.size());
    for (char ch : text) {
      if (ch != '0' && ch != '1') throw UsageError("BitStream::from_string: expected 0/1");
      s.push_back(ch == '1');
    }
    return s;
  }

  /// Big-endian hex, `nbits` wide; leading bits beyond the hex width are zero.
  static BitStream from_hex(std::string_view hex, std::size_t nbits) {
    BitStream s(nbits);
    std::size_t pos = nbits;
    for (auto it = hex.rbegin(); it != hex.rend(); ++it) {
      int v = hex_value(*it);
      for (int b = 0; b < 4; ++b) {
        bool bit = (v >> b) & 1;
        if (pos == 0) {
          if (bit) throw SizeError("BitStream::from_hex: value wider than requested bit count");
          continue;
        }
        s.set(pos - 1, bit);
        --pos;
      }
    }
    return s;
  }

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  bool operator[](std::size_t i) const noexcept {
    return (bytes_[i >> 3] >> (7 - (i & 7))) & 1U;
  }

  void set(std::size_t i, bool v) noexcept {
    const auto mask = static_cast<std::uint8_t>(0x80U >> (i & 7));
    if (v)
      bytes_[i >> 3] |= mask;
    else
      bytes_[i >> 3] &= static_cast<std::uint8_t>(~mask);
  }

  void push_back(bool v) {
    if ((size_ & 7) == 0) bytes_.push_back(0);
    ++size_;
    set(size_ - 1, v);
  }

  void append(const BitStream& other) {
    reserve(size_ + other.size_);
    for (std::size_t i = 0; i < other.size_; ++i) push_back(other[i]);
  }

  void reserve(std::size_t nbits) { bytes_.reserve((nbits + 7) / 8); }

  BitStream slice(std::size_t first, std::size_t count) const {
    if (first + count > size_) throw SizeError("BitStream::slice out of range");
    BitStream s;
    s.reserve(count);
    for (std::size_t i = 0; i < count; ++i) s.push_back((*this)[first + i]);
    return s;
  }

  std::size_t count_ones() const noexcept {
    std::size_t n = 0;
    for (std::uint8_t b : bytes_) n += static_cast<std::size_t>(__builtin_popcount(b));
    return n;
  }

  /// Overwrites the storage with zeros; size is kept.
  void shred() noexcept {
    volatile std::uint8_t* p = bytes_.data();
    for (std::size_t i = 0; i < bytes_.size(); ++i) p[i] = 0;
  }

  /// Packed bytes; bits past size() in the last byte are zero.
  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }

  std::string to_string() const {
    std::string out;
    out.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) out.push_back((*this)[i] ? '1' : '0');
    return out;
  }

  friend bool operator==(const BitStream& a, const BitStream& b) noexcept {
    return a.size_ == b.size_ && a.bytes_ == b.bytes_;
  }

 private:
  static int hex_value(char ch) {
    if (ch >= '0' && ch <= '9') return ch - '0';
    if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
    if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
    throw UsageError(std::string("invalid hex digit '") + ch + "'");
  }

  void clear_padding() noexcept {
    if (size_ & 7) bytes_.back() &= static_cast<std::uint8_t>(0xFF00U >> (size_ & 7));
  }

  std::vector<std::uint8_t> bytes_;
  std::size_t size_ = 0;
};

/// Number of positions at which two equal-length streams differ.
inline std::size_t hamming_distance(const BitStream& a, const BitStream& b) {
  if (a.size() != b.size()) throw SizeError("hamming_distance: length mismatch");
  std::size_t d = 0;
  const auto& x = a.bytes();
  const auto& y = b.bytes();
  for (std::size_t i = 0; i < x.size(); ++i)
    d += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(x[i] ^ y[i])));
  return d;
}

}  // namespace kcsprng
