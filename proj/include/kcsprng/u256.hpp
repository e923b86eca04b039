#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "kcsprng/bits.hpp"
#include "kcsprng/error.hpp"

namespace kcsprng {

/// Fixed 256-bit unsigned integer, four little-endian 64-bit limbs.
/// Arithmetic wraps modulo 2^256; the carry/borrow helpers expose overflow.
struct U256 {
  std::array<std::uint64_t, 4> limb{};

  constexpr U256() = default;
  constexpr U256(std::uint64_t v) : limb{v, 0, 0, 0} {}  // NOLINT(google-explicit-constructor)
  constexpr U256(std::uint64_t l3, std::uint64_t l2, std::uint64_t l1, std::uint64_t l0)
      : limb{l0, l1, l2, l3} {}

  /// Up to 64 hex digits, optional 0x prefix, either case.
  static U256 from_hex(std::string_view hex) {
    if (hex.size() >= 2 && hex[0] == '0' && (hex[1] == 'x' || hex[1] == 'X')) hex.remove_prefix(2);
    if (hex.empty()) throw UsageError("empty hex string");
    while (hex.size() > 1 && hex.front() == '0') hex.remove_prefix(1);
    if (hex.size() > 64) throw UsageError("hex value exceeds 256 bits");
    U256 r;
    std::size_t shift = 0;
    for (auto it = hex.rbegin(); it != hex.rend(); ++it, shift += 4) {
      const char ch = *it;
      std::uint64_t v;
      if (ch >= '0' && ch <= '9')
        v = static_cast<std::uint64_t>(ch - '0');
      else if (ch >= 'A' && ch <= 'F')
        v = static_cast<std::uint64_t>(ch - 'A' + 10);
      else if (ch >= 'a' && ch <= 'f')
        v = static_cast<std::uint64_t>(ch - 'a' + 10);
      else
        throw UsageError(std::string("invalid hex digit '") + ch + "'");
      r.limb[shift / 64] |= v << (shift % 64);
    }
    return r;
  }

  /// Uppercase, zero-padded to 64 digits.
  std::string to_hex() const {
    static constexpr char digits[] = "0123456789ABCDEF";
    std::string out(64, '0');
    for (std::size_t i = 0; i < 64; ++i) {
      const std::size_t shift = (63 - i) * 4;
      out[i] = digits[(limb[shift / 64] >> (shift % 64)) & 0xF];
    }
    return out;
  }

  /// Uppercase without leading zeros ("0" for zero).
  std::string to_hex_compact() const {
    std::string s = to_hex();
    const auto first = s.find_first_not_of('0');
    return first == std::string::npos ? "0" : s.substr(first);
  }

  /// Big-endian interpretation of exactly 256 bits.
  static U256 from_bits(const BitStream& bits) {
    if (bits.size() != 256) throw SizeError("expected a 256-bit string, got " + std::to_string(bits.size()));
    U256 r;
    for (std::size_t i = 0; i < 256; ++i)
      if (bits[i]) r.set_bit(255 - i);
    return r;
  }

  /// Big-endian, zero-left-padded 256-bit encoding.
  BitStream to_bits() const {
    BitStream out(256);
    for (std::size_t i = 0; i < 256; ++i) out.set(i, bit(255 - i));
    return out;
  }

  constexpr bool bit(std::size_t i) const noexcept { return (limb[i / 64] >> (i % 64)) & 1U; }
  constexpr void set_bit(std::size_t i) noexcept { limb[i / 64] |= std::uint64_t{1} << (i % 64); }
  constexpr bool is_zero() const noexcept { return (limb[0] | limb[1] | limb[2] | limb[3]) == 0; }
  constexpr bool is_odd() const noexcept { return limb[0] & 1U; }

  /// Index of the highest set bit plus one; 0 for zero.
  constexpr int bit_length() const noexcept {
    for (int i = 3; i >= 0; --i)
      if (limb[static_cast<std::size_t>(i)] != 0)
        return i * 64 + 64 - __builtin_clzll(limb[static_cast<std::size_t>(i)]);
    return 0;
  }

  friend constexpr bool operator==(const U256&, const U256&) = default;

  friend constexpr std::strong_ordering operator<=>(const U256& a, const U256& b) noexcept {
    for (int i = 3; i >= 0; --i) {
      const auto k = static_cast<std::size_t>(i);
      if (a.limb[k] != b.limb[k]) return a.limb[k] <=> b.limb[k];
    }
    return std::strong_ordering::equal;
  }
};

using u128 = unsigned __int128;

/// r = a + b, returns the carry out.
constexpr bool add_carry(const U256& a, const U256& b, U256& r) noexcept {
  u128 c = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    c += static_cast<u128>(a.limb[i]) + b.limb[i];
    r.limb[i] = static_cast<std::uint64_t>(c);
    c >>= 64;
  }
  return c != 0;
}

/// r = a - b, returns the borrow out.
constexpr bool sub_borrow(const U256& a, const U256& b, U256& r) noexcept {
  std::uint64_t borrow = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const std::uint64_t ai = a.limb[i], bi = b.limb[i];
    const std::uint64_t d = ai - bi - borrow;
    borrow = (ai < bi) || (ai - bi < borrow) ? 1 : 0;
    r.limb[i] = d;
  }
  return borrow != 0;
}

constexpr U256 operator+(const U256& a, const U256& b) noexcept {
  U256 r;
  add_carry(a, b, r);
  return r;
}

constexpr U256 operator-(const U256& a, const U256& b) noexcept {
  U256 r;
  sub_borrow(a, b, r);
  return r;
}

/// Logical right shift by one with `carry_in` entering at bit 255.
constexpr U256 shr1(const U256& a, bool carry_in = false) noexcept {
  U256 r;
  for (std::size_t i = 0; i < 4; ++i) {
    const std::uint64_t hi = i < 3 ? a.limb[i + 1] : (carry_in ? 1U : 0U);
    r.limb[i] = (a.limb[i] >> 1) | (hi << 63);
  }
  return r;
}

/// Left shift by one; the bit shifted out is returned through `carry_out`.
constexpr U256 shl1(const U256& a, bool& carry_out) noexcept {
  U256 r;
  carry_out = (a.limb[3] >> 63) != 0;
  for (std::size_t i = 4; i-- > 0;) r.limb[i] = (a.limb[i] << 1) | (i > 0 ? a.limb[i - 1] >> 63 : 0);
  return r;
}

/// a mod m for any nonzero m, by shift-and-subtract.
inline U256 mod(const U256& a, const U256& m) {
  if (m.is_zero()) throw UsageError("modulus is zero");
  if (a < m) return a;
  U256 r;
  for (int i = a.bit_length() - 1; i >= 0; --i) {
    bool overflow = false;
    r = shl1(r, overflow);
    if (a.bit(static_cast<std::size_t>(i))) r.limb[0] |= 1U;
    if (overflow || r >= m) r = r - m;
  }
  return r;
}

}  // namespace kcsprng
