#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "kcsprng/error.hpp"

namespace kcsprng {

/// Feedback polynomial x^degree + sum(x^e) over GF(2), kept in the form it is
/// usually written in: the degree plus the sub-leading exponents (0 included).
struct FeedbackPolynomial {
  int degree = 0;
  std::vector<int> exponents;

  /// Right-shift Galois mask: multiplication by x^-1 mod P. For
  /// P = x^d + sum(x^e) + 1 this is x^(d-1) + sum(x^(e-1)), so bit d-1 is
  /// always set and the constant term does not appear.
  std::uint64_t tap_mask() const {
    std::uint64_t mask = std::uint64_t{1} << (degree - 1);
    for (int e : exponents)
      if (e > 0) mask |= std::uint64_t{1} << (e - 1);
    return mask;
  }

  friend bool operator==(const FeedbackPolynomial&, const FeedbackPolynomial&) = default;
};

/// Galois-configuration LFSR on a single 64-bit word.
///
/// Stage 0 is the output stage and stage degree-1 (the "MSB") is the input
/// stage. One clock emits stage 0, shifts every stage down by one and, when
/// the emitted bit is 1, XORs the tap mask into the state.
class GaloisLfsr {
 public:
  GaloisLfsr() = default;

  GaloisLfsr(int degree, std::uint64_t tap_mask, std::uint64_t state = 0)
      : degree_(degree), taps_(tap_mask) {
    if (degree < 2 || degree > 64)
      throw UsageError("GaloisLfsr: degree " + std::to_string(degree) + " outside [2, 64]");
    if ((tap_mask & ~full_mask()) != 0)
      throw UsageError("GaloisLfsr: tap mask has bits at or above the degree");
    if ((tap_mask & msb_mask()) == 0)
      throw UsageError("GaloisLfsr: tap mask must feed the input stage");
    state_ = state & full_mask();
  }

  GaloisLfsr(const FeedbackPolynomial& poly, std::uint64_t state = 0)
      : GaloisLfsr(poly.degree, poly.tap_mask(), state) {}

  bool step() noexcept {
    const bool out = state_ & 1U;
    state_ >>= 1;
    state_ ^= taps_ & (std::uint64_t{0} - static_cast<std::uint64_t>(out));
    return out;
  }

  void inject_msb(bool bit) noexcept {
    if (bit) state_ ^= msb_mask();
  }

  void force_msb() noexcept { state_ |= msb_mask(); }

  bool msb() const noexcept { return (state_ & msb_mask()) != 0; }

  int degree() const noexcept { return degree_; }
  std::uint64_t tap_mask() const noexcept { return taps_; }
  std::uint64_t state() const noexcept { return state_; }
  void set_state(std::uint64_t s) noexcept { state_ = s & full_mask(); }

  /// Overwrites the register contents.
  void wipe() noexcept {
    volatile std::uint64_t* p = &state_;
    *p = 0;
  }

  friend bool operator==(const GaloisLfsr&, const GaloisLfsr&) = default;

 private:
  std::uint64_t msb_mask() const noexcept { return std::uint64_t{1} << (degree_ - 1); }
  std::uint64_t full_mask() const noexcept {
    return degree_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << degree_) - 1;
  }

  int degree_ = 2;
  std::uint64_t taps_ = 0b11;
  std::uint64_t state_ = 0;
};

/// The nine production registers L1..L9 (degrees 29..61, 401 stages in total).
inline const std::array<FeedbackPolynomial, 9>& standard_registers() {
  static const std::array<FeedbackPolynomial, 9> polys{{
      {29, {25, 21, 17, 14, 10, 6, 3, 0}},
      {31, {27, 23, 19, 15, 11, 7, 3, 0}},
      {37, {32, 27, 23, 18, 13, 9, 5, 0}},
      {41, {36, 31, 26, 20, 15, 10, 5, 0}},
      {43, {37, 31, 25, 20, 15, 10, 5, 0}},
      {47, {41, 35, 29, 23, 17, 11, 5, 0}},
      {53, {46, 40, 33, 26, 19, 13, 7, 0}},
      {59, {52, 44, 36, 29, 22, 14, 7, 0}},
      {61, {53, 45, 38, 30, 23, 15, 7, 0}},
  }};
  return polys;
}

/// Small primitive polynomials for scaled-down test generators (degrees 2..11).
inline FeedbackPolynomial miniature_polynomial(int degree) {
  switch (degree) {
    case 2: return {2, {1, 0}};
    case 3: return {3, {1, 0}};
    case 4: return {4, {1, 0}};
    case 5: return {5, {2, 0}};
    case 6: return {6, {1, 0}};
    case 7: return {7, {1, 0}};
    case 8: return {8, {4, 3, 2, 0}};
    case 9: return {9, {4, 0}};
    case 10: return {10, {3, 0}};
    case 11: return {11, {2, 0}};
    default:
      throw UsageError("no miniature polynomial for degree " + std::to_string(degree));
  }
}

}  // namespace kcsprng
