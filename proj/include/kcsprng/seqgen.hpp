#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

#include "kcsprng/bits.hpp"
#include "kcsprng/error.hpp"
#include "kcsprng/lfsr.hpp"

namespace kcsprng {

inline constexpr std::size_t kKeyBits = 401;
inline constexpr std::size_t kIvBits = 173;
inline constexpr int kDiffusionClocks = 128;

/// x1x2 ^ x2x3 ^ x3x1, i.e. the majority of three bits.
constexpr bool combiner(bool x1, bool x2, bool x3) noexcept {
  return (x1 && x2) ^ (x2 && x3) ^ (x3 && x1);
}

/// Three LFSRs combined through the majority function.
class SubGenerator {
 public:
  SubGenerator() = default;

  explicit SubGenerator(std::array<GaloisLfsr, 3> regs) : regs_(regs) {
    const int a = regs_[0].degree(), b = regs_[1].degree(), c = regs_[2].degree();
    if (a == b || b == c || a == c)
      throw UsageError("SubGenerator: register degrees must be pairwise distinct");
  }

  bool step() noexcept { return combiner(regs_[0].step(), regs_[1].step(), regs_[2].step()); }

  GaloisLfsr& reg(std::size_t i) { return regs_.at(i); }
  const GaloisLfsr& reg(std::size_t i) const { return regs_.at(i); }

  int state_bits() const noexcept { return regs_[0].degree() + regs_[1].degree() + regs_[2].degree(); }

  friend bool operator==(const SubGenerator&, const SubGenerator&) = default;

 private:
  std::array<GaloisLfsr, 3> regs_{};
};

/// Alternating-step generator over three sub-generators. SG1 is the clock
/// controller: when it emits 1, SG2 is clocked, otherwise SG3; the output is
/// the XOR of the most recent SG2 and SG3 bits (both start at 0).
class SequenceGenerator {
 public:
  SequenceGenerator() = default;

  SequenceGenerator(SubGenerator sg1, SubGenerator sg2, SubGenerator sg3)
      : sg_{sg1, sg2, sg3} {}

  /// Registers L1..L9 built from `polys` with their states taken from `states`.
  static SequenceGenerator from_states(const std::array<FeedbackPolynomial, 9>& polys,
                                       const std::array<std::uint64_t, 9>& states) {
    std::array<GaloisLfsr, 9> r;
    for (std::size_t i = 0; i < 9; ++i) r[i] = GaloisLfsr(polys[i], states[i]);
    return SequenceGenerator(SubGenerator({r[0], r[1], r[2]}), SubGenerator({r[3], r[4], r[5]}),
                             SubGenerator({r[6], r[7], r[8]}));
  }

  bool step() noexcept {
    if (sg_[0].step())
      last_y2_ = sg_[1].step();
    else
      last_y3_ = sg_[2].step();
    return last_y2_ ^ last_y3_;
  }

  /// Appends `n` output bits to `out`.
  void generate(std::size_t n, BitStream& out) {
    out.reserve(out.size() + n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(step());
  }

  BitStream generate(std::size_t n) {
    BitStream out;
    generate(n, out);
    return out;
  }

  SubGenerator& sg(std::size_t i) { return sg_.at(i); }
  const SubGenerator& sg(std::size_t i) const { return sg_.at(i); }

  /// Register L(i+1), i in [0, 9).
  GaloisLfsr& reg(std::size_t i) { return sg_.at(i / 3).reg(i % 3); }
  const GaloisLfsr& reg(std::size_t i) const { return sg_.at(i / 3).reg(i % 3); }

  bool last_y2() const noexcept { return last_y2_; }
  bool last_y3() const noexcept { return last_y3_; }

  /// All register stages in key-loading order (each register MSB first).
  BitStream state_bits() const {
    BitStream out;
    for (std::size_t i = 0; i < 9; ++i) {
      const GaloisLfsr& r = reg(i);
      for (int s = r.degree() - 1; s >= 0; --s) out.push_back((r.state() >> s) & 1U);
    }
    return out;
  }

  void force_all_msb() noexcept {
    for (std::size_t i = 0; i < 9; ++i) reg(i).force_msb();
  }

  void wipe() noexcept {
    for (std::size_t i = 0; i < 9; ++i) reg(i).wipe();
    last_y2_ = last_y3_ = false;
  }

  friend bool operator==(const SequenceGenerator&, const SequenceGenerator&) = default;

 private:
  std::array<SubGenerator, 3> sg_{};
  bool last_y2_ = false;
  bool last_y3_ = false;
};

/// Loads `key` into registers built from `polys`: key bit 0 goes to stage
/// degree-1 of L1 and bits continue downwards through L1, then L2, ... L9.
/// Registers whose MSB ends up 0 get it forced to 1.
inline SequenceGenerator load_key(const std::array<FeedbackPolynomial, 9>& polys, const BitStream& key) {
  std::size_t total = 0;
  for (const auto& p : polys) total += static_cast<std::size_t>(p.degree);
  if (key.size() != total)
    throw SizeError("key must be " + std::to_string(total) + " bits, got " + std::to_string(key.size()));

  std::array<std::uint64_t, 9> states{};
  std::size_t pos = 0;
  for (std::size_t i = 0; i < 9; ++i) {
    std::uint64_t w = 0;
    for (int s = polys[i].degree - 1; s >= 0; --s, ++pos)
      if (key[pos]) w |= std::uint64_t{1} << s;
    states[i] = w;
  }
  auto gen = SequenceGenerator::from_states(polys, states);
  gen.force_all_msb();
  return gen;
}

/// Key/IV initialization: load and force MSBs, 128 diffusion clocks, one
/// clock per IV bit with (iv_bit ^ output) XORed into the MSB of each SG1
/// register, 128 more clocks, then every MSB forced to 1.
inline SequenceGenerator init_seqgen(const std::array<FeedbackPolynomial, 9>& polys, const BitStream& key,
                                     const BitStream& iv) {
  if (iv.size() != kIvBits)
    throw SizeError("IV must be " + std::to_string(kIvBits) + " bits, got " + std::to_string(iv.size()));

  SequenceGenerator gen = load_key(polys, key);
  for (int i = 0; i < kDiffusionClocks; ++i) gen.step();

  for (std::size_t i = 0; i < iv.size(); ++i) {
    const bool fb = iv[i] ^ gen.step();
    for (std::size_t r = 0; r < 3; ++r) gen.sg(0).reg(r).inject_msb(fb);
  }

  for (int i = 0; i < kDiffusionClocks; ++i) gen.step();
  gen.force_all_msb();
  return gen;
}

inline SequenceGenerator init_seqgen(const BitStream& key, const BitStream& iv) {
  if (key.size() != kKeyBits)
    throw SizeError("key must be " + std::to_string(kKeyBits) + " bits, got " + std::to_string(key.size()));
  return init_seqgen(standard_registers(), key, iv);
}

/// Linear complexity predicted for a majority combination of m-sequences with
/// pairwise distinct degrees: L1L2 + L2L3 + L1L3.
constexpr long long majority_linear_complexity(long long l1, long long l2, long long l3) noexcept {
  return l1 * l2 + l2 * l3 + l1 * l3;
}

}  // namespace kcsprng
