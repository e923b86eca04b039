#pragma once

#include <sys/random.h>

#include <algorithm>
#include <cerrno>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kcsprng/bits.hpp"
#include "kcsprng/curvestore.hpp"
#include "kcsprng/ecc.hpp"
#include "kcsprng/error.hpp"
#include "kcsprng/seqgen.hpp"

namespace kcsprng {

inline constexpr std::size_t kSeedBits = kKeyBits + kIvBits;  // 574
inline constexpr std::size_t kSeedBytes = 72;
inline constexpr std::size_t kReseedInterval = 100000;
inline constexpr std::size_t kBlockBits = 256;

/// One (re)seed worth of entropy: a 401-bit key and a 173-bit IV. The bits
/// are wiped when the object is destroyed.
class Seed {
 public:
  Seed(BitStream key, BitStream iv) : key_(std::move(key)), iv_(std::move(iv)) {
    if (key_.size() != kKeyBits) throw SizeError("seed key must be 401 bits");
    if (iv_.size() != kIvBits) throw SizeError("seed IV must be 173 bits");
  }

  /// 72 bytes, MSB-first: bits 0..400 key, 401..573 IV, the rest ignored.
  static Seed from_bytes(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kSeedBytes) throw SizeError("a seed segment is 72 bytes");
    BitStream all = BitStream::from_bytes(bytes.first(kSeedBytes), kSeedBits);
    Seed s(all.slice(0, kKeyBits), all.slice(kKeyBits, kIvBits));
    all.shred();
    return s;
  }

  Seed(const Seed&) = delete;
  Seed& operator=(const Seed&) = delete;
  Seed(Seed&&) noexcept = default;
  Seed& operator=(Seed&&) noexcept = default;
  ~Seed() { shred(); }

  const BitStream& key() const noexcept { return key_; }
  const BitStream& iv() const noexcept { return iv_; }

  void shred() noexcept {
    key_.shred();
    iv_.shred();
  }

  /// The 72-byte segment encoding of this seed (trailing pad bits zero).
  std::vector<std::uint8_t> to_bytes() const {
    BitStream all = key_;
    all.append(iv_);
    std::vector<std::uint8_t> out = all.bytes();
    out.resize(kSeedBytes, 0);
    all.shred();
    return out;
  }

 private:
  BitStream key_;
  BitStream iv_;
};

/// Supplies fresh seeds on demand.
class EntropySource {
 public:
  virtual ~EntropySource() = default;
  /// Throws EntropyError when no fresh material is left.
  virtual Seed pull() = 0;
  virtual std::string describe() const = 0;
};

/// Consecutive 72-byte segments of an in-memory buffer; each segment is
/// handed out once and wiped.
class SeedBufferSource : public EntropySource {
 public:
  explicit SeedBufferSource(std::vector<std::uint8_t> bytes, std::string name = "seed buffer")
      : bytes_(std::move(bytes)), name_(std::move(name)) {
    if (bytes_.size() < kSeedBytes)
      throw EntropyError(name_ + ": needs at least 72 bytes, has " + std::to_string(bytes_.size()));
  }

  ~SeedBufferSource() override {
    volatile std::uint8_t* p = bytes_.data();
    for (std::size_t i = 0; i < bytes_.size(); ++i) p[i] = 0;
  }

  Seed pull() override {
    if (remaining() == 0)
      throw EntropyError(name_ + ": exhausted after " + std::to_string(next_) + " seed(s)");
    const auto first = bytes_.begin() + static_cast<std::ptrdiff_t>(next_ * kSeedBytes);
    Seed s = Seed::from_bytes(std::span<const std::uint8_t>(&*first, kSeedBytes));
    std::fill(first, first + static_cast<std::ptrdiff_t>(kSeedBytes), std::uint8_t{0});
    ++next_;
    return s;
  }

  std::size_t remaining() const noexcept { return bytes_.size() / kSeedBytes - next_; }
  std::string describe() const override { return name_; }

 private:
  std::vector<std::uint8_t> bytes_;
  std::string name_;
  std::size_t next_ = 0;
};

/// Seed file: one 72-byte segment per (re)seed. Never reuses a segment.
class SeedFileSource : public SeedBufferSource {
 public:
  explicit SeedFileSource(const std::filesystem::path& path)
      : SeedBufferSource(read_all(path), "seed file " + path.string()) {}

 private:
  static std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw EntropyError("cannot open seed file " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }
};

/// Operating-system randomness (getrandom). Convenient, but not the
/// physical-noise entropy the construction assumes.
class OsEntropySource : public EntropySource {
 public:
  Seed pull() override {
    std::uint8_t buf[kSeedBytes];
    std::size_t off = 0;
    while (off < kSeedBytes) {
      const auto n = ::getrandom(buf + off, kSeedBytes - off, 0);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw EntropyError(std::string("getrandom failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
    Seed s = Seed::from_bytes(buf);
    volatile std::uint8_t* p = buf;
    for (std::size_t i = 0; i < kSeedBytes; ++i) p[i] = 0;
    return s;
  }
  std::string describe() const override { return "OS randomness (getrandom)"; }
};

/// The generator: an alternating-step sequence generator whose output is
/// masked with x-coordinates of two elliptic-curve points, alternating per
/// 256-bit block, re-keyed every 100 000 output bits.
class KcsPrng {
 public:
  /// Selects a curve pair from `table`, pulls one seed and initializes.
  /// The seed is pulled first, so a dry entropy source leaves the table untouched.
  static KcsPrng boot(std::shared_ptr<EntropySource> entropy, CurveTable& table,
                      SelectMode mode = SelectMode::rotate) {
    if (!entropy) throw UsageError("boot: no entropy source");
    if (table.size() < 2)
      throw TableError("curve table needs at least 2 curves, has " + std::to_string(table.size()));
    Seed seed = entropy->pull();
    const CurveSelection sel = table.select_pair(mode);
    KcsPrng g(sel.first.curve, sel.second.curve, std::move(entropy), seed);
    g.selection_ = sel;
    return g;
  }

  /// Boot with an explicit curve pair (no table involved).
  static KcsPrng with_curves(const CurveParams& c1, const CurveParams& c2, std::shared_ptr<EntropySource> entropy) {
    if (!entropy) throw UsageError("no entropy source");
    Seed seed = entropy->pull();
    return KcsPrng(c1, c2, std::move(entropy), seed);
  }

  /// Next `n` output bits.
  BitStream generate(std::size_t n) {
    BitStream out;
    out.reserve(n);
    generate(n, [&out](const BitStream& seg) { out.append(seg); });
    return out;
  }

  /// Streams `n` output bits to `sink` in segments that end at reseed
  /// boundaries. If a reseed fails, the segments already delivered stand and
  /// nothing of the failed segment is emitted.
  void generate(std::size_t n, const std::function<void(const BitStream&)>& sink) {
    if (n == 0) throw UsageError("generate: bit count must be at least 1");
    const bool bitwise = n < kBlockBits;
    if (!bitwise && pos_in_block_ != 0) {
      ++block_index_;
      pos_in_block_ = 0;
    }
    std::size_t remaining = n;
    while (remaining > 0) {
      if (bits_since_seed_ >= kReseedInterval) reseed();
      const std::size_t chunk = std::min(remaining, kReseedInterval - bits_since_seed_);
      BitStream seg;
      seg.reserve(chunk);
      for (std::size_t i = 0; i < chunk; ++i) seg.push_back(next_bit(bitwise));
      bits_since_seed_ += chunk;
      bits_emitted_ += chunk;
      remaining -= chunk;
      sink(seg);
    }
  }

  /// Pulls a fresh seed, re-initializes the sequence generator and re-derives
  /// both masks. Curves, block index and bit position are kept.
  void reseed() {
    Seed seed = entropy_->pull();
    seqgen_ = init_seqgen(seed.key(), seed.iv());
    seed.shred();
    ++seeds_consumed_;
    derive_masks();
    bits_since_seed_ = 0;
  }

  const SequenceGenerator& seqgen() const noexcept { return seqgen_; }
  const CurveParams& curve1() const noexcept { return ec1_.params(); }
  const CurveParams& curve2() const noexcept { return ec2_.params(); }
  const U256& mask1() const noexcept { return pb1_; }
  const U256& mask2() const noexcept { return pb2_; }
  const std::optional<CurveSelection>& selection() const noexcept { return selection_; }

  std::size_t bits_since_seed() const noexcept { return bits_since_seed_; }
  std::size_t block_index() const noexcept { return block_index_; }
  std::size_t bit_position() const noexcept { return pos_in_block_; }
  std::size_t seeds_consumed() const noexcept { return seeds_consumed_; }
  std::size_t bits_emitted() const noexcept { return bits_emitted_; }

  /// log2 of the key space for the output produced so far: 529 per seed while
  /// at most 256 bits have been emitted, 657 per seed beyond that.
  std::size_t key_space_exponent() const noexcept {
    return seeds_consumed_ * (bits_emitted_ <= kBlockBits ? 529 : 657);
  }

 private:
  KcsPrng(const CurveParams& c1, const CurveParams& c2, std::shared_ptr<EntropySource> entropy, Seed& seed)
      : ec1_(c1), ec2_(c2), entropy_(std::move(entropy)) {
    seqgen_ = init_seqgen(seed.key(), seed.iv());
    seed.shred();
    seeds_consumed_ = 1;
    derive_masks();
  }

  void derive_masks() {
    pb1_ = derive_mask(ec1_);
    pb2_ = derive_mask(ec2_);
  }

  /// 256 sequence bits -> scalar -> x(k * G). An identity result (k a
  /// multiple of the base point order) bumps k by one.
  U256 derive_mask(const EllipticCurve& ec) {
    const BitStream z = seqgen_.generate(kBlockBits);
    U256 k = field_convert(z, ec.params());
    while (true) {
      const CurvePoint P = ec.mul(k, ec.base_point());
      if (!P.is_identity()) return P.x;
      k = k + U256(1);
      if (!(k < ec.params().p)) k = U256(1);
    }
  }

  bool next_bit(bool bitwise) noexcept {
    const U256& el = (block_index_ % 2 == 0) ? pb1_ : pb2_;
    // Bitwise requests walk the mask from its LSB; block requests XOR the
    // big-endian 256-bit string position by position.
    const bool mask_bit = bitwise ? el.bit(pos_in_block_) : el.bit(kBlockBits - 1 - pos_in_block_);
    const bool out = mask_bit ^ seqgen_.step();
    if (++pos_in_block_ == kBlockBits) {
      pos_in_block_ = 0;
      ++block_index_;
    }
    return out;
  }

  SequenceGenerator seqgen_;
  EllipticCurve ec1_;
  EllipticCurve ec2_;
  std::shared_ptr<EntropySource> entropy_;
  U256 pb1_{}, pb2_{};
  std::optional<CurveSelection> selection_;
  std::size_t bits_since_seed_ = 0;
  std::size_t block_index_ = 0;
  std::size_t pos_in_block_ = 0;
  std::size_t seeds_consumed_ = 0;
  std::size_t bits_emitted_ = 0;
};

}  // namespace kcsprng
