#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "kcsprng/bits.hpp"
#include "kcsprng/curvestore.hpp"
#include "kcsprng/generator.hpp"
#include "kcsprng/lfsr.hpp"
#include "kcsprng/seqgen.hpp"

namespace kcsprng::test {

inline std::filesystem::path data_path(const std::string& name) { return std::filesystem::path(KCSPRNG_DATA_DIR) / name; }

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("kcsprng_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<std::uint8_t> random_seed_bytes(std::mt19937_64& rng, std::size_t seeds) {
  std::vector<std::uint8_t> out(seeds * kSeedBytes);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng());
  return out;
}

inline void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::vector<std::uint8_t> table4_seed_bytes() { return read_bytes(data_path("table4_seed.bin")); }

/// Majority-combiner sub-generator on miniature registers.
inline SubGenerator miniature_subgen(int d1, int d2, int d3, std::uint64_t s1, std::uint64_t s2, std::uint64_t s3) {
  return SubGenerator({GaloisLfsr(miniature_polynomial(d1), s1), GaloisLfsr(miniature_polynomial(d2), s2),
                       GaloisLfsr(miniature_polynomial(d3), s3)});
}

// ---------------------------------------------------------------------------
// Stage-by-stage reference model of the sequence generator, written against
// the polynomial exponents directly (no word-level tap masks).
// ---------------------------------------------------------------------------

struct RefRegister {
  int degree = 0;
  std::vector<int> exponents;
  std::vector<std::uint8_t> stage;  // stage[0] is the output stage

  explicit RefRegister(const FeedbackPolynomial& p) : degree(p.degree), exponents(p.exponents), stage(p.degree, 0) {}

  bool step() {
    const std::uint8_t out = stage[0];
    for (int i = 0; i + 1 < degree; ++i) stage[i] = stage[i + 1];
    stage[degree - 1] = 0;
    if (out) {
      // x^-1 * (x^d + sum x^e + 1) feedback: x^(d-1) and x^(e-1) for e > 0.
      stage[degree - 1] ^= 1;
      for (int e : exponents)
        if (e > 0) stage[e - 1] ^= 1;
    }
    return out != 0;
  }
};

struct RefSeqGen {
  std::vector<RefRegister> regs;
  bool y2 = false, y3 = false;

  explicit RefSeqGen(const std::array<FeedbackPolynomial, 9>& polys) {
    for (const auto& p : polys) regs.emplace_back(p);
  }

  static bool maj(bool a, bool b, bool c) { return (a + b + c) >= 2; }
  bool sg(int k) { return maj(regs[3 * k].step(), regs[3 * k + 1].step(), regs[3 * k + 2].step()); }

  bool step() {
    if (sg(0))
      y2 = sg(1);
    else
      y3 = sg(2);
    return y2 != y3;
  }

  void force_msbs() {
    for (auto& r : regs) r.stage[r.degree - 1] = 1;
  }

  void init(const BitStream& key, const BitStream& iv) {
    std::size_t pos = 0;
    for (auto& r : regs)
      for (int s = r.degree - 1; s >= 0; --s) r.stage[s] = key[pos++];
    force_msbs();
    for (int i = 0; i < 128; ++i) step();
    for (std::size_t i = 0; i < iv.size(); ++i) {
      const bool fb = iv[i] != step();
      for (int r = 0; r < 3; ++r) regs[r].stage[regs[r].degree - 1] ^= fb;
    }
    for (int i = 0; i < 128; ++i) step();
    force_msbs();
  }
};

}  // namespace kcsprng::test
