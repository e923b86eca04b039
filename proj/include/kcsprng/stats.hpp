#pragma once

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kcsprng/bits.hpp"
#include "kcsprng/error.hpp"

namespace kcsprng {

inline constexpr double kAlpha = 0.01;

struct TestReport {
  std::string name;
  double statistic = 0.0;
  std::optional<double> p_value;
  bool passed = false;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::string note;
};

namespace detail {

inline double igamc(double a, double x) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(a, x);
}

inline TestReport p_report(std::string name, double statistic, double p,
                           std::vector<std::pair<std::string, std::string>> params = {}) {
  p = std::clamp(p, 0.0, 1.0);
  return {std::move(name), statistic, p, p >= kAlpha, std::move(params), {}};
}

inline void require_length(const BitStream& s, std::size_t min, const char* test) {
  if (s.size() < min)
    throw ShortStreamError(std::string(test) + ": needs at least " + std::to_string(min) + " bits, got " +
                           std::to_string(s.size()));
}

/// Counts of every m-bit pattern over the n overlapping windows of `s`
/// extended cyclically by its first m-1 bits.
inline std::vector<std::uint64_t> pattern_counts(const BitStream& s, int m) {
  const std::size_t n = s.size();
  std::vector<std::uint64_t> counts(std::size_t{1} << m, 0);
  const std::uint64_t mask = (std::uint64_t{1} << m) - 1;
  std::uint64_t w = 0;
  for (int i = 0; i < m - 1; ++i) w = (w << 1) | (s[static_cast<std::size_t>(i) % n] ? 1U : 0U);
  for (std::size_t i = 0; i < n; ++i) {
    w = ((w << 1) | (s[(i + static_cast<std::size_t>(m) - 1) % n] ? 1U : 0U)) & mask;
    ++counts[w];
  }
  return counts;
}

inline double phi(const BitStream& s, int m) {
  if (m == 0) return 0.0;
  const double n = static_cast<double>(s.size());
  double sum = 0.0;
  for (std::uint64_t c : pattern_counts(s, m))
    if (c != 0) sum += (static_cast<double>(c) / n) * std::log(static_cast<double>(c) / n);
  return sum;
}

inline double psi2(const BitStream& s, int m) {
  if (m <= 0) return 0.0;
  const double n = static_cast<double>(s.size());
  double sum = 0.0;
  for (std::uint64_t c : pattern_counts(s, m)) sum += static_cast<double>(c) * static_cast<double>(c);
  return std::ldexp(sum, m) / n - n;
}

}  // namespace detail

/// Frequency (monobit) test.
inline TestReport monobit(const BitStream& s) {
  detail::require_length(s, 100, "monobit");
  const double n = static_cast<double>(s.size());
  const double sum = 2.0 * static_cast<double>(s.count_ones()) - n;
  const double stat = std::fabs(sum) / std::sqrt(n);
  return detail::p_report("monobit", stat, std::erfc(stat / std::sqrt(2.0)));
}

/// Frequency within M-bit blocks; trailing bits are ignored.
inline TestReport block_frequency(const BitStream& s, std::size_t M = 128) {
  detail::require_length(s, 100, "block_frequency");
  if (M < 2 || M > s.size()) throw UsageError("block_frequency: block size out of range");
  const std::size_t N = s.size() / M;
  double chi = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    std::size_t ones = 0;
    for (std::size_t j = 0; j < M; ++j) ones += s[i * M + j] ? 1 : 0;
    const double pi = static_cast<double>(ones) / static_cast<double>(M) - 0.5;
    chi += pi * pi;
  }
  chi *= 4.0 * static_cast<double>(M);
  return detail::p_report("block_frequency", chi, detail::igamc(static_cast<double>(N) / 2.0, chi / 2.0),
                          {{"M", std::to_string(M)}, {"N", std::to_string(N)}});
}

/// Runs test. When the proportion of ones is too far from 1/2 the test is
/// not applicable and reports p = 0.
inline TestReport runs_test(const BitStream& s) {
  detail::require_length(s, 100, "runs");
  const double n = static_cast<double>(s.size());
  const double pi = static_cast<double>(s.count_ones()) / n;
  const double tau = 2.0 / std::sqrt(n);
  if (std::fabs(pi - 0.5) >= tau) {
    TestReport r{"runs", 0.0, 0.0, false, {{"pi", std::to_string(pi)}}, "prerequisite failed: |pi - 1/2| >= 2/sqrt(n)"};
    return r;
  }
  std::size_t v = 1;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) v += s[k] != s[k + 1] ? 1 : 0;
  const double vd = static_cast<double>(v);
  const double p = std::erfc(std::fabs(vd - 2.0 * n * pi * (1.0 - pi)) / (2.0 * std::sqrt(2.0 * n) * pi * (1.0 - pi)));
  return detail::p_report("runs", vd, p, {{"pi", std::to_string(pi)}});
}

/// Longest run of ones in a block. Block size follows the stream length:
/// M = 8 below 6272 bits, 128 below 750 000, 10 000 above.
inline TestReport longest_run(const BitStream& s) {
  detail::require_length(s, 128, "longest_run");
  const std::size_t n = s.size();
  std::size_t M = 0;
  int lo = 0, hi = 0;
  std::vector<double> pis;
  if (n < 6272) {
    M = 8, lo = 1, hi = 4;
    pis = {0.2148, 0.3672, 0.2305, 0.1875};
  } else if (n < 750000) {
    M = 128, lo = 4, hi = 9;
    pis = {0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124};
  } else {
    M = 10000, lo = 10, hi = 16;
    pis = {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727};
  }
  const std::size_t N = n / M;
  std::vector<double> nu(pis.size(), 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    int best = 0, cur = 0;
    for (std::size_t j = 0; j < M; ++j) {
      cur = s[i * M + j] ? cur + 1 : 0;
      best = std::max(best, cur);
    }
    best = std::clamp(best, lo, hi);
    nu[static_cast<std::size_t>(best - lo)] += 1.0;
  }
  double chi = 0.0;
  const double Nd = static_cast<double>(N);
  for (std::size_t i = 0; i < pis.size(); ++i) chi += (nu[i] - Nd * pis[i]) * (nu[i] - Nd * pis[i]) / (Nd * pis[i]);
  const double K = static_cast<double>(pis.size() - 1);
  return detail::p_report("longest_run", chi, detail::igamc(K / 2.0, chi / 2.0),
                          {{"M", std::to_string(M)}, {"N", std::to_string(N)}});
}

inline TestReport approximate_entropy(const BitStream& s, int m = 10) {
  if (m < 1 || m > 24) throw UsageError("approximate_entropy: m out of range");
  detail::require_length(s, std::size_t{1} << m, "approximate_entropy");
  const double n = static_cast<double>(s.size());
  const double apen = detail::phi(s, m) - detail::phi(s, m + 1);
  const double chi = 2.0 * n * (std::log(2.0) - apen);
  return detail::p_report("approximate_entropy", chi, detail::igamc(std::ldexp(1.0, m - 1), chi / 2.0),
                          {{"m", std::to_string(m)}, {"ApEn", std::to_string(apen)}});
}

/// Serial test; both p-values, as two reports.
inline std::array<TestReport, 2> serial_test(const BitStream& s, int m = 16) {
  if (m < 2 || m > 24) throw UsageError("serial: m out of range");
  detail::require_length(s, std::size_t{1} << (m - 1), "serial");
  const double p0 = detail::psi2(s, m), p1 = detail::psi2(s, m - 1), p2 = detail::psi2(s, m - 2);
  const double d1 = p0 - p1;
  const double d2 = p0 - 2.0 * p1 + p2;
  const std::vector<std::pair<std::string, std::string>> params{{"m", std::to_string(m)}};
  return {detail::p_report("serial_1", d1, detail::igamc(std::ldexp(1.0, m - 2), d1 / 2.0), params),
          detail::p_report("serial_2", d2, detail::igamc(std::ldexp(1.0, m - 3), d2 / 2.0), params)};
}

/// Lag-d autocorrelation: A = #{i : b_i != b_{i+d}}, z = 2(A - (n-d)/2)/sqrt(n-d).
inline TestReport autocorrelation(const BitStream& s, std::size_t d) {
  if (d < 1 || d > s.size() / 2)
    throw UsageError("autocorrelation: lag must satisfy 1 <= d <= n/2 (n = " + std::to_string(s.size()) + ")");
  const std::size_t len = s.size() - d;
  std::size_t a = 0;
  for (std::size_t i = 0; i < len; ++i) a += s[i] != s[i + d] ? 1 : 0;
  const double z = 2.0 * (static_cast<double>(a) - static_cast<double>(len) / 2.0) / std::sqrt(static_cast<double>(len));
  return detail::p_report("autocorrelation", z, std::erfc(std::fabs(z) / std::sqrt(2.0)), {{"d", std::to_string(d)}});
}

/// Shannon entropy of the bit marginal, in bits per bit.
inline double entropy_per_bit(const BitStream& s) {
  if (s.empty()) throw ShortStreamError("entropy_per_bit: empty stream");
  const double p1 = static_cast<double>(s.count_ones()) / static_cast<double>(s.size());
  const double p0 = 1.0 - p1;
  double h = 0.0;
  if (p0 > 0.0) h -= p0 * std::log2(p0);
  if (p1 > 0.0) h -= p1 * std::log2(p1);
  return h;
}

/// Serial correlation of successive bytes, cyclic, as ENT computes it. A
/// stream of identical bytes (zero variance) is reported as 1.
inline double serial_correlation(const BitStream& s) {
  const std::size_t nbytes = s.size() / 8;
  if (nbytes < 2) throw ShortStreamError("serial_correlation: needs at least 2 whole bytes");
  const auto& b = s.bytes();
  double t1 = 0.0, t2 = 0.0, t3 = 0.0;
  for (std::size_t i = 0; i < nbytes; ++i) {
    const double u = b[i];
    const double v = b[(i + 1) % nbytes];
    t1 += u * v;
    t2 += u * u;
    t3 += u;
  }
  const double N = static_cast<double>(nbytes);
  const double den = N * t2 - t3 * t3;
  if (den == 0.0) return 1.0;
  return (N * t1 - t3 * t3) / den;
}

/// Length of the shortest LFSR that generates `s` (Berlekamp-Massey over GF(2)).
inline std::size_t berlekamp_massey(const BitStream& s) {
  const std::size_t n = s.size();
  if (n == 0) return 0;
  const std::size_t words = n / 64 + 2;
  // r holds s reversed, LSB-first, so that s[N-i] for i = 0.. is a contiguous run of r.
  std::vector<std::uint64_t> r(words + 1, 0), c(words, 0), b(words, 0), t(words, 0);
  for (std::size_t j = 0; j < n; ++j)
    if (s[n - 1 - j]) r[j >> 6] |= std::uint64_t{1} << (j & 63);
  auto window = [&r](std::size_t off) {
    const std::size_t w = off >> 6, sh = off & 63;
    return sh == 0 ? r[w] : (r[w] >> sh) | (r[w + 1] << (64 - sh));
  };
  c[0] = b[0] = 1;
  std::size_t L = 0, m = 0;
  bool have_m = false;
  for (std::size_t N = 0; N < n; ++N) {
    const std::size_t base = n - 1 - N;
    std::uint64_t acc = 0;
    const std::size_t cw = L / 64 + 1;
    for (std::size_t k = 0; k < cw && base + 64 * k < n; ++k) acc ^= c[k] & window(base + 64 * k);
    if (!(__builtin_popcountll(acc) & 1)) continue;

    const std::size_t shift = have_m ? N - m : N + 1;
    const bool grow = 2 * L <= N;
    if (grow) t = c;
    const std::size_t ws = shift >> 6, bs = shift & 63;
    for (std::size_t k = words; k-- > ws;) {
      std::uint64_t v = b[k - ws] << bs;
      if (bs != 0 && k > ws) v |= b[k - ws - 1] >> (64 - bs);
      c[k] ^= v;
    }
    if (grow) {
      L = N + 1 - L;
      b = t;
      m = N;
      have_m = true;
    }
  }
  return L;
}

inline std::size_t linear_complexity(const BitStream& s) { return berlekamp_massey(s); }

// ---------------------------------------------------------------------------
// Raw bitstream files (MSB-first packing)
// ---------------------------------------------------------------------------

inline BitStream read_bitstream(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw IoError("error reading " + path.string());
  return BitStream::from_bytes(bytes);
}

/// Packs bits MSB-first into a byte stream; the final partial byte is zero-padded.
class BitWriter {
 public:
  explicit BitWriter(std::ostream& os) : os_(os) {}

  void write(const BitStream& bits) {
    for (std::size_t i = 0; i < bits.size(); ++i) {
      acc_ = static_cast<std::uint8_t>((acc_ << 1) | (bits[i] ? 1 : 0));
      if (++fill_ == 8) {
        buf_.push_back(static_cast<char>(acc_));
        acc_ = 0;
        fill_ = 0;
      }
    }
    if (buf_.size() >= (1U << 16)) flush_buffer();
    bits_ += bits.size();
  }

  /// Flushes everything; returns the number of pad bits in the last byte.
  int finish() {
    int pad = 0;
    if (fill_ != 0) {
      pad = 8 - fill_;
      buf_.push_back(static_cast<char>(acc_ << pad));
      acc_ = 0;
      fill_ = 0;
    }
    flush_buffer();
    os_.flush();
    if (!os_) throw IoError("write failed");
    return pad;
  }

  std::size_t bits_written() const noexcept { return bits_; }

 private:
  void flush_buffer() {
    os_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!os_) throw IoError("write failed");
    buf_.clear();
  }

  std::ostream& os_;
  std::string buf_;
  std::uint8_t acc_ = 0;
  int fill_ = 0;
  std::size_t bits_ = 0;
};

/// Writes `bits` to `path`; returns the pad length of the final byte.
inline int write_bitstream(const std::filesystem::path& path, const BitStream& bits) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  BitWriter w(out);
  w.write(bits);
  return w.finish();
}

}  // namespace kcsprng
