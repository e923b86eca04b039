#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "kcsprng/restart.hpp"
#include "kcsprng/stats.hpp"
#include "support.hpp"

using namespace kcsprng;
using kcsprng::test::TempDir;

namespace {

// Reference vectors and p-values computed with an arbitrary-precision
// implementation of the same formulas (they also agree with the published
// worked examples for these vectors).
const BitStream& eps100() {
  static const auto s = BitStream::from_string(
      "1100100100001111110110101010001000100001011010001100001000110100110001001100011001100010100010111000");
  return s;
}

constexpr double kTol = 1e-9;

BitStream alternating(std::size_t n) {
  BitStream s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(i & 1);
  return s;
}

BitStream random_bits(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  BitStream s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(rng() & 1);
  return s;
}

// Shortest LFSR by brute force: smallest L with connection taps c_1..c_L such
// that s_j = sum c_i s_{j-i} for every j >= L.
std::size_t brute_force_lc(const std::vector<int>& s) {
  const std::size_t n = s.size();
  for (std::size_t L = 0; L <= n; ++L) {
    for (std::uint32_t c = 0; c < (1U << L); ++c) {
      bool ok = true;
      for (std::size_t j = L; j < n && ok; ++j) {
        int v = 0;
        for (std::size_t i = 1; i <= L; ++i) v ^= ((c >> (i - 1)) & 1) & s[j - i];
        ok = v == s[j];
      }
      if (ok) return L;
    }
  }
  return n;
}

}  // namespace

TEST(Monobit, ReferenceVector) {
  const auto r = monobit(eps100());
  EXPECT_NEAR(*r.p_value, 0.10959858339911599, kTol);
  EXPECT_TRUE(r.passed);
}

TEST(Monobit, ExtremeStreams) {
  const auto zeros = monobit(BitStream(1000));
  EXPECT_LT(*zeros.p_value, 1e-100);
  EXPECT_FALSE(zeros.passed);
  const auto alt = monobit(alternating(1000));
  EXPECT_DOUBLE_EQ(*alt.p_value, 1.0);
  EXPECT_TRUE(alt.passed);
  EXPECT_THROW(monobit(BitStream(99)), ShortStreamError);
}

TEST(BlockFrequency, ReferenceVector) {
  EXPECT_NEAR(*block_frequency(eps100(), 10).p_value, 0.70643844964128078, kTol);
}

TEST(Runs, ReferenceVector) {
  const auto r = runs_test(eps100());
  EXPECT_NEAR(*r.p_value, 0.50079791788708938, kTol);
  EXPECT_DOUBLE_EQ(r.statistic, 52.0);
}

TEST(Runs, PrerequisiteFailureIsReported) {
  const auto r = runs_test(BitStream(500, true));
  EXPECT_FALSE(r.passed);
  EXPECT_FALSE(r.note.empty());
  EXPECT_DOUBLE_EQ(*r.p_value, 0.0);
}

TEST(Runs, AlternationHasMaximalRunCount) {
  const auto r = runs_test(alternating(1000));
  EXPECT_DOUBLE_EQ(r.statistic, 1000.0);  // n - 1 transitions
  ASSERT_TRUE(r.p_value.has_value());
  EXPECT_FALSE(r.passed);
}

TEST(LongestRun, ReferenceVector) {
  const auto s = BitStream::from_string(
      "11001100000101010110110001001100111000000000001001001101010100010001001111010110100000001101011111001100111001"
      "101101100010110010");
  EXPECT_NEAR(*longest_run(s).p_value, 0.18059797678555817, kTol);
  EXPECT_THROW(longest_run(BitStream(127)), ShortStreamError);
}

TEST(ApproximateEntropy, ReferenceVector) {
  EXPECT_NEAR(*approximate_entropy(eps100(), 2).p_value, 0.23530074585898297, kTol);
}

TEST(Serial, ReferenceVector) {
  const auto m2 = serial_test(eps100(), 2);
  EXPECT_NEAR(*m2[0].p_value, 0.25666077695355588, kTol);
  EXPECT_NEAR(*m2[1].p_value, 0.68915651677935167, kTol);
  const auto m3 = serial_test(eps100(), 3);
  EXPECT_NEAR(*m3[0].p_value, 0.30844104118400251, kTol);
  EXPECT_NEAR(*m3[1].p_value, 0.35345468195878015, kTol);
}

TEST(Serial, ShortWorkedExample) {
  const auto r = serial_test(BitStream::from_string("0011011101"), 3);
  EXPECT_NEAR(*r[0].p_value, 0.80879213541099886, kTol);
  EXPECT_NEAR(*r[1].p_value, 0.6703200460356393, kTol);
}

TEST(Autocorrelation, ReferenceVector) {
  EXPECT_NEAR(autocorrelation(eps100(), 1).statistic, 0.30151134457776362, kTol);
  EXPECT_NEAR(autocorrelation(eps100(), 3).statistic, 0.71074231559353333, kTol);
}

TEST(Autocorrelation, ExtremeStreams) {
  const auto alt = autocorrelation(alternating(1000), 1);
  EXPECT_NEAR(alt.statistic, std::sqrt(999.0), 1e-9);
  EXPECT_FALSE(alt.passed);
  const auto flat = autocorrelation(BitStream(1000), 1);
  EXPECT_NEAR(flat.statistic, -std::sqrt(999.0), 1e-9);
  EXPECT_FALSE(flat.passed);
}

TEST(Autocorrelation, LagRange) {
  EXPECT_THROW(autocorrelation(eps100(), 0), UsageError);
  EXPECT_THROW(autocorrelation(eps100(), 51), UsageError);
  EXPECT_NO_THROW(autocorrelation(eps100(), 50));
}

TEST(Reports, PValuesInUnitInterval) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s = random_bits(seed, 20000);
    std::vector<TestReport> all{monobit(s), block_frequency(s), runs_test(s), longest_run(s),
                                approximate_entropy(s, 8), autocorrelation(s, 2)};
    for (auto& r : serial_test(s, 8)) all.push_back(r);
    for (const auto& r : all) {
      ASSERT_TRUE(r.p_value.has_value()) << r.name;
      EXPECT_GE(*r.p_value, 0.0) << r.name;
      EXPECT_LE(*r.p_value, 1.0) << r.name;
    }
  }
}

TEST(EntropyPerBit, Extremes) {
  EXPECT_DOUBLE_EQ(entropy_per_bit(BitStream(64)), 0.0);
  EXPECT_DOUBLE_EQ(entropy_per_bit(alternating(64)), 1.0);
  EXPECT_NEAR(entropy_per_bit(BitStream::from_string("0001")), 0.8112781244591328, 1e-12);
  EXPECT_THROW(entropy_per_bit(BitStream()), ShortStreamError);
}

TEST(SerialCorrelation, ConstantBytesGiveOne) {
  BitStream s;
  for (int i = 0; i < 1000; ++i) s.append(BitStream::from_string("10101010"));
  EXPECT_DOUBLE_EQ(serial_correlation(s), 1.0);
}

TEST(SerialCorrelation, KnownGoodGeneratorIsUncorrelated) {
  EXPECT_LT(std::fabs(serial_correlation(random_bits(77, 8 * 200000))), 0.01);
}

TEST(SerialCorrelation, PerfectAlternationOfBytes) {
  // 0x00, 0xFF, 0x00, ... : every successor is the opposite extreme.
  BitStream s;
  for (int i = 0; i < 1000; ++i) s.append(BitStream::from_string(i % 2 ? "11111111" : "00000000"));
  EXPECT_NEAR(serial_correlation(s), -1.0, 1e-12);
}

TEST(BerlekampMassey, SmallCases) {
  EXPECT_EQ(berlekamp_massey(BitStream()), 0U);
  EXPECT_EQ(berlekamp_massey(BitStream(50)), 0U);
  EXPECT_EQ(berlekamp_massey(BitStream::from_string("0001")), 4U);
  EXPECT_EQ(berlekamp_massey(BitStream::from_string("1111111")), 1U);
  EXPECT_EQ(berlekamp_massey(alternating(40)), 2U);
}

TEST(BerlekampMassey, Degree3MSequence) {
  GaloisLfsr r(miniature_polynomial(3), 1);
  BitStream s;
  for (int i = 0; i < 6; ++i) s.push_back(r.step());
  EXPECT_EQ(berlekamp_massey(s), 3U);
}

TEST(BerlekampMassey, ExhaustiveUpToSixteenBits) {
  for (std::size_t n = 1; n <= 16; ++n) {
    for (std::uint32_t v = 0; v < (1U << n); ++v) {
      std::vector<int> bits(n);
      BitStream s;
      for (std::size_t i = 0; i < n; ++i) {
        bits[i] = (v >> i) & 1;
        s.push_back(bits[i]);
      }
      ASSERT_EQ(berlekamp_massey(s), brute_force_lc(bits)) << "n=" << n << " v=" << v;
    }
  }
}

TEST(BerlekampMassey, LongSequencesCrossWordBoundaries) {
  // Sum of two independent m-sequences has complexity equal to the sum of degrees.
  GaloisLfsr a(standard_registers()[0], 0x1234567), b(standard_registers()[8], 0x0FEDCBA987654321ULL);
  BitStream s;
  for (int i = 0; i < 400; ++i) s.push_back(a.step() != b.step());
  EXPECT_EQ(berlekamp_massey(s), 29U + 61U);
  EXPECT_GT(berlekamp_massey(random_bits(5, 2000)), 900U);
}

// ---------------------------------------------------------------------------
// Restart harness
// ---------------------------------------------------------------------------

namespace {

std::filesystem::path copy_table(const TempDir& dir, std::size_t keep = 12) {
  auto t = CurveTable::load(test::data_path("curves.tbl"), {.verify = false, .lock = false});
  std::vector<CurveRecord> recs(t.records().begin(), t.records().begin() + static_cast<std::ptrdiff_t>(keep));
  const auto path = dir / "curves.tbl";
  CurveTable::in_memory(recs).save_as(path);
  return path;
}

}  // namespace

TEST(RestartTest, SixBootsGiveDistinctPrefixes) {
  TempDir dir("restart6");
  auto table = CurveTable::load(copy_table(dir));
  const auto rep = restart_test(test::data_path("table4_seed.bin"), table, 6, 32);
  EXPECT_EQ(rep.verdict, RestartVerdict::distinct);
  EXPECT_TRUE(rep.all_distinct);
  ASSERT_EQ(rep.boots.size(), 6U);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(rep.boots[i].curve1, 2 * i);
    EXPECT_EQ(rep.boots[i].curve2, 2 * i + 1);
  }
  EXPECT_EQ(table.unused_count(), 0U);
}

TEST(RestartTest, FrozenStatusesGiveDeterminism) {
  TempDir dir("restartfrozen");
  auto table = CurveTable::load(copy_table(dir));
  const auto rep = restart_test(test::data_path("table4_seed.bin"), table, 2, 256, SelectMode::frozen);
  EXPECT_EQ(rep.boots[0].prefix, rep.boots[1].prefix);
  EXPECT_EQ(rep.verdict, RestartVerdict::frozen_determinism);
  EXPECT_FALSE(rep.failed());
  EXPECT_EQ(table.unused_count(), 12U);
}

TEST(RestartTest, TwoCurveTableWarnsAboutExhaustion) {
  TempDir dir("restart2");
  auto table = CurveTable::load(copy_table(dir, 2));
  const auto rep = restart_test(test::data_path("table4_seed.bin"), table, 2, 64);
  EXPECT_FALSE(rep.boots[0].statuses_reset);
  EXPECT_TRUE(rep.boots[1].statuses_reset);
  EXPECT_EQ(rep.boots[0].prefix, rep.boots[1].prefix);
  EXPECT_EQ(rep.verdict, RestartVerdict::rotation_exhausted);
  EXPECT_FALSE(rep.failed());
}

TEST(RestartTest, Preconditions) {
  TempDir dir("restartpre");
  auto one = CurveTable::in_memory({{0, false, reference_curves()[0]}});
  EXPECT_THROW(restart_test(test::data_path("table4_seed.bin"), one, 2, 32), TableError);
  auto table = CurveTable::load(copy_table(dir));
  EXPECT_THROW(restart_test(test::data_path("table4_seed.bin"), table, 1, 32), UsageError);
  EXPECT_THROW(restart_test(test::data_path("table4_seed.bin"), table, 2, 0), UsageError);
}
