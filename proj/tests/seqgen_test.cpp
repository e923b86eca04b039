#include <gtest/gtest.h>

#include <array>
#include <chrono>
#include <cstdint>
#include <random>
#include <set>
#include <string>

#include "kcsprng/seqgen.hpp"
#include "kcsprng/stats.hpp"
#include "support.hpp"

using namespace kcsprng;
using kcsprng::test::miniature_subgen;

namespace {

SequenceGenerator miniature_asg() {
  // SG1 (3,4,5), SG2 (2,6,7), SG3 (9,10,11); states as in the cross-language oracle.
  return SequenceGenerator(miniature_subgen(3, 4, 5, 0x5, 0x6, 0x13), miniature_subgen(2, 6, 7, 0x2, 0x29, 0x6c),
                           miniature_subgen(9, 10, 11, 0x14d, 0x196, 0x547));
}

BitStream subgen_output(SubGenerator g, std::size_t n) {
  BitStream out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(g.step());
  return out;
}

}  // namespace

TEST(Combiner, MajorityTruthTable) {
  for (int v = 0; v < 8; ++v) {
    const bool a = v & 1, b = v & 2, c = v & 4;
    EXPECT_EQ(combiner(a, b, c), (a + b + c) >= 2) << v;
  }
}

TEST(SubGenerator, RequiresDistinctDegrees) {
  EXPECT_THROW(miniature_subgen(3, 3, 5, 1, 1, 1), UsageError);
}

TEST(SubGenerator, Miniature345LinearComplexityIs47) {
  const auto s = subgen_output(miniature_subgen(3, 4, 5, 1, 1, 1), 400);
  EXPECT_EQ(berlekamp_massey(s), 47U);
  EXPECT_EQ(majority_linear_complexity(3, 4, 5), 47);
}

TEST(SubGenerator, Miniature345PeriodIs3255) {
  const std::size_t P = 7 * 15 * 31;
  const auto s = subgen_output(miniature_subgen(3, 4, 5, 3, 9, 17), 3 * P);
  auto has_period = [&](std::size_t p) {
    for (std::size_t i = 0; i + p < s.size(); ++i)
      if (s[i] != s[i + p]) return false;
    return true;
  };
  EXPECT_TRUE(has_period(P));
  for (std::size_t p = 1; p < P; ++p)
    if (P % p == 0) {
      EXPECT_FALSE(has_period(p)) << p;
    }
}

TEST(SubGenerator, LinearComplexityFormulaOverRandomStates) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const auto g = miniature_subgen(4, 5, 7, rng() % 15 + 1, rng() % 31 + 1, rng() % 127 + 1);
    EXPECT_EQ(berlekamp_massey(subgen_output(g, 600)), static_cast<std::size_t>(majority_linear_complexity(4, 5, 7)));
  }
}

TEST(SequenceGenerator, ProductionConstants) {
  const auto& p = standard_registers();
  EXPECT_EQ(majority_linear_complexity(p[0].degree, p[1].degree, p[2].degree), 3119);
  EXPECT_EQ(majority_linear_complexity(p[3].degree, p[4].degree, p[5].degree), 5711);
  EXPECT_EQ(majority_linear_complexity(p[6].degree, p[7].degree, p[8].degree), 9959);
}

TEST(SequenceGenerator, MiniatureAsgMatchesOracle) {
  auto g = miniature_asg();
  EXPECT_EQ(g.generate(64).to_string(), "0100001100101010110100111100101101011011110100100111111111000100");
}

TEST(SequenceGenerator, MiniatureAsgComplexityExceedsSubGenerators) {
  auto g = miniature_asg();
  const auto s = g.generate(10000);
  const long long lc23 = majority_linear_complexity(2, 6, 7) + majority_linear_complexity(9, 10, 11);
  EXPECT_EQ(lc23, 367);
  EXPECT_GT(static_cast<long long>(berlekamp_massey(s)), lc23);
}

// Brent cycle detection on the whole register state; the period must divide
// the product of the sub-generator periods.
TEST(SequenceGenerator, TinyAsgPeriodDividesProduct) {
  const SequenceGenerator start(miniature_subgen(2, 3, 4, 1, 1, 1), miniature_subgen(2, 3, 5, 1, 2, 3),
                                miniature_subgen(2, 4, 5, 2, 5, 7));
  std::size_t power = 1, lam = 1;
  SequenceGenerator tortoise = start, hare = start;
  hare.step();
  while (!(tortoise == hare)) {
    if (power == lam) {
      tortoise = hare;
      power *= 2;
      lam = 0;
    }
    hare.step();
    ++lam;
  }
  const std::size_t prod = std::size_t{3 * 7 * 15} * (3 * 7 * 31) * (3 * 15 * 31);
  EXPECT_EQ(prod % lam, 0U) << "period " << lam;
  EXPECT_GT(lam, 3U * 7 * 15);
}

TEST(SequenceGenerator, StepMatchesStageModel) {
  std::mt19937_64 rng(3);
  std::array<std::uint64_t, 9> states{};
  const auto& polys = standard_registers();
  test::RefSeqGen ref(polys);
  for (std::size_t i = 0; i < 9; ++i) {
    states[i] = rng() & ((1ULL << polys[i].degree) - 1);
    for (int s = 0; s < polys[i].degree; ++s) ref.regs[i].stage[s] = (states[i] >> s) & 1U;
  }
  auto g = SequenceGenerator::from_states(polys, states);
  for (int i = 0; i < 5000; ++i) ASSERT_EQ(g.step(), ref.step()) << i;
}

TEST(LoadKey, BitOrderAndForcedMsb) {
  BitStream key(kKeyBits);
  key.set(1, true);    // L1 stage 27
  key.set(29, true);   // L2 stage 30 (its MSB)
  key.set(400, true);  // L9 stage 0
  const auto g = load_key(standard_registers(), key);
  EXPECT_EQ(g.reg(0).state(), (1ULL << 28) | (1ULL << 27));
  EXPECT_EQ(g.reg(1).state(), 1ULL << 30);
  EXPECT_EQ(g.reg(8).state(), (1ULL << 60) | 1ULL);
  EXPECT_EQ(g.state_bits().slice(29, 31).to_string(), "1" + std::string(30, '0'));
  EXPECT_THROW(load_key(standard_registers(), BitStream(400)), SizeError);
}

TEST(InitSeqgen, PublishedSeedMatchesOracle) {
  const auto seed = Seed::from_bytes(test::table4_seed_bytes());
  const auto g = init_seqgen(seed.key(), seed.iv());
  const std::array<std::uint64_t, 9> expected{0x18E21B6A,      0x65D3FA44,       0x1A9369A622,
                                              0x1A17E057CE5,   0x5CCB84DC878,    0x427C4A643270,
                                              0x1F674A947B9B8A, 0x467A4551F7B1027, 0x17F5855539ACD085};
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(g.reg(i).state(), expected[i]) << "L" << i + 1;
  EXPECT_FALSE(g.last_y2());
  EXPECT_TRUE(g.last_y3());
  for (std::size_t i = 0; i < 9; ++i) EXPECT_TRUE(g.reg(i).msb());
}

TEST(InitSeqgen, MatchesStageModelOnRandomSeeds) {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 20; ++t) {
    const auto seed = Seed::from_bytes(test::random_seed_bytes(rng, 1));
    auto g = init_seqgen(seed.key(), seed.iv());
    test::RefSeqGen ref(standard_registers());
    ref.init(seed.key(), seed.iv());
    for (int i = 0; i < 300; ++i) ASSERT_EQ(g.step(), ref.step()) << "seed " << t << " bit " << i;
  }
}

TEST(InitSeqgen, IvChangesState) {
  std::mt19937_64 rng(5);
  const auto bytes = test::random_seed_bytes(rng, 1);
  const auto a = Seed::from_bytes(bytes);
  auto flipped = bytes;
  flipped[60] ^= 0x10;  // inside the IV
  const auto b = Seed::from_bytes(flipped);
  EXPECT_EQ(a.key(), b.key());
  EXPECT_NE(init_seqgen(a.key(), a.iv()).state_bits(), init_seqgen(b.key(), b.iv()).state_bits());
}

TEST(InitSeqgen, RejectsWrongSizes) {
  EXPECT_THROW(init_seqgen(BitStream(400), BitStream(kIvBits)), SizeError);
  EXPECT_THROW(init_seqgen(BitStream(kKeyBits), BitStream(172)), SizeError);
}

TEST(SequenceGenerator, WipeClearsEverything) {
  auto g = miniature_asg();
  g.generate(10);
  g.wipe();
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(g.reg(i).state(), 0U);
  EXPECT_FALSE(g.last_y2());
  EXPECT_FALSE(g.last_y3());
}
