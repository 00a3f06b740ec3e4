#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gtbr/entropy_dp.hpp"
#include "gtbr/oracle.hpp"
#include "support/corpus.hpp"

namespace gtbr {
namespace {

BigUInt pow2(unsigned e) { return BigUInt(1) << e; }

TEST(Solve, SingleSlotClosedForm) {
  const auto s = solve(RegulatorSpec({2}, {}));
  EXPECT_EQ(s.utility_weight(), 7);
  EXPECT_NEAR(information_utility(s), std::log2(7.0), 1e-12);

  const auto z = solve(RegulatorSpec({0}, {}));
  EXPECT_EQ(z.utility_weight(), 1);
  EXPECT_EQ(information_utility(z), 0.0);
}

TEST(Solve, TwoSlotHandEnumeration) {
  // Conforming schedules (0,0) (0,1) (0,2) (1,0) (1,1): 1 + 2 + 4 + 2 + 4.
  const auto s = solve(RegulatorSpec({1, 1}, {1}));
  EXPECT_EQ(s.utility_weight(), 13);
  EXPECT_NEAR(information_utility(s), 3.7004397181410922, 1e-12);
  EXPECT_EQ(s.weight(1, 0), 3);
  EXPECT_EQ(s.weight(1, 1), 7);
}

TEST(Solve, StateBoundsFollowDepths) {
  const auto s = solve(RegulatorSpec({6, 3, 3, 0}, {6, 5, 4}));
  EXPECT_EQ(s.state_bound(0), 0);
  EXPECT_EQ(s.state_bound(1), 6);
  EXPECT_EQ(s.state_bound(2), 5);
  EXPECT_EQ(s.state_bound(3), 4);
  EXPECT_EQ(s.state_bound(4), 4);
  EXPECT_THROW(s.weight(2, 6), StateOutOfRange);
  EXPECT_THROW(s.weight(5, 0), StateOutOfRange);
  EXPECT_THROW(s.weight(1, -1), StateOutOfRange);
}

// Frozen from an independent recursive implementation.
TEST(Solve, FrozenReferenceWeights) {
  EXPECT_EQ(solve(StbrSpec{4, 3, 6}.to_regulator()).utility_weight(), 1074673);
  EXPECT_EQ(solve(StbrSpec{4, 4, 8}.to_regulator()).utility_weight(), 35359201);
  EXPECT_EQ(solve(StbrSpec{6, 3, 6}.to_regulator()).utility_weight(), BigUInt("2706365937"));
  EXPECT_EQ(solve(RegulatorSpec({6, 3, 3, 0}, {6, 6, 6})).utility_weight(), 1980161);
  EXPECT_EQ(solve(RegulatorSpec({12, 0, 0, 0}, {12, 12, 12})).utility_weight(), 3080193);
}

TEST(Solve, ReferenceUtilitiesToTwoDecimals) {
  EXPECT_NEAR(information_utility(solve(StbrSpec{4, 3, 6}.to_regulator())), 20.04, 0.005);
  EXPECT_NEAR(information_utility(solve(RegulatorSpec({6, 3, 3, 0}, {6, 6, 6}))), 20.92, 0.005);
}

TEST(Solve, ResourceLimits) {
  SolveLimits tiny;
  tiny.max_table_entries = 10;
  EXPECT_THROW(solve(RegulatorSpec({1, 1}, {100}), tiny), ResourceLimit);

  SolveLimits narrow;
  narrow.max_weight_bits = 8;
  EXPECT_THROW(solve(RegulatorSpec({20}, {}), narrow), ResourceLimit);
}

TEST(Solve, FixedWidthMatchesArbitraryPrecision) {
  for (const auto& spec : testing::small_corpus(100)) {
    const auto big = solve<BigUInt>(spec);
    const auto fast = solve<Checked128>(spec);
    for (std::size_t k = 0; k <= spec.horizon(); ++k)
      for (Tokens u = 0; u <= big.state_bound(k); ++u) ASSERT_EQ(to_big(fast.weight(k, u)), big.weight(k, u));
  }
  EXPECT_THROW(solve<Checked128>(RegulatorSpec({130}, {})), WeightOverflow);
}

TEST(Oracle, MatchesSolveOnCorpus) {
  for (const auto& spec : testing::small_corpus()) {
    ASSERT_EQ(oracle_utility(spec).weight, solve(spec).utility_weight());
  }
  const auto stbr = StbrSpec{4, 3, 6}.to_regulator();
  const auto o = oracle_utility(stbr);
  EXPECT_EQ(o.weight, solve(stbr).utility_weight());
  EXPECT_EQ(std::round(o.bits * 100) / 100, 20.04);
}

TEST(Oracle, EnumerationCap) {
  EXPECT_EQ(oracle_utility(RegulatorSpec({2}, {})).weight, 7);
  EXPECT_THROW(oracle_utility(StbrSpec{4, 3, 6}.to_regulator(), 100), EnumerationTooLarge);
}

TEST(Properties, TerminalClosedFormAndMonotonicity) {
  for (const auto& spec : testing::small_corpus()) {
    const auto s = solve(spec);
    const std::size_t n = spec.horizon();
    const Tokens r_last = spec.increment(n - 1);
    for (Tokens u = 0; u <= s.state_bound(n - 1); ++u)
      ASSERT_EQ(s.weight(n - 1, u), pow2(static_cast<unsigned>(u + r_last + 1)) - 1);
    for (Tokens u = 0; u <= s.state_bound(n); ++u) ASSERT_EQ(s.weight(n, u), 1);
    for (std::size_t k = 0; k < n; ++k)
      for (Tokens u = 0; u < s.state_bound(k); ++u) ASSERT_LT(s.weight(k, u), s.weight(k, u + 1));
  }
}

TEST(Properties, PmfNormalizesAndBalancesEntropy) {
  for (const auto& spec : testing::small_corpus()) {
    const auto s = solve(spec);
    for (std::size_t k = 0; k < spec.horizon(); ++k)
      for (Tokens u = 0; u <= s.state_bound(k); ++u) {
        const auto pmf = optimal_pmf(s, k, u);
        BigUInt total = 0;
        for (const auto& n : pmf.numerators) {
          ASSERT_GT(n, 0);
          total += n;
        }
        ASSERT_EQ(total, pmf.denominator);
        const double h = s.entropy(k, u);
        for (std::size_t l = 0; l < pmf.support(); ++l) {
          const Tokens next = spec.carry(k, u + spec.increment(k) - static_cast<Tokens>(l));
          const double score = static_cast<double>(l) - pmf.log2_probability(l) + s.entropy(k + 1, next);
          ASSERT_NEAR(score, h, 1e-9);
        }
      }
  }
}

TEST(Properties, RaisingAnyDepthNeverHurts) {
  for (const auto& spec : testing::small_corpus()) {
    const auto base = solve(spec).utility_weight();
    for (std::size_t k = 0; k + 1 < spec.horizon(); ++k) {
      std::vector<Tokens> b(spec.depths().begin(), spec.depths().end());
      ++b[k];
      const RegulatorSpec raised({spec.increments().begin(), spec.increments().end()}, b);
      ASSERT_GE(solve(raised).utility_weight(), base);
    }
  }
}

TEST(OptimalPmf, SmallCases) {
  const auto one = optimal_pmf(solve(RegulatorSpec({1}, {})), 0, 0);
  EXPECT_EQ(one.numerators, (std::vector<BigUInt>{1, 2}));
  EXPECT_EQ(one.denominator, 3);

  const auto zero = optimal_pmf(solve(RegulatorSpec({0}, {})), 0, 0);
  EXPECT_EQ(zero.numerators, (std::vector<BigUInt>{1}));
  EXPECT_EQ(zero.denominator, 1);

  const auto two = optimal_pmf(solve(RegulatorSpec({1, 1}, {1})), 0, 0);
  EXPECT_EQ(two.numerators, (std::vector<BigUInt>{7, 6}));
  EXPECT_EQ(two.denominator, 13);
  EXPECT_NEAR(two.probability(0), 7.0 / 13.0, 1e-15);

  // Oracle cross-check: schedules starting with l_0 = 0 weigh 1 + 2 + 4.
  EXPECT_THROW(optimal_pmf(solve(RegulatorSpec({1}, {})), 1, 0), StateOutOfRange);
  EXPECT_THROW(optimal_pmf(solve(RegulatorSpec({1, 1}, {1})), 1, 2), StateOutOfRange);
}

TEST(PerScheduleInformation, SingleSlot) {
  const auto s = solve(RegulatorSpec({1}, {}));
  const std::vector<Tokens> one{1}, zero{0}, two{2};
  EXPECT_NEAR(per_schedule_information(s, one), std::log2(3.0), 1e-12);
  EXPECT_NEAR(per_schedule_information(s, zero), std::log2(3.0), 1e-12);
  EXPECT_THROW(per_schedule_information(s, two), NonConforming);

  const auto z = solve(RegulatorSpec({0}, {}));
  EXPECT_EQ(per_schedule_information(z, zero), 0.0);
}

// Every conforming schedule carries exactly log2 g_0(0) bits under the
// optimal law (the law is uniform over schedule-plus-contents frames).
TEST(PerScheduleInformation, ConstantAcrossSchedules) {
  const RegulatorSpec spec({6, 3, 3, 0}, {6, 6, 6});
  const auto s = solve(spec);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto schedule = sample_schedule(s, rng);
    ASSERT_NEAR(per_schedule_information(s, schedule.lengths), information_utility(s), 1e-9);
  }
}

TEST(SampleSchedule, AlwaysConformsAndIsDeterministic) {
  for (const auto& spec : testing::small_corpus(50)) {
    const auto s = solve(spec);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto a = sample_schedule(s, seed);
      ASSERT_TRUE(conforms(spec, a.lengths));
      ASSERT_EQ(a, sample_schedule(s, seed));
    }
  }
}

TEST(SampleSchedule, SingleSlotFrequencyWithinThreeSigma) {
  const auto s = solve(RegulatorSpec({1}, {}));
  std::mt19937_64 rng(11);
  const int trials = 30000;
  int ones = 0;
  for (int i = 0; i < trials; ++i) ones += sample_schedule(s, rng).lengths[0] == 1;
  const double p = 2.0 / 3.0;
  const double sigma = std::sqrt(p * (1 - p) / trials);
  EXPECT_NEAR(static_cast<double>(ones) / trials, p, 3 * sigma);
}

TEST(UniformBelow, CoversRangeAndRejectsOutside) {
  std::mt19937_64 rng(5);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 5000; ++i) {
    const auto x = uniform_below(BigUInt(5), rng);
    ASSERT_LT(x, 5);
    ++counts[x.convert_to<int>()];
  }
  for (int c : counts) EXPECT_GT(c, 800);
  EXPECT_EQ(uniform_below(BigUInt(1), rng), 0);
  const BigUInt huge = (BigUInt(1) << 200) + 3;
  for (int i = 0; i < 50; ++i) ASSERT_LT(uniform_below(huge, rng), huge);
}

TEST(Log2Weight, LargeValues) {
  EXPECT_NEAR(log2_weight(BigUInt(1) << 300), 300.0, 1e-12);
  const BigUInt x = (BigUInt(1) << 200) * 3;
  EXPECT_NEAR(log2_weight(x), 200.0 + std::log2(3.0), 1e-12);
  EXPECT_EQ(log2_weight(BigUInt(1)), 0.0);
}

}  // namespace
}  // namespace gtbr
