#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "gtbr/optimizer.hpp"
#include "gtbr/oracle.hpp"
#include "support/corpus.hpp"

namespace gtbr {
namespace {

using Pair = std::pair<std::vector<Tokens>, std::vector<Tokens>>;

std::set<Pair> optima_set(const SearchOutcome& out) {
  std::set<Pair> s;
  for (const auto& o : out.optima)
    s.emplace(std::vector<Tokens>(o.increments().begin(), o.increments().end()),
              std::vector<Tokens>(o.depths().begin(), o.depths().end()));
  return s;
}

SearchProblem problem(StbrSpec envelope, std::optional<Tokens> window = std::nullopt,
                      DepthMode mode = DepthMode::equality) {
  SearchProblem p;
  p.envelope = envelope;
  p.window = window;
  p.depth_mode = mode;
  return p;
}

TEST(EnumerateIncrements, CountsAndMembership) {
  std::set<std::vector<Tokens>> seen;
  std::vector<std::vector<Tokens>> order;
  enumerate_increments(StbrSpec{4, 3, 6}, 6, [&](const std::vector<Tokens>& r) {
    seen.insert(r);
    order.push_back(r);
    return true;
  });
  // Brute force: every 4-tuple in [0,6]^4 summing to 12.
  std::size_t brute = 0;
  for (Tokens a = 0; a <= 6; ++a)
    for (Tokens b = 0; b <= 6; ++b)
      for (Tokens c = 0; c <= 6; ++c)
        for (Tokens d = 0; d <= 6; ++d) brute += a + b + c + d == 12;
  EXPECT_EQ(brute, 231u);
  EXPECT_EQ(seen.size(), 231u);
  EXPECT_EQ(order.size(), 231u);
  EXPECT_TRUE(seen.contains({6, 3, 3, 0}));
  EXPECT_TRUE(seen.contains({3, 3, 3, 3}));
  EXPECT_TRUE(std::ranges::is_sorted(order, std::greater<>{}));
  EXPECT_EQ(order.front(), (std::vector<Tokens>{6, 6, 0, 0}));
}

TEST(EnumerateIncrements, DegenerateAndWideCap) {
  std::vector<std::vector<Tokens>> one;
  enumerate_increments(StbrSpec{1, 5, 10}, 10, [&](const std::vector<Tokens>& r) {
    one.push_back(r);
    return true;
  });
  EXPECT_EQ(one, (std::vector<std::vector<Tokens>>{{5}}));

  bool found = false;
  enumerate_increments(StbrSpec{4, 3, 12}, 12, [&](const std::vector<Tokens>& r) {
    found = found || r == std::vector<Tokens>{12, 0, 0, 0};
    return true;
  });
  EXPECT_TRUE(found);
}

TEST(EnumerateDepths, EqualityAndWindow) {
  std::set<std::vector<Tokens>> unbounded;
  enumerate_depths(StbrSpec{4, 3, 6}, DepthMode::equality, std::nullopt, [&](const std::vector<Tokens>& b) {
    EXPECT_EQ(b[0] + b[1] + b[2], 18);
    unbounded.insert(b);
    return true;
  });
  EXPECT_TRUE(unbounded.contains({6, 6, 6}));
  EXPECT_TRUE(unbounded.contains({8, 10, 0}));
  EXPECT_EQ(unbounded.size(), 190u);  // C(20, 2)

  std::set<std::vector<Tokens>> windowed;
  enumerate_depths(StbrSpec{4, 3, 9}, DepthMode::equality, 3, [&](const std::vector<Tokens>& b) {
    for (Tokens x : b) EXPECT_TRUE(x >= 6 && x <= 12);
    windowed.insert(b);
    return true;
  });
  EXPECT_TRUE(windowed.contains({8, 10, 9}));
  EXPECT_TRUE(windowed.contains({9, 10, 8}));

  std::vector<std::vector<Tokens>> empty;
  enumerate_depths(StbrSpec{1, 3, 7}, DepthMode::equality, std::nullopt, [&](const std::vector<Tokens>& b) {
    empty.push_back(b);
    return true;
  });
  EXPECT_EQ(empty, (std::vector<std::vector<Tokens>>{{}}));
}

TEST(EnumerateDepths, InequalityIncludesSlack) {
  std::size_t total = 0, below = 0;
  enumerate_depths(StbrSpec{3, 1, 2}, DepthMode::inequality, std::nullopt, [&](const std::vector<Tokens>& b) {
    ++total;
    EXPECT_LE(b[0] + b[1], 4);
    below += b[0] + b[1] < 4;
    return true;
  });
  EXPECT_EQ(total, 15u);  // pairs with sum <= 4
  EXPECT_EQ(below, 10u);
}

TEST(DepthRange, WindowClampsAtZero) {
  EXPECT_EQ(depth_range(StbrSpec{4, 3, 6}, std::nullopt).hi, 18);
  EXPECT_EQ(depth_range(StbrSpec{4, 1, 2}, 3).lo, 0);
  EXPECT_EQ(depth_range(StbrSpec{4, 1, 2}, 3).hi, 5);
  EXPECT_EQ(default_window(4), std::nullopt);
  EXPECT_EQ(default_window(5), 3);
}

TEST(SuffixMemoKey, SharedSuffix) {
  const std::vector<Tokens> r1{6, 3, 3, 0}, b1{6, 6, 6};
  const std::vector<Tokens> r2{5, 4, 3, 0}, b2{7, 6, 6};
  auto key = [](const std::vector<Tokens>& r, const std::vector<Tokens>& b, std::size_t k) {
    return suffix_memo_key(std::span<const Tokens>(r).subspan(k), std::span<const Tokens>(b).subspan(k));
  };
  EXPECT_EQ(key(r1, b1, 2), key(r2, b2, 2));
  EXPECT_EQ(key(r1, b1, 2).increments, (std::vector<Tokens>{3, 0}));
  EXPECT_EQ(key(r1, b1, 2).depths, (std::vector<Tokens>{6}));
  EXPECT_NE(key(r1, b1, 1), key(r2, b2, 1));
  EXPECT_EQ(SuffixKeyHash{}(key(r1, b1, 2)), SuffixKeyHash{}(key(r2, b2, 2)));

  const auto full = key(r1, b1, 0);
  EXPECT_EQ(full.increments, r1);
  EXPECT_EQ(full.depths, b1);
}

TEST(LruCache, EvictsLeastRecentlyUsed) {
  LruCache<int> cache(2);
  const SuffixKey a{{1}, {}}, b{{2}, {}}, c{{3}, {}};
  cache.insert(a, 1);
  cache.insert(b, 2);
  ASSERT_NE(cache.find(a), nullptr);
  cache.insert(c, 3);
  EXPECT_EQ(cache.size(), 2u);
  EXPECT_EQ(cache.find(b), nullptr);
  EXPECT_EQ(*cache.find(a), 1);
  EXPECT_EQ(*cache.find(c), 3);
}

TEST(Search, FourThreeSix) {
  const auto out = search(problem({4, 3, 6}));
  EXPECT_EQ(optima_set(out), (std::set<Pair>{{{6, 3, 3, 0}, {6, 6, 6}}}));
  EXPECT_EQ(out.best_weight, 1980161);
  EXPECT_EQ(out.baseline_weight, 1074673);
  EXPECT_NEAR(out.best_utility, 20.92, 0.005);
  EXPECT_NEAR(out.baseline_utility, 20.04, 0.005);
  EXPECT_NEAR(out.improvement_percent, 4.4, 0.05);
  EXPECT_GT(out.stats.cache_hits, 0u);
  EXPECT_TRUE(out.authoritative);
  EXPECT_FALSE(out.stats.big_weights);
}

TEST(Search, FourThreeNineTies) {
  const auto out = search(problem({4, 3, 9}));
  EXPECT_EQ(optima_set(out), (std::set<Pair>{{{8, 3, 1, 0}, {8, 10, 9}}, {{9, 2, 1, 0}, {9, 10, 8}}}));
  EXPECT_NEAR(out.best_utility, 21.44, 0.005);
  // Sorted ascending.
  EXPECT_EQ(out.optima.front(), RegulatorSpec({8, 3, 1, 0}, {8, 10, 9}));
}

TEST(Search, FiveThreeNineWindowed) {
  const auto out = search(make_problem({5, 3, 9}));
  ASSERT_EQ(out.window, 3);
  EXPECT_EQ(optima_set(out), (std::set<Pair>{{{8, 3, 3, 1, 0}, {8, 10, 10, 8}}}));
  EXPECT_NEAR(out.best_utility, 27.33, 0.005);
  EXPECT_NEAR(out.improvement_percent, 5.6, 0.1);
}

TEST(Search, SingleSlotEnvelope) {
  const auto out = search(problem({1, 1, 2}));
  EXPECT_EQ(optima_set(out), (std::set<Pair>{{{1}, {}}}));
  EXPECT_EQ(out.best_weight, 3);
  EXPECT_EQ(out.improvement_percent, 0.0);
}

TEST(Search, OptimaSatisfyConstraints) {
  for (const StbrSpec env : {StbrSpec{4, 3, 6}, StbrSpec{4, 3, 9}, StbrSpec{4, 4, 10}, StbrSpec{3, 2, 7}}) {
    for (DepthMode mode : {DepthMode::equality, DepthMode::inequality}) {
      const auto out = search(problem(env, std::nullopt, mode));
      for (const auto& o : out.optima) {
        const auto v = validate_comparison(o, env);
        EXPECT_TRUE(v.all_satisfied());
        if (mode == DepthMode::equality) {
          EXPECT_TRUE(v.aggregate_depth_equality);
        }
        EXPECT_EQ(solve(o).utility_weight(), out.best_weight);
      }
    }
  }
}

// Every candidate is scored independently with the enumeration oracle.
TEST(Search, MatchesNaiveOracleSearch) {
  for (std::size_t n = 1; n <= 3; ++n)
    for (Tokens r = 0; static_cast<Tokens>(n) * r <= 6; ++r)
      for (Tokens b = 2 * r; b <= 5 * r; ++b)
        for (DepthMode mode : {DepthMode::equality, DepthMode::inequality}) {
          const StbrSpec env{n, r, b};
          BigUInt best = 0;
          std::set<Pair> naive;
          enumerate_increments(env, b, [&](const std::vector<Tokens>& inc) {
            enumerate_depths(env, mode, std::nullopt, [&](const std::vector<Tokens>& dep) {
              const BigUInt g = oracle_utility(RegulatorSpec(inc, dep)).weight;
              if (g > best) {
                best = g;
                naive.clear();
              }
              if (g == best) naive.emplace(inc, dep);
              return true;
            });
            return true;
          });
          const auto out = search(problem(env, std::nullopt, mode));
          ASSERT_EQ(out.best_weight, best) << n << ',' << r << ',' << b;
          ASSERT_EQ(optima_set(out), naive) << n << ',' << r << ',' << b;
        }
}

TEST(Search, InequalityNeverWorseThanEquality) {
  for (const StbrSpec env : {StbrSpec{3, 2, 4}, StbrSpec{4, 3, 6}, StbrSpec{4, 2, 7}}) {
    const auto eq = search(problem(env));
    const auto ineq = search(problem(env, std::nullopt, DepthMode::inequality));
    EXPECT_GE(ineq.best_weight, eq.best_weight);
    EXPECT_GT(ineq.stats.candidates, eq.stats.candidates);
  }
}

TEST(Search, DeterministicAcrossRunsAndJobs) {
  auto p = problem({4, 4, 10});
  const auto a = search(p);
  const auto b = search(p);
  p.jobs = 2;
  const auto c = search(p);
  p.jobs = 4;
  p.cache_capacity = 16;
  const auto d = search(p);
  for (const auto* o : {&b, &c}) {
    EXPECT_EQ(o->optima, a.optima);
    EXPECT_EQ(o->best_weight, a.best_weight);
    EXPECT_EQ(o->stats.candidates, a.stats.candidates);
    EXPECT_EQ(o->stats.cache_hits, a.stats.cache_hits);
    EXPECT_EQ(o->stats.cache_misses, a.stats.cache_misses);
  }
  EXPECT_EQ(d.optima, a.optima);
  EXPECT_EQ(d.stats.candidates, a.stats.candidates);
}

TEST(Search, ArbitraryPrecisionFallback) {
  // Weights pass 2^128 here, so the fast path overflows.
  const auto out = search(problem({2, 64, 128}, 0));
  EXPECT_TRUE(out.stats.big_weights);
  EXPECT_EQ(out.best_weight, solve(out.optima.front()).utility_weight());
  EXPECT_GT(out.best_utility, 128.0);
}

TEST(Search, ResourceLimitsReportPartialResults) {
  auto p = problem({4, 3, 6});
  p.max_candidates = 10;
  try {
    search(p);
    FAIL() << "expected SearchLimitReached";
  } catch (const SearchLimitReached& e) {
    EXPECT_FALSE(e.partial().authoritative);
    EXPECT_LE(e.partial().stats.candidates, 10u);
    EXPECT_FALSE(e.partial().optima.empty());
  }

  auto slow = problem({6, 3, 6});
  slow.time_limit = std::chrono::milliseconds(1);
  EXPECT_THROW(search(slow), ResourceLimit);
}

TEST(Search, RejectsInvalidEnvelopes) {
  EXPECT_THROW(search(problem({4, 3, 16})), InvalidSpec);
  EXPECT_THROW(search(problem({4, 3, 5})), InvalidSpec);
  EXPECT_THROW(search(problem({0, 3, 6})), InvalidSpec);
  EXPECT_THROW(search(problem({4, 3, 6}, -1)), InvalidSpec);
}

// A cap that binds on the maximal trajectory is worth one more token of depth.
TEST(Proposition, RaisingBindingCapStrictlyHelps) {
  std::size_t checked = 0;
  for (const auto& spec : testing::small_corpus()) {
    const auto base = solve(spec).utility_weight();
    for (std::size_t i : binding_caps(spec)) {
      std::vector<Tokens> b(spec.depths().begin(), spec.depths().end());
      ++b[i - 1];
      ASSERT_GT(solve(RegulatorSpec({spec.increments().begin(), spec.increments().end()}, b)).utility_weight(), base);
      ++checked;
    }
  }
  EXPECT_GT(checked, 50u);
}

TEST(Proposition, SlackCapsAreIrrelevant) {
  for (const auto& spec : testing::small_corpus()) {
    if (!binding_caps(spec).empty()) continue;
    const auto base = solve(spec).utility_weight();
    for (std::size_t k = 0; k + 1 < spec.horizon(); ++k) {
      std::vector<Tokens> b(spec.depths().begin(), spec.depths().end());
      ++b[k];
      ASSERT_EQ(solve(RegulatorSpec({spec.increments().begin(), spec.increments().end()}, b)).utility_weight(), base);
    }
  }
}

}  // namespace
}  // namespace gtbr
