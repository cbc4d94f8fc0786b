#include <gtest/gtest.h>

#include "bpmr/statistics.hpp"
#include "bpmr/walk_oracle.hpp"
#include "test_support.hpp"

namespace bpmr {
namespace {

using testing::fixture_f1;

// Independent sums from the DFS oracle.
PatternStatistics oracle_statistics(const MultiBehaviorDataset& ds, const PatternSet& patterns) {
  WalkOracle oracle(ds);
  PatternStatistics s = empty_statistics(patterns.size());
  s.pair_count = std::uint64_t{ds.user_count()} * ds.item_count();
  s.pos_pair_count = ds.target().nnz();
  for (std::size_t f = 0; f < patterns.size(); ++f) {
    for (Index u = 0; u < ds.user_count(); ++u) {
      auto row = oracle.count_row(patterns[f], u);
      for (Index i = 0; i < ds.item_count(); ++i) {
        s.sums[f].all_sum += row[i];
        s.sums[f].all_sq_sum += Wide{row[i]} * row[i];
        if (ds.target().contains(u, i)) s.sums[f].pos_sum += row[i];
      }
    }
  }
  return s;
}

TEST(Statistics, FixtureViewPattern) {
  auto ds = fixture_f1();
  auto patterns = enumerate_patterns(ds.schema(), 1);
  auto stats = accumulate_statistics(ds, patterns, {1, 1, false});
  // Pattern 0 is the bare view behavior.
  EXPECT_EQ(stats.sums[0].pos_sum, 1u);
  EXPECT_EQ(stats.sums[0].all_sum, 5u);
  EXPECT_EQ(stats.pair_count, 9u);
  EXPECT_EQ(stats.pos_pair_count, 1u);
}

TEST(Statistics, PatternWithoutWalksIsZero) {
  auto ds = fixture_f1();
  PatternSet ps({parse_pattern(ds.schema(), "purchase>cart>purchase")}, 1);
  auto stats = accumulate_statistics(ds, ps);
  EXPECT_EQ(stats.sums[0], PatternSums{});
}

TEST(Statistics, MatchesOracleAndIgnoresChunking) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    auto ds = testing::random_instance(seed);
    auto patterns = enumerate_patterns(ds.schema(), 1);
    auto expect = oracle_statistics(ds, patterns);
    for (std::size_t chunk : {1u, 3u, 64u, 1024u}) {
      for (std::size_t threads : {1u, 4u}) {
        for (bool share : {false, true}) {
          auto got = accumulate_statistics(ds, patterns, {chunk, threads, share});
          ASSERT_EQ(got, expect) << "seed " << seed << " chunk " << chunk;
        }
      }
    }
    for (const auto& s : expect.sums) EXPECT_LE(s.pos_sum, s.all_sum);
  }
}

TEST(Statistics, MergeOfDisjointRangesEqualsUnion) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto ds = testing::random_instance(seed);
    auto patterns = enumerate_patterns(ds.schema(), 1);
    const std::size_t n = ds.user_count();
    const std::size_t cut = n / 3, cut2 = 2 * n / 3;
    auto a = accumulate_range(ds, patterns, {0, cut});
    auto b = accumulate_range(ds, patterns, {cut, cut2});
    auto c = accumulate_range(ds, patterns, {cut2, n});
    auto whole = accumulate_range(ds, patterns, {0, n});
    EXPECT_EQ(merge(merge(a, b), c), whole);
    EXPECT_EQ(merge(a, merge(b, c)), whole);
    EXPECT_EQ(merge(merge(c, a), b), whole);
  }
}

TEST(Statistics, ChunkSizeZeroRejected) {
  auto ds = fixture_f1();
  auto patterns = enumerate_patterns(ds.schema(), 1);
  EXPECT_THROW(accumulate_statistics(ds, patterns, {0, 1, false}), ConfigError);
}

TEST(Statistics, SumOverflowIsReported) {
  std::vector<Entry> all;
  for (Index u = 0; u < 4; ++u) {
    for (Index i = 0; i < 4; ++i) all.push_back({u, i});
  }
  auto ds = make_dataset(testing::numbered_schema(2), 4, 4, {all, {}});
  // Each entry is 4^30 = 2^60; sixteen of them overflow 64 bits.
  PatternSet ps({BehaviorPattern(std::vector<std::uint32_t>(31, 0), 2)}, 15);
  EXPECT_THROW(accumulate_statistics(ds, ps), CountOverflowError);
}

}  // namespace
}  // namespace bpmr
