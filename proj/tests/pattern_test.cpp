#include <gtest/gtest.h>

#include <set>

#include "bpmr/pattern.hpp"
#include "test_support.hpp"

namespace bpmr {
namespace {

TEST(EnumeratePatterns, ThreeBehaviorsAlphaOne) {
  auto schema = testing::vcp_schema();
  auto ps = enumerate_patterns(schema, 1);
  ASSERT_EQ(ps.size(), 29u);
  std::size_t len1 = 0, len3 = 0;
  for (const auto& p : ps) (p.length() == 1 ? len1 : len3)++;
  EXPECT_EQ(len1, 2u);
  EXPECT_EQ(len3, 27u);
  EXPECT_EQ(format_pattern(schema, ps[0]), "view");
  EXPECT_EQ(format_pattern(schema, ps[1]), "cart");
  EXPECT_EQ(format_pattern(schema, ps[2]), "view>view>view");
  EXPECT_EQ(format_pattern(schema, ps[3]), "view>view>cart");
  EXPECT_EQ(format_pattern(schema, ps[28]), "purchase>purchase>purchase");
}

TEST(EnumeratePatterns, TwoBehaviorsAlphaZeroIsAuxiliaryOnly) {
  auto schema = testing::numbered_schema(2);
  auto ps = enumerate_patterns(schema, 0);
  ASSERT_EQ(ps.size(), 1u);
  EXPECT_EQ(ps[0].steps(), (std::vector<std::uint32_t>{0}));
}

TEST(EnumeratePatterns, FourBehaviorsAlphaOne) {
  EXPECT_EQ(enumerate_patterns(testing::numbered_schema(4), 1).size(), 67u);
}

TEST(EnumeratePatterns, CountFormulaOrderAndUniqueness) {
  for (std::size_t nb = 2; nb <= 4; ++nb) {
    for (std::uint32_t alpha = 0; alpha <= 2; ++alpha) {
      auto schema = testing::numbered_schema(nb);
      auto ps = enumerate_patterns(schema, alpha);
      std::size_t expected = 0, power = nb;
      for (std::uint32_t x = 0; x <= alpha; ++x, power *= nb * nb) expected += power;
      EXPECT_EQ(ps.size(), expected - 1);
      std::set<std::vector<std::uint32_t>> unique;
      for (std::size_t f = 0; f < ps.size(); ++f) {
        EXPECT_EQ(ps[f].length() % 2, 1u);
        EXPECT_TRUE(unique.insert(ps[f].steps()).second);
        if (f > 0) {
          const auto& a = ps[f - 1].steps();
          const auto& b = ps[f].steps();
          EXPECT_TRUE(a.size() < b.size() || (a.size() == b.size() && a < b));
        }
      }
      EXPECT_EQ(unique.count({static_cast<std::uint32_t>(schema.target_index())}), 0u);
      EXPECT_EQ(enumerate_patterns(schema, alpha), ps);
    }
  }
}

TEST(EnumeratePatterns, CapacityOverflow) {
  EXPECT_THROW(pattern_count(4, 40), CapacityError);
  EXPECT_THROW(enumerate_patterns(testing::numbered_schema(4), 1000), CapacityError);
}

TEST(BehaviorPattern, RejectsEvenLengthAndBadSteps) {
  EXPECT_THROW(BehaviorPattern({0, 1}, 3), ContractError);
  EXPECT_THROW(BehaviorPattern({}, 3), ContractError);
  EXPECT_THROW(BehaviorPattern({0, 1, 3}, 3), ContractError);
}

TEST(BehaviorPattern, ParseFormat) {
  auto schema = testing::vcp_schema();
  auto p = parse_pattern(schema, "view>view>cart");
  EXPECT_EQ(p.steps(), (std::vector<std::uint32_t>{0, 0, 1}));
  EXPECT_EQ(format_pattern(schema, p), "view>view>cart");
  EXPECT_THROW(parse_pattern(schema, "view>favorite>cart"), DataError);
  EXPECT_THROW(parse_pattern(schema, "view>view"), ContractError);
}

}  // namespace
}  // namespace bpmr
