#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "bpmr/evaluation.hpp"
#include "bpmr/experiment.hpp"
#include "planted.hpp"
#include "test_support.hpp"

namespace bpmr {
namespace {

TEST(Metrics, HandComputedValues) {
  EXPECT_EQ(recall_at_k(1, 10), 1.0);
  EXPECT_EQ(recall_at_k(11, 10), 0.0);
  EXPECT_EQ(recall_at_k(10, 10), 1.0);
  EXPECT_EQ(ndcg_at_k(1, 10), 1.0);
  EXPECT_EQ(ndcg_at_k(3, 10), 0.5);
  EXPECT_EQ(ndcg_at_k(12, 10), 0.0);
}

TEST(Metrics, AbsentRankIsAnError) {
  EXPECT_THROW(recall_at_k(std::nullopt, 10), ContractError);
  EXPECT_THROW(ndcg_at_k(std::nullopt, 10), ContractError);
  EXPECT_THROW(recall_at_k(1, 0), ConfigError);
}

TEST(Metrics, ReportInvariants) {
  std::vector<std::size_t> ranks{1, 2, 3, 5, 8, 13, 21, 34, 55, 89};
  std::vector<std::size_t> ks{1, 5, 10, 20, 50, 100};
  auto rep = make_report(ranks, ks);
  EXPECT_EQ(rep.n_users, ranks.size());
  for (std::size_t n = 0; n < rep.metrics.size(); ++n) {
    EXPECT_LE(rep.metrics[n].ndcg, rep.metrics[n].recall);
    EXPECT_GE(rep.metrics[n].ndcg, 0.0);
    EXPECT_LE(rep.metrics[n].recall, 1.0);
    if (n) {
      EXPECT_GE(rep.metrics[n].recall, rep.metrics[n - 1].recall);
      EXPECT_GE(rep.metrics[n].ndcg, rep.metrics[n - 1].ndcg);
    }
  }
  EXPECT_DOUBLE_EQ(rep.metrics[2].recall, 0.5);
}

// Ten users with train target degrees 0..9.
MultiBehaviorDataset degree_ladder(std::vector<Entry>& test_pairs) {
  std::vector<Entry> purchases;
  for (Index u = 0; u < 10; ++u) {
    for (Index i = 0; i < u; ++i) purchases.push_back({u, i});
    test_pairs.push_back({u, 19});
  }
  return make_dataset(testing::vcp_schema(), 10, 20, {{}, {}, purchases});
}

TEST(Sparsity, QuantileGroups) {
  std::vector<Entry> tests;
  auto ds = degree_ladder(tests);
  auto groups = group_users_by_sparsity(ds, tests, 5);
  ASSERT_EQ(groups.size(), 5u);
  const std::size_t max_deg[] = {1, 3, 5, 7, 9};
  for (std::size_t g = 0; g < 5; ++g) {
    EXPECT_EQ(groups[g].members.size(), 2u);
    EXPECT_EQ(groups[g].max_degree, max_deg[g]);
    EXPECT_EQ(groups[g].min_degree, max_deg[g] - 1);
  }
}

TEST(Sparsity, TiesResolvedByUserIndex) {
  auto ds = make_dataset(testing::vcp_schema(), 7, 3, {{}, {}, {}});
  std::vector<Entry> tests;
  for (Index u = 7; u-- > 0;) tests.push_back({u, 0});  // reverse order on purpose
  auto groups = group_users_by_sparsity(ds, tests, 3);
  std::vector<std::size_t> sizes;
  std::vector<Index> order;
  for (const auto& g : groups) {
    sizes.push_back(g.members.size());
    for (auto m : g.members) order.push_back(tests[m].user);
  }
  EXPECT_EQ(sizes, (std::vector<std::size_t>{3, 2, 2}));
  EXPECT_EQ(order, (std::vector<Index>{0, 1, 2, 3, 4, 5, 6}));
}

TEST(Sparsity, TooFewUsers) {
  std::vector<Entry> tests;
  auto ds = degree_ladder(tests);
  tests.resize(3);
  EXPECT_THROW(group_users_by_sparsity(ds, tests, 5), DataError);
  EXPECT_THROW(group_users_by_sparsity(ds, tests, 0), ConfigError);
}

TEST(Sparsity, GroupWeightedMeansEqualOverall) {
  std::vector<Entry> tests;
  auto ds = degree_ladder(tests);
  std::vector<std::size_t> ranks{1, 4, 2, 30, 7, 11, 1, 3, 60, 9};
  std::vector<std::size_t> ks{1, 10, 50};
  auto overall = make_report(ranks, ks);
  auto groups = sparsity_reports(ds, tests, ranks, ks, 3);
  std::set<std::size_t> seen;
  for (const auto& g : groups) {
    for (auto m : g.group.members) EXPECT_TRUE(seen.insert(m).second);
  }
  EXPECT_EQ(seen.size(), tests.size());
  for (std::size_t n = 0; n < ks.size(); ++n) {
    double recall = 0, ndcg = 0;
    for (const auto& g : groups) {
      recall += g.report.metrics[n].recall * static_cast<double>(g.report.n_users);
      ndcg += g.report.metrics[n].ndcg * static_cast<double>(g.report.n_users);
    }
    EXPECT_NEAR(recall / static_cast<double>(tests.size()), overall.metrics[n].recall, 1e-12);
    EXPECT_NEAR(ndcg / static_cast<double>(tests.size()), overall.metrics[n].ndcg, 1e-12);
  }
}

TEST(Noise, ZeroFractionIsIdentity) {
  auto ds = testing::random_instance(4, 30, 0.3);
  auto noisy = inject_noise(ds, {0.0, 1, {}});
  for (std::size_t b = 0; b < ds.behavior_count(); ++b) EXPECT_EQ(noisy.matrix(b), ds.matrix(b));
}

TEST(Noise, AddsFloorFractionAndKeepsOriginals) {
  std::vector<Entry> views;
  for (Index k = 0; k < 100; ++k) views.push_back({static_cast<Index>(k % 20), static_cast<Index>(k / 20)});
  auto ds = make_dataset(testing::vcp_schema(), 20, 30, {views, {{0, 0}, {1, 1}}, {{2, 2}}});
  auto noisy = inject_noise(ds, {0.1, 42, {}});
  EXPECT_EQ(noisy.matrix(0).nnz(), 110u);
  EXPECT_EQ(noisy.matrix(1).nnz(), 2u);  // floor(0.1 * 2) = 0
  EXPECT_EQ(noisy.target(), ds.target());
  for (auto e : ds.matrix(0).entries()) EXPECT_TRUE(noisy.matrix(0).contains(e.user, e.item));

  auto again = inject_noise(ds, {0.1, 42, {}});
  EXPECT_EQ(again.matrix(0), noisy.matrix(0));
}

TEST(Noise, SweepFractionsOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto ds = testing::random_instance(seed, 30, 0.3);
    for (double f : {0.1, 0.25, 0.4, 1.0}) {
      for (std::size_t b = 0; b + 1 < ds.behavior_count(); ++b) {
        if (ds.matrix(b).nnz() + noise_additions(f, ds.matrix(b).nnz()) >
            std::uint64_t{ds.user_count()} * ds.item_count()) {
          EXPECT_THROW(inject_noise(ds, {f, seed, {b}}), DataError);
          continue;
        }
        auto noisy = inject_noise(ds, {f, seed, {b}});
        EXPECT_EQ(noisy.matrix(b).nnz(), ds.matrix(b).nnz() + noise_additions(f, ds.matrix(b).nnz()));
        EXPECT_EQ(noisy.target(), ds.target());
      }
    }
  }
}

TEST(Noise, DenseRegimeFillsEveryEmptyCell) {
  std::vector<Entry> views;
  for (Index u = 0; u < 4; ++u) {
    for (Index i = 0; i < 2; ++i) views.push_back({u, i});
  }
  auto ds = make_dataset(testing::vcp_schema(), 4, 4, {views, {}, {{0, 0}}});
  auto noisy = inject_noise(ds, {1.0, 7, {0}});
  EXPECT_EQ(noisy.matrix(0).nnz(), 16u);
  EXPECT_THROW(inject_noise(noisy, {0.5, 7, {0}}), DataError);
}

TEST(Noise, TargetAndBadFractionRejected) {
  auto ds = testing::fixture_f1();
  EXPECT_THROW(inject_noise(ds, {0.1, 1, {2}}), ConfigError);
  EXPECT_THROW(inject_noise(ds, {1.5, 1, {}}), ConfigError);
  EXPECT_THROW(inject_noise(ds, {-0.1, 1, {}}), ConfigError);
}

// The fixture's single purchase is held out; rank it by brute force.
TEST(Experiment, FixtureSingleUser) {
  ExperimentConfig cfg;
  cfg.behaviors = {"view", "cart", "purchase"};
  cfg.pipeline.ks = {1, 10};
  auto ds = testing::fixture_f1();
  auto result = run_experiment(cfg, ds);
  ASSERT_EQ(result.test_pairs.size(), 1u);
  EXPECT_EQ(result.report.n_users, 1u);
  auto split = leave_one_out_split(ds, cfg.split_seed);
  auto expect = testing::oracle_ranks(split.train, split.test_pairs, 1, 1.0, ScoreMode::kZScore);
  EXPECT_EQ(result.ranks, expect);
  EXPECT_EQ(result.report.metrics[1].recall, 1.0);  // only three items exist
}

TEST(Experiment, ErrorsAreStageTagged) {
  ExperimentConfig cfg;
  cfg.behaviors = {"view", "cart", "purchase"};
  auto no_target = make_dataset(testing::vcp_schema(), 2, 2, {{{0, 0}}, {}, {}});
  try {
    run_experiment(cfg, no_target);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "split");
    EXPECT_EQ(e.exit_code(), ExitCode::kData);
  }
  cfg.input = "/does/not/exist.tsv";
  try {
    run_experiment(cfg);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "read");
  }
}

TEST(Experiment, PlantedStructureIsRecovered) {
  auto ds = testing::planted_dataset();
  for (auto mode : {ScoreMode::kRaw, ScoreMode::kZScore}) {
    ExperimentConfig cfg;
    cfg.behaviors = {"view", "cart", "purchase"};
    cfg.split_seed = 7;
    cfg.pipeline.mode = mode;
    cfg.pipeline.chunk_size = 64;
    auto result = run_experiment(cfg, ds);
    EXPECT_GE(result.report.metrics[0].recall, 0.95);
  }
}

TEST(Experiment, NoiseSweepZeroRowEqualsCleanRun) {
  auto ds = testing::random_instance(77, 30, 0.3);
  ExperimentConfig cfg;
  cfg.behaviors = ds.schema().names();
  cfg.noise_fractions = {0.0, 0.2};
  cfg.noise_seed = 5;
  auto result = run_experiment(cfg, ds);
  ASSERT_EQ(result.noise.size(), 2u);
  EXPECT_EQ(result.noise[0].report, result.report);
}

}  // namespace
}  // namespace bpmr
