#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "bpmr/bayes.hpp"
#include "bpmr/dataset.hpp"
#include "bpmr/error.hpp"
#include "bpmr/metrics.hpp"
#include "bpmr/parallel.hpp"
#include "bpmr/pattern.hpp"
#include "bpmr/statistics.hpp"

namespace bpmr {

// ---------------------------------------------------------------------------
// Sparsity groups
// ---------------------------------------------------------------------------

struct SparsityGroup {
  std::vector<std::size_t> members;  // indices into test_pairs
  std::size_t min_degree = 0;
  std::size_t max_degree = 0;
};

// Test users sorted by train target degree (ties by user index), cut into
// n_groups consecutive groups whose sizes differ by at most one. The first
// (size % n_groups) groups take the extra user.
inline std::vector<SparsityGroup> group_users_by_sparsity(const MultiBehaviorDataset& train,
                                                          std::span<const Entry> test_pairs, std::size_t n_groups = 5) {
  if (n_groups == 0) throw ConfigError("number of sparsity groups must be >= 1");
  if (test_pairs.size() < n_groups) {
    throw DataError("cannot split " + std::to_string(test_pairs.size()) + " test users into " +
                    std::to_string(n_groups) + " groups");
  }
  const auto& target = train.target();
  std::vector<std::size_t> order(test_pairs.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  auto degree = [&](std::size_t k) { return target.row_degree(test_pairs[k].user); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto da = degree(a), db = degree(b);
    return da != db ? da < db : test_pairs[a].user < test_pairs[b].user;
  });

  std::vector<SparsityGroup> groups(n_groups);
  const std::size_t base = order.size() / n_groups;
  const std::size_t extra = order.size() % n_groups;
  std::size_t pos = 0;
  for (std::size_t g = 0; g < n_groups; ++g) {
    const std::size_t size = base + (g < extra ? 1 : 0);
    auto& grp = groups[g];
    grp.members.assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                       order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    grp.min_degree = degree(grp.members.front());
    grp.max_degree = degree(grp.members.back());
    pos += size;
  }
  return groups;
}

// ---------------------------------------------------------------------------
// Auxiliary-behavior noise
// ---------------------------------------------------------------------------

struct NoiseConfig {
  double fraction = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> affected;  // auxiliary behavior indices; empty = all auxiliary
};

inline std::uint64_t noise_additions(double fraction, std::uint64_t nnz) {
  return static_cast<std::uint64_t>(std::floor(fraction * static_cast<double>(nnz)));
}

// Adds floor(fraction * nnz(E^b)) fake interactions to each affected
// auxiliary behavior, drawn uniformly without replacement from the empty
// cells of E^b. The target matrix is never touched.
inline MultiBehaviorDataset inject_noise(const MultiBehaviorDataset& ds, const NoiseConfig& cfg) {
  if (!(cfg.fraction >= 0.0 && cfg.fraction <= 1.0)) throw ConfigError("noise fraction must lie in [0, 1]");
  std::vector<std::size_t> affected = cfg.affected;
  if (affected.empty()) {
    for (std::size_t b = 0; b + 1 < ds.behavior_count(); ++b) affected.push_back(b);
  }
  std::sort(affected.begin(), affected.end());
  affected.erase(std::unique(affected.begin(), affected.end()), affected.end());

  MultiBehaviorDataset out = ds;
  const std::uint64_t n_items = ds.item_count();
  const std::uint64_t cells = std::uint64_t{ds.user_count()} * n_items;
  for (std::size_t b : affected) {
    if (b >= ds.behavior_count()) throw ConfigError("noise behavior index out of range");
    if (b == ds.schema().target_index()) throw ConfigError("noise may not touch the target behavior");
    const auto& m = ds.matrix(b);
    const std::uint64_t add = noise_additions(cfg.fraction, m.nnz());
    if (add == 0) continue;
    const std::uint64_t empty = cells - m.nnz();
    if (add > empty) {
      throw DataError("cannot add " + std::to_string(add) + " noise interactions to behavior '" +
                      ds.schema().name(b) + "': only " + std::to_string(empty) + " empty cells");
    }

    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(b)};
    std::mt19937_64 rng(seq);
    std::vector<Entry> entries = m.entries();
    entries.reserve(entries.size() + add);
    if (add * 2 <= empty) {
      std::uniform_int_distribution<std::uint64_t> cell(0, cells - 1);
      std::unordered_set<std::uint64_t> chosen;
      chosen.reserve(add * 2);
      while (chosen.size() < add) {
        const std::uint64_t c = cell(rng);
        const auto u = static_cast<Index>(c / n_items);
        const auto i = static_cast<Index>(c % n_items);
        if (m.contains(u, i) || !chosen.insert(c).second) continue;
        entries.push_back({u, i});
      }
    } else {
      // Dense regime: enumerate the empty cells and take a partial shuffle.
      std::vector<std::uint64_t> pool;
      pool.reserve(empty);
      for (std::uint64_t c = 0; c < cells; ++c) {
        if (!m.contains(static_cast<Index>(c / n_items), static_cast<Index>(c % n_items))) pool.push_back(c);
      }
      for (std::uint64_t k = 0; k < add; ++k) {
        std::uniform_int_distribution<std::uint64_t> pick(k, pool.size() - 1);
        std::swap(pool[k], pool[pick(rng)]);
        entries.push_back({static_cast<Index>(pool[k] / n_items), static_cast<Index>(pool[k] % n_items)});
      }
    }
    out = out.with_matrix(b, InteractionMatrix(ds.user_count(), ds.item_count(), std::move(entries)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

struct PipelineOptions {
  std::uint32_t alpha = 1;
  double epsilon = 1.0;
  ScoreMode mode = ScoreMode::kZScore;
  std::vector<std::size_t> ks{10, 50};
  std::size_t chunk_size = 1024;
  std::size_t threads = 1;
  bool share_prefixes = false;
};

struct FittedModel {
  PatternSet patterns;
  PatternStatistics stats;
  ScoreModel model;
  std::uint32_t alpha = 1;
};

// enumerate -> statistics -> fit -> normalization, each stage tagged.
inline FittedModel fit_model(const MultiBehaviorDataset& train, const PipelineOptions& opt) {
  PatternSet patterns = run_stage("enumerate", [&] { return enumerate_patterns(train.schema(), opt.alpha); });
  PatternStatistics stats = run_stage("statistics", [&] {
    return accumulate_statistics(train, patterns, {opt.chunk_size, opt.threads, opt.share_prefixes});
  });
  auto names = pattern_names(train.schema(), patterns);
  FeatureWeights weights = run_stage("fit", [&] { return fit(stats, opt.epsilon, names); });
  NormalizationParams norm = run_stage("normalize", [&] { return normalization_from(stats); });
  return {std::move(patterns), std::move(stats), ScoreModel{std::move(weights), std::move(norm), opt.mode}, opt.alpha};
}

// 1-based rank of every held-out item, in test_pairs order.
inline std::vector<std::size_t> rank_test_items(const MultiBehaviorDataset& train, const PatternSet& patterns,
                                                const ScoreModel& model, std::span<const Entry> test_pairs,
                                                const PipelineOptions& opt) {
  if (opt.chunk_size == 0) throw ConfigError("chunk_size must be >= 1");
  std::vector<std::size_t> ranks(test_pairs.size(), 0);
  parallel_chunks(test_pairs.size(), opt.chunk_size, opt.threads, [&](std::size_t, IndexRange r, std::size_t) {
    RowScorer scorer(train, patterns, model, opt.share_prefixes);
    std::vector<double> row;
    for (std::size_t k = r.begin; k < r.end; ++k) {
      const Entry& t = test_pairs[k];
      scorer.score_user(t.user, row);
      for (double s : row) {
        if (!std::isfinite(s)) throw DataError("non-finite score for user '" + train.users().key(t.user) + "'");
      }
      auto rank = rank_of(row, train.target().row(t.user), t.item);
      if (!rank) {
        throw ContractError("held-out item of user '" + train.users().key(t.user) + "' is a train positive");
      }
      ranks[k] = *rank;
    }
  });
  return ranks;
}

struct EvalRun {
  EvalReport report;
  std::vector<std::size_t> ranks;  // aligned with test_pairs
};

// Everything after the split: fit on train, rank held-out items, metrics.
inline EvalRun evaluate_split(const MultiBehaviorDataset& train, std::span<const Entry> test_pairs,
                              const PipelineOptions& opt) {
  for (std::size_t k : opt.ks) {
    if (k == 0) throw ConfigError("K values must be >= 1");
  }
  FittedModel fitted = fit_model(train, opt);
  auto ranks = run_stage("score", [&] { return rank_test_items(train, fitted.patterns, fitted.model, test_pairs, opt); });
  auto report = run_stage("metrics", [&] { return make_report(ranks, opt.ks); });
  return {std::move(report), std::move(ranks)};
}

struct GroupReport {
  SparsityGroup group;
  EvalReport report;
};

inline std::vector<GroupReport> sparsity_reports(const MultiBehaviorDataset& train, std::span<const Entry> test_pairs,
                                                 std::span<const std::size_t> ranks, std::span<const std::size_t> ks,
                                                 std::size_t n_groups = 5) {
  std::vector<GroupReport> out;
  for (auto& g : group_users_by_sparsity(train, test_pairs, n_groups)) {
    // Members in test-pair order so the mean is accumulated deterministically.
    std::vector<std::size_t> members = g.members;
    std::sort(members.begin(), members.end());
    std::vector<std::size_t> group_ranks;
    group_ranks.reserve(members.size());
    for (std::size_t k : members) group_ranks.push_back(ranks[k]);
    auto rep = make_report(group_ranks, ks);
    out.push_back({std::move(g), std::move(rep)});
  }
  return out;
}

struct NoiseRow {
  double fraction = 0;
  EvalReport report;
};

// Refits and re-evaluates on train with noise added to the auxiliary
// behaviors; the held-out pairs stay fixed.
inline std::vector<NoiseRow> noise_sweep(const MultiBehaviorDataset& train, std::span<const Entry> test_pairs,
                                         std::span<const double> fractions, std::uint64_t noise_seed,
                                         const PipelineOptions& opt) {
  std::vector<NoiseRow> rows;
  for (double fraction : fractions) {
    auto noisy = run_stage("noise", [&] { return inject_noise(train, {fraction, noise_seed, {}}); });
    rows.push_back({fraction, evaluate_split(noisy, test_pairs, opt).report});
  }
  return rows;
}

}  // namespace bpmr
