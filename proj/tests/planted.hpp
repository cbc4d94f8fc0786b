#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "bpmr/bpmr.hpp"
#include "test_support.hpp"

namespace bpmr::testing {

// Planted view>view>cart structure with uniform distractors.
//
// Users form communities of `community_size`; the first half of each
// community are "carters", the second half "buyers". Each community owns
// `hubs` hub items and `targets` target items. Every member views all hubs,
// carters cart every target, buyers purchase every target. On top of that
// view and cart each receive independent uniform noise edges with
// probability `noise_density`. Purchases carry no noise, so every held-out
// purchase is a community target reachable from the buyer through
// hub -> carter -> cart walks.
struct PlantedConfig {
  Index users = 500;
  Index items = 200;
  Index community_size = 50;
  Index hubs = 5;
  Index targets = 3;
  double noise_density = 0.10;
  std::uint64_t seed = 2024;
};

inline MultiBehaviorDataset planted_dataset(const PlantedConfig& cfg = {}) {
  const Index n_comm = cfg.users / cfg.community_size;
  const Index per_comm_items = cfg.hubs + cfg.targets;
  if (n_comm * per_comm_items > cfg.items) throw ContractError("planted config needs more items");
  std::vector<std::vector<Entry>> per(3);
  for (Index c = 0; c < n_comm; ++c) {
    const Index first_item = c * per_comm_items;
    for (Index m = 0; m < cfg.community_size; ++m) {
      const Index u = c * cfg.community_size + m;
      const bool carter = m < cfg.community_size / 2;
      for (Index h = 0; h < cfg.hubs; ++h) per[0].push_back({u, first_item + h});
      for (Index t = 0; t < cfg.targets; ++t) per[carter ? 1 : 2].push_back({u, first_item + cfg.hubs + t});
    }
  }
  std::mt19937_64 rng(cfg.seed);
  std::bernoulli_distribution coin(cfg.noise_density);
  for (std::size_t b : {0, 1}) {
    for (Index u = 0; u < cfg.users; ++u) {
      for (Index i = 0; i < cfg.items; ++i) {
        if (coin(rng)) per[b].push_back({u, i});
      }
    }
  }
  return make_dataset(vcp_schema(), cfg.users, cfg.items, std::move(per));
}

// Independent brute-force evaluation: DFS walk counts, two-pass moments,
// direct naive Bayes formulas and an explicit ranking, all in long double.
// Returns the 1-based rank of each held-out item.
inline std::vector<std::size_t> oracle_ranks(const MultiBehaviorDataset& train, std::span<const Entry> test_pairs,
                                             std::uint32_t alpha, double epsilon, ScoreMode mode) {
  const auto patterns = enumerate_patterns(train.schema(), alpha);
  const std::size_t n_f = patterns.size();
  const Index n_u = train.user_count();
  const Index n_i = train.item_count();
  WalkOracle oracle(train);

  std::set<std::pair<Index, Index>> positive;
  for (const auto& e : train.target().entries()) positive.insert({e.user, e.item});

  // counts[u][f][i]
  std::vector<std::vector<std::vector<std::uint64_t>>> counts(n_u);
  for (Index u = 0; u < n_u; ++u) {
    for (std::size_t f = 0; f < n_f; ++f) counts[u].push_back(oracle.count_row(patterns[f], u));
  }

  std::vector<long double> pos(n_f, 0), neg(n_f, 0), mean(n_f, 0), sd(n_f, 0);
  const long double pairs = static_cast<long double>(n_u) * n_i;
  for (std::size_t f = 0; f < n_f; ++f) {
    for (Index u = 0; u < n_u; ++u) {
      for (Index i = 0; i < n_i; ++i) {
        const auto c = static_cast<long double>(counts[u][f][i]);
        (positive.count({u, i}) ? pos[f] : neg[f]) += c;
        mean[f] += c;
      }
    }
    mean[f] /= pairs;
    long double var = 0;
    for (Index u = 0; u < n_u; ++u) {
      for (Index i = 0; i < n_i; ++i) {
        const long double d = static_cast<long double>(counts[u][f][i]) - mean[f];
        var += d * d;
      }
    }
    var /= pairs;
    sd[f] = var > 0 ? std::sqrt(var) : 1.0L;
  }
  long double pos_total = 0, neg_total = 0;
  for (std::size_t f = 0; f < n_f; ++f) {
    pos_total += pos[f];
    neg_total += neg[f];
  }
  std::vector<long double> weight(n_f);
  for (std::size_t f = 0; f < n_f; ++f) {
    const long double pp = (pos[f] + epsilon) / (pos_total + epsilon * n_f);
    const long double pn = (neg[f] + epsilon) / (neg_total + epsilon * n_f);
    weight[f] = std::log(pp) - std::log(pn);
  }

  std::vector<std::size_t> ranks;
  for (const auto& t : test_pairs) {
    std::vector<long double> s(n_i, 0);
    for (Index i = 0; i < n_i; ++i) {
      for (std::size_t f = 0; f < n_f; ++f) {
        const long double n = static_cast<long double>(counts[t.user][f][i]);
        const long double x = mode == ScoreMode::kRaw ? n : (n - mean[f]) / sd[f];
        s[i] += x * weight[f];
      }
    }
    std::size_t rank = 1;
    for (Index i = 0; i < n_i; ++i) {
      if (i == t.item || positive.count({t.user, i})) continue;
      if (s[i] > s[t.item] || (s[i] == s[t.item] && i < t.item)) ++rank;
    }
    ranks.push_back(rank);
  }
  return ranks;
}

inline double hit_rate(std::span<const std::size_t> ranks, std::size_t k) {
  if (ranks.empty()) return 0.0;
  std::size_t hits = 0;
  for (auto r : ranks) hits += r <= k;
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

}  // namespace bpmr::testing
