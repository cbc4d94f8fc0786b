#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "bpmr/error.hpp"

namespace bpmr {

// Leave-one-out has exactly one relevant item per user, so Recall@K is the
// hit indicator and the ideal DCG is 1.

inline double recall_at_k(std::optional<std::size_t> rank, std::size_t k) {
  if (k == 0) throw ConfigError("K must be >= 1");
  if (!rank || *rank == 0) throw ContractError("held-out item has no rank (it was excluded from the candidates)");
  return *rank <= k ? 1.0 : 0.0;
}

inline double ndcg_at_k(std::optional<std::size_t> rank, std::size_t k) {
  if (k == 0) throw ConfigError("K must be >= 1");
  if (!rank || *rank == 0) throw ContractError("held-out item has no rank (it was excluded from the candidates)");
  return *rank <= k ? 1.0 / std::log2(static_cast<double>(*rank) + 1.0) : 0.0;
}

struct MetricAtK {
  std::size_t k = 0;
  double recall = 0;
  double ndcg = 0;
  friend bool operator==(const MetricAtK&, const MetricAtK&) = default;
};

struct EvalReport {
  std::vector<MetricAtK> metrics;  // one entry per K, in config order
  std::size_t n_users = 0;
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// Means over users, summed in the given order.
inline EvalReport make_report(std::span<const std::size_t> ranks, std::span<const std::size_t> ks) {
  EvalReport rep;
  rep.n_users = ranks.size();
  for (std::size_t k : ks) {
    double recall = 0;
    double ndcg = 0;
    for (std::size_t r : ranks) {
      recall += recall_at_k(r, k);
      ndcg += ndcg_at_k(r, k);
    }
    const double n = ranks.empty() ? 1.0 : static_cast<double>(ranks.size());
    rep.metrics.push_back({k, recall / n, ndcg / n});
  }
  return rep;
}

}  // namespace bpmr
