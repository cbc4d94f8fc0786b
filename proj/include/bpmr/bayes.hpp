#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bpmr/dataset.hpp"
#include "bpmr/error.hpp"
#include "bpmr/pattern.hpp"
#include "bpmr/statistics.hpp"
#include "bpmr/walk_count.hpp"

namespace bpmr {

enum class ScoreMode { kRaw, kZScore };

inline std::string_view to_string(ScoreMode m) { return m == ScoreMode::kRaw ? "raw" : "zscore"; }

inline ScoreMode parse_score_mode(std::string_view s) {
  if (s == "raw") return ScoreMode::kRaw;
  if (s == "zscore") return ScoreMode::kZScore;
  throw ConfigError("unknown score mode '" + std::string(s) + "' (expected raw or zscore)");
}

struct PatternWeight {
  Count pos_sum = 0;
  Count neg_sum = 0;
  double p_pos = 0;  // P(f | Y=1)
  double p_neg = 0;  // P(f | Y=0)
  double weight = 0;  // log p_pos - log p_neg
};

struct FeatureWeights {
  std::vector<PatternWeight> patterns;
  double epsilon = 1.0;
};

// Naive Bayes class-conditional pattern probabilities with additive
// smoothing:
//   p_pos(f) = (pos_f + eps) / (sum_s pos_s + eps |T|)
//   p_neg(f) = (neg_f + eps) / (sum_s neg_s + eps |T|)
// With eps = 0 every pattern needs non-zero positive and negative mass.
inline FeatureWeights fit(const PatternStatistics& stats, double epsilon, const std::vector<std::string>& names = {}) {
  if (!(epsilon >= 0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be a finite value >= 0");
  const std::size_t n = stats.sums.size();
  if (n == 0) throw ContractError("fit: empty pattern set");
  auto name = [&](std::size_t f) { return f < names.size() ? names[f] : "#" + std::to_string(f); };

  Wide pos_total = 0;
  Wide neg_total = 0;
  for (std::size_t f = 0; f < n; ++f) {
    const auto& s = stats.sums[f];
    if (s.pos_sum > s.all_sum) throw ContractError("statistics for " + name(f) + " have pos_sum > all_sum");
    if (epsilon == 0 && (s.pos_sum == 0 || s.neg_sum() == 0)) throw DegenerateStatisticsError(name(f));
    pos_total += s.pos_sum;
    neg_total += s.neg_sum();
  }

  const long double smooth = static_cast<long double>(epsilon);
  const long double pos_den = static_cast<long double>(pos_total) + smooth * n;
  const long double neg_den = static_cast<long double>(neg_total) + smooth * n;

  FeatureWeights out;
  out.epsilon = epsilon;
  out.patterns.resize(n);
  for (std::size_t f = 0; f < n; ++f) {
    const auto& s = stats.sums[f];
    auto& w = out.patterns[f];
    w.pos_sum = s.pos_sum;
    w.neg_sum = s.neg_sum();
    const long double p_pos = (static_cast<long double>(s.pos_sum) + smooth) / pos_den;
    const long double p_neg = (static_cast<long double>(w.neg_sum) + smooth) / neg_den;
    w.p_pos = static_cast<double>(p_pos);
    w.p_neg = static_cast<double>(p_neg);
    w.weight = static_cast<double>(std::log(p_pos) - std::log(p_neg));
  }
  return out;
}

struct FeatureMoments {
  double mean = 0;
  double std = 1;
  bool degenerate = false;  // zero variance; std forced to 1
};

struct NormalizationParams {
  std::vector<FeatureMoments> patterns;
};

// Mean and population standard deviation of N^f over all train pairs.
// Variance is n * sum(x^2) - (sum x)^2 over n^2, evaluated in 128-bit
// integers when it fits.
inline NormalizationParams normalization_from(const PatternStatistics& stats) {
  if (stats.pair_count == 0) throw DataError("cannot normalize over an empty pair population");
  NormalizationParams out;
  out.patterns.resize(stats.sums.size());
  const long double n = static_cast<long double>(stats.pair_count);
  for (std::size_t f = 0; f < stats.sums.size(); ++f) {
    const auto& s = stats.sums[f];
    auto& m = out.patterns[f];
    m.mean = static_cast<double>(static_cast<long double>(s.all_sum) / n);

    long double variance = 0;
    Wide n_sq = 0;
    Wide sum_squared = 0;
    if (!__builtin_mul_overflow(Wide{stats.pair_count}, s.all_sq_sum, &n_sq) &&
        !__builtin_mul_overflow(Wide{s.all_sum}, Wide{s.all_sum}, &sum_squared)) {
      variance = static_cast<long double>(n_sq - sum_squared) / (n * n);
    } else {
      const long double mean = static_cast<long double>(s.all_sum) / n;
      variance = std::max(0.0L, static_cast<long double>(s.all_sq_sum) / n - mean * mean);
    }
    if (variance > 0) {
      m.std = static_cast<double>(std::sqrt(variance));
    } else {
      m.std = 1.0;
      m.degenerate = true;
    }
  }
  return out;
}

// Contribution of one feature to the log-odds score. Every scoring path
// goes through this function so that results are bit-identical.
inline double feature_term(Count n, double weight, const FeatureMoments& moments, ScoreMode mode) {
  const double x = mode == ScoreMode::kRaw ? static_cast<double>(n)
                                           : (static_cast<double>(n) - moments.mean) / moments.std;
  return x * weight;
}

struct ScoreModel {
  FeatureWeights weights;
  NormalizationParams norm;
  ScoreMode mode = ScoreMode::kZScore;

  void check(std::size_t n_patterns) const {
    if (weights.patterns.size() != n_patterns || norm.patterns.size() != n_patterns) {
      throw ContractError("score model has " + std::to_string(weights.patterns.size()) +
                          " weights for " + std::to_string(n_patterns) + " patterns");
    }
  }
};

struct ScoreBlock {
  IndexRange users;
  std::size_t items = 0;
  std::vector<double> scores;  // row-major users.size() x items

  double at(Index user, Index item) const { return scores[(user - users.begin) * items + item]; }
  std::span<const double> row(std::size_t r) const { return {scores.data() + r * items, items}; }
};

// score(u, i) = sum_f x_f * weight(f), summed in pattern order.
inline ScoreBlock score(const FeatureBlock& block, const FeatureWeights& weights, const NormalizationParams& norm,
                        ScoreMode mode) {
  const std::size_t n_patterns = block.counts.size();
  if (weights.patterns.size() != n_patterns || norm.patterns.size() != n_patterns) {
    throw ContractError("feature block patterns do not align with the fitted weights");
  }
  const std::size_t n_items = n_patterns ? block.counts[0].cols : 0;
  ScoreBlock out{block.users, n_items, std::vector<double>(block.users.size() * n_items, 0.0)};
  for (std::size_t f = 0; f < n_patterns; ++f) {
    const auto& counts = block.counts[f];
    if (counts.rows != block.users.size() || counts.cols != n_items) throw ContractError("ragged feature block");
    const double w = weights.patterns[f].weight;
    const auto& m = norm.patterns[f];
    for (std::size_t k = 0; k < counts.data.size(); ++k) out.scores[k] += feature_term(counts.data[k], w, m, mode);
  }
  return out;
}

// Computes full score rows one user at a time without materializing a
// FeatureBlock. Produces the same bits as score(compute_feature_block(...)).
class RowScorer {
 public:
  RowScorer(const MultiBehaviorDataset& train, const PatternSet& patterns, const ScoreModel& model,
            bool share_prefixes = false)
      : model_(&model), counter_(train, patterns, share_prefixes), n_items_(train.item_count()) {
    model.check(patterns.size());
    zero_terms_.resize(patterns.size());
    for (std::size_t f = 0; f < patterns.size(); ++f) {
      zero_terms_[f] = feature_term(0, model.weights.patterns[f].weight, model.norm.patterns[f], model.mode);
    }
  }

  // Fills `out` (size |I|) with the user's scores.
  void score_user(Index user, std::vector<double>& out) {
    out.assign(n_items_, 0.0);
    counter_.for_each_pattern(user, [&](std::size_t f, const WalkRow& row) {
      const double w = model_->weights.patterns[f].weight;
      const auto& m = model_->norm.patterns[f];
      const double zero = zero_terms_[f];
      const Count* dense = row.dense.data();
      for (std::size_t i = 0; i < n_items_; ++i) {
        out[i] += dense[i] == 0 ? zero : feature_term(dense[i], w, m, model_->mode);
      }
    });
  }

 private:
  const ScoreModel* model_;
  WalkCounter counter_;
  std::size_t n_items_;
  std::vector<double> zero_terms_;
};

// True when item a ranks ahead of item b: higher score, then lower index.
inline bool ranks_before(double score_a, Index a, double score_b, Index b) {
  return score_a > score_b || (score_a == score_b && a < b);
}

// Top-K items for one user, train positives (sorted) excluded.
inline std::vector<Index> top_k_items(std::span<const double> scores, std::span<const Index> train_positives,
                                      std::size_t k) {
  if (k == 0) throw ConfigError("K must be >= 1");
  std::vector<Index> eligible;
  eligible.reserve(scores.size());
  std::size_t p = 0;
  for (Index i = 0; i < scores.size(); ++i) {
    while (p < train_positives.size() && train_positives[p] < i) ++p;
    if (p < train_positives.size() && train_positives[p] == i) continue;
    eligible.push_back(i);
  }
  auto before = [&](Index a, Index b) { return ranks_before(scores[a], a, scores[b], b); };
  const std::size_t take = std::min(k, eligible.size());
  std::partial_sort(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(take), eligible.end(), before);
  eligible.resize(take);
  return eligible;
}

// Ranked lists for every user of a score block.
inline std::vector<std::vector<Index>> recommend_topk(const ScoreBlock& scores, const InteractionMatrix& train_target,
                                                      std::size_t k) {
  std::vector<std::vector<Index>> out;
  out.reserve(scores.users.size());
  for (std::size_t r = 0; r < scores.users.size(); ++r) {
    out.push_back(top_k_items(scores.row(r), train_target.row(static_cast<Index>(scores.users.begin + r)), k));
  }
  return out;
}

// 1-based rank of `item` among the eligible items under the top_k_items
// ordering, or nullopt if the item is itself a train positive.
inline std::optional<std::size_t> rank_of(std::span<const double> scores, std::span<const Index> train_positives,
                                          Index item) {
  if (std::binary_search(train_positives.begin(), train_positives.end(), item)) return std::nullopt;
  const double s = scores[item];
  std::size_t ahead = 0;
  for (Index i = 0; i < scores.size(); ++i) {
    if (ranks_before(scores[i], i, s, item)) ++ahead;
  }
  for (Index i : train_positives) {
    if (ranks_before(scores[i], i, s, item)) --ahead;
  }
  return ahead + 1;
}

}  // namespace bpmr
