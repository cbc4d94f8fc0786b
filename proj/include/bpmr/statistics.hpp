#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bpmr/dataset.hpp"
#include "bpmr/error.hpp"
#include "bpmr/parallel.hpp"
#include "bpmr/pattern.hpp"
#include "bpmr/walk_count.hpp"

namespace bpmr {

using Wide = unsigned __int128;

struct PatternSums {
  Count pos_sum = 0;    // sum of N^f over train target positives
  Count all_sum = 0;    // sum of N^f over all user x item pairs
  Wide all_sq_sum = 0;  // sum of (N^f)^2 over all pairs

  Count neg_sum() const noexcept { return all_sum - pos_sum; }
  friend bool operator==(const PatternSums&, const PatternSums&) = default;
};

// Exact integer sufficient statistics for fitting and z-scoring.
struct PatternStatistics {
  std::vector<PatternSums> sums;  // aligned with the PatternSet
  std::uint64_t pair_count = 0;      // |U| * |I|
  std::uint64_t pos_pair_count = 0;  // nnz of the train target matrix

  friend bool operator==(const PatternStatistics&, const PatternStatistics&) = default;
};

// Partial sums over a user range. pair_count/pos_pair_count are the
// range's share, so merging partitions reproduces the totals.
inline PatternStatistics empty_statistics(std::size_t n_patterns) {
  PatternStatistics s;
  s.sums.resize(n_patterns);
  return s;
}

// Associative and commutative; throws CountOverflowError on overflow.
inline void merge_into(PatternStatistics& into, const PatternStatistics& from, const std::vector<std::string>& names) {
  if (into.sums.size() != from.sums.size()) throw ContractError("merging statistics of different pattern sets");
  for (std::size_t f = 0; f < into.sums.size(); ++f) {
    auto& a = into.sums[f];
    const auto& b = from.sums[f];
    if (__builtin_add_overflow(a.pos_sum, b.pos_sum, &a.pos_sum) ||
        __builtin_add_overflow(a.all_sum, b.all_sum, &a.all_sum) ||
        __builtin_add_overflow(a.all_sq_sum, b.all_sq_sum, &a.all_sq_sum)) {
      throw CountOverflowError(f < names.size() ? names[f] : "#" + std::to_string(f));
    }
  }
  into.pair_count += from.pair_count;
  into.pos_pair_count += from.pos_pair_count;
}

inline PatternStatistics merge(PatternStatistics a, const PatternStatistics& b) {
  merge_into(a, b, {});
  return a;
}

struct StatisticsOptions {
  std::size_t chunk_size = 1024;
  std::size_t threads = 1;
  bool share_prefixes = false;
};

inline std::vector<std::string> pattern_names(const BehaviorSchema& schema, const PatternSet& patterns) {
  std::vector<std::string> names;
  names.reserve(patterns.size());
  for (const auto& p : patterns) names.push_back(format_pattern(schema, p));
  return names;
}

// Statistics for the users in `users` only.
inline PatternStatistics accumulate_range(const MultiBehaviorDataset& train, const PatternSet& patterns,
                                          IndexRange users, bool share_prefixes = false) {
  check_range(users, train.user_count(), "user");
  auto names = pattern_names(train.schema(), patterns);
  PatternStatistics out = empty_statistics(patterns.size());
  out.pair_count = std::uint64_t{users.size()} * train.item_count();
  const auto& target = train.target();
  WalkCounter counter(train, patterns, share_prefixes);
  for (std::size_t u = users.begin; u < users.end; ++u) {
    auto positives = target.row(static_cast<Index>(u));
    out.pos_pair_count += positives.size();
    counter.for_each_pattern(static_cast<Index>(u), [&](std::size_t f, const WalkRow& row) {
      auto& s = out.sums[f];
      bool overflow = false;
      for (Count c : row.value) {
        overflow |= __builtin_add_overflow(s.all_sum, c, &s.all_sum);
        overflow |= __builtin_add_overflow(s.all_sq_sum, Wide{c} * c, &s.all_sq_sum);
      }
      for (Index i : positives) overflow |= __builtin_add_overflow(s.pos_sum, row.dense[i], &s.pos_sum);
      if (overflow) throw CountOverflowError(names[f]);
    });
  }
  return out;
}

// Streams over user chunks; the result does not depend on chunk size or
// thread count.
inline PatternStatistics accumulate_statistics(const MultiBehaviorDataset& train, const PatternSet& patterns,
                                               const StatisticsOptions& opt = {}) {
  if (opt.chunk_size == 0) throw ConfigError("chunk_size must be >= 1");
  const std::size_t n_chunks = chunk_count(train.user_count(), opt.chunk_size);
  std::vector<PatternStatistics> partial(n_chunks);
  parallel_chunks(train.user_count(), opt.chunk_size, opt.threads, [&](std::size_t c, IndexRange r, std::size_t) {
    partial[c] = accumulate_range(train, patterns, r, opt.share_prefixes);
  });
  auto names = pattern_names(train.schema(), patterns);
  PatternStatistics total = empty_statistics(patterns.size());
  for (const auto& p : partial) merge_into(total, p, names);
  return total;
}

}  // namespace bpmr
