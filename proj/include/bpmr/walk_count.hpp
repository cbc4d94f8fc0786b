#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "bpmr/dataset.hpp"
#include "bpmr/error.hpp"
#include "bpmr/parallel.hpp"
#include "bpmr/pattern.hpp"

namespace bpmr {

// Which side of the bipartite graph a walk starts from.
enum class Side { kUser, kItem };

// One pattern's walk counts from a single start node. `index`/`value` hold
// the non-zero entries (unordered); `dense` is the same data as a full row
// and is only valid during the visit callback.
struct WalkRow {
  std::span<const Index> index;
  std::span<const Count> value;
  std::span<const Count> dense;
};

// Row-at-a-time chain product. For a start node s and pattern b1..bl it
// propagates the indicator vector of s through E^{b1}, (E^{b2})^T, E^{b3}, ...
// keeping one sparse accumulator per node side. Counts are exact; an
// overflow of the 64-bit counter throws CountOverflowError.
//
// With prefix sharing enabled, the intermediate vectors of the previous
// pattern are reused up to the longest common prefix. Patterns from
// enumerate_patterns are lexicographically ordered, so neighbors share the
// most.
class WalkCounter {
 public:
  WalkCounter(const MultiBehaviorDataset& ds, const PatternSet& patterns, bool share_prefixes = false,
              Side start = Side::kUser)
      : ds_(&ds), patterns_(&patterns), share_(share_prefixes), start_(start) {
    std::size_t max_len = 0;
    for (const auto& p : patterns) max_len = std::max(max_len, p.length());
    levels_.resize(max_len);
    acc_[0].assign(ds.user_count(), 0);
    acc_[1].assign(ds.item_count(), 0);
  }

  // Calls visit(pattern_index, WalkRow) for every pattern, in order.
  template <typename Visit>
  void for_each_pattern(Index start_node, Visit&& visit) {
    const BehaviorPattern* prev = nullptr;
    std::size_t valid = 0;  // levels_[0, valid) hold the previous pattern's prefixes
    for (std::size_t f = 0; f < patterns_->size(); ++f) {
      const auto& p = (*patterns_)[f];
      std::size_t reuse = 0;
      if (share_ && prev) {
        std::size_t limit = std::min({valid, p.length() - 1, prev->length()});
        while (reuse < limit && p[reuse] == (*prev)[reuse]) ++reuse;
      }
      for (std::size_t k = reuse; k + 1 < p.length(); ++k) advance(start_node, p, k, true);
      advance(start_node, p, p.length() - 1, false);

      auto& acc = accumulator(p.length() - 1);
      const auto& last = levels_[p.length() - 1];
      visit(f, WalkRow{last.index, last.value, acc});
      for (Index j : last.index) acc[j] = 0;

      prev = &p;
      valid = p.length();
    }
  }

  // Counts for a single pattern (which need not belong to the pattern set).
  // Returned as a dense row over the far side.
  std::vector<Count> dense_row(Index start_node, const BehaviorPattern& p) {
    for (std::size_t k = 0; k + 1 < p.length(); ++k) advance(start_node, p, k, true);
    advance(start_node, p, p.length() - 1, false);
    auto& acc = accumulator(p.length() - 1);
    std::vector<Count> out(acc.begin(), acc.end());
    for (Index j : levels_[p.length() - 1].index) acc[j] = 0;
    return out;
  }

 private:
  struct Level {
    std::vector<Index> index;
    std::vector<Count> value;
  };

  // Side reached after step k (0-based): user-start walks land on items at
  // even k; item-start walks land on users.
  bool lands_on_item(std::size_t k) const { return (k % 2 == 0) == (start_ == Side::kUser); }
  std::vector<Count>& accumulator(std::size_t k) { return acc_[lands_on_item(k) ? 1 : 0]; }

  // Computes levels_[k] from levels_[k-1] (or the start node). When
  // `release` is set the dense accumulator is cleared afterwards.
  void advance(Index start_node, const BehaviorPattern& p, std::size_t k, bool release) {
    if (k >= levels_.size()) levels_.resize(k + 1);
    const InteractionMatrix& m = ds_->matrix(p[k]);
    const bool to_item = lands_on_item(k);
    auto& acc = accumulator(k);
    Level& out = levels_[k];
    out.index.clear();

    auto spread = [&](Index node, Count weight) {
      auto nbrs = to_item ? m.row(node) : m.col(node);
      for (Index j : nbrs) {
        Count& slot = acc[j];
        if (slot == 0) out.index.push_back(j);
        if (__builtin_add_overflow(slot, weight, &slot)) {
          throw CountOverflowError(format_pattern(ds_->schema(), p));
        }
      }
    };
    if (k == 0) {
      spread(start_node, 1);
    } else {
      const Level& in = levels_[k - 1];
      for (std::size_t n = 0; n < in.index.size(); ++n) spread(in.index[n], in.value[n]);
    }

    out.value.resize(out.index.size());
    for (std::size_t n = 0; n < out.index.size(); ++n) out.value[n] = acc[out.index[n]];
    if (release) {
      for (Index j : out.index) acc[j] = 0;
    }
  }

  const MultiBehaviorDataset* ds_;
  const PatternSet* patterns_;
  bool share_;
  Side start_;
  std::vector<Level> levels_;
  std::vector<Count> acc_[2];  // [0] user side, [1] item side
};

// Dense row-major count matrix: one row per start node in a range.
struct CountMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Count> data;

  CountMatrix() = default;
  CountMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0) {}

  Count at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const Count> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  std::span<Count> row(std::size_t r) { return {data.data() + r * cols, cols}; }

  friend bool operator==(const CountMatrix&, const CountMatrix&) = default;
};

// Walk counts N^f for every pattern f, a contiguous user range, all items.
struct FeatureBlock {
  IndexRange users;
  std::vector<CountMatrix> counts;  // one (users.size() x |I|) matrix per pattern

  Count at(std::size_t f, Index user, Index item) const { return counts[f].at(user - users.begin, item); }
};

inline void check_range(IndexRange r, std::size_t n, const char* what) {
  if (r.begin > r.end || r.end > n) {
    throw ContractError(std::string(what) + " range [" + std::to_string(r.begin) + ", " + std::to_string(r.end) +
                        ") outside [0, " + std::to_string(n) + ")");
  }
}

// N^pattern for users in `users` x all items.
inline CountMatrix count_paths(const MultiBehaviorDataset& train, const BehaviorPattern& pattern, IndexRange users) {
  check_range(users, train.user_count(), "user");
  PatternSet single({pattern}, 0);
  WalkCounter counter(train, single);
  CountMatrix out(users.size(), train.item_count());
  for (std::size_t r = 0; r < users.size(); ++r) {
    counter.for_each_pattern(static_cast<Index>(users.begin + r), [&](std::size_t, const WalkRow& row) {
      auto dst = out.row(r);
      for (std::size_t n = 0; n < row.index.size(); ++n) dst[row.index[n]] = row.value[n];
    });
  }
  return out;
}

// Counts of `pattern` walked from items back to users: entry (i, u) counts
// walks i -b1-> . -b2-> ... -bl-> u, i.e. the pattern read right to left.
inline CountMatrix count_paths_from_items(const MultiBehaviorDataset& train, const BehaviorPattern& pattern,
                                          IndexRange items) {
  check_range(items, train.item_count(), "item");
  PatternSet single({pattern}, 0);
  WalkCounter counter(train, single, false, Side::kItem);
  CountMatrix out(items.size(), train.user_count());
  for (std::size_t r = 0; r < items.size(); ++r) {
    counter.for_each_pattern(static_cast<Index>(items.begin + r), [&](std::size_t, const WalkRow& row) {
      auto dst = out.row(r);
      for (std::size_t n = 0; n < row.index.size(); ++n) dst[row.index[n]] = row.value[n];
    });
  }
  return out;
}

inline FeatureBlock compute_feature_block(const MultiBehaviorDataset& train, const PatternSet& patterns,
                                          IndexRange users, bool share_prefixes = false) {
  check_range(users, train.user_count(), "user");
  FeatureBlock block{users, {}};
  block.counts.reserve(patterns.size());
  for (std::size_t f = 0; f < patterns.size(); ++f) block.counts.emplace_back(users.size(), train.item_count());
  WalkCounter counter(train, patterns, share_prefixes);
  for (std::size_t r = 0; r < users.size(); ++r) {
    counter.for_each_pattern(static_cast<Index>(users.begin + r), [&](std::size_t f, const WalkRow& row) {
      auto dst = block.counts[f].row(r);
      for (std::size_t n = 0; n < row.index.size(); ++n) dst[row.index[n]] = row.value[n];
    });
  }
  return block;
}

// 1^T E^{b1} (E^{b2})^T E^{b3} ... 1 by vector-matrix products, never
// forming a product matrix.
inline Count total_walk_count(const MultiBehaviorDataset& train, const BehaviorPattern& pattern) {
  std::vector<Count> vec(train.user_count(), 1);  // on users before odd steps
  for (std::size_t k = 0; k < pattern.length(); ++k) {
    const auto& m = train.matrix(pattern[k]);
    const bool to_item = k % 2 == 0;
    std::vector<Count> next(to_item ? train.item_count() : train.user_count(), 0);
    for (Index n = 0; n < next.size(); ++n) {
      auto nbrs = to_item ? m.col(n) : m.row(n);  // pull from the previous side
      Count s = 0;
      for (Index j : nbrs) {
        if (__builtin_add_overflow(s, vec[j], &s)) throw CountOverflowError(format_pattern(train.schema(), pattern));
      }
      next[n] = s;
    }
    vec = std::move(next);
  }
  Count total = 0;
  for (Count c : vec) {
    if (__builtin_add_overflow(total, c, &total)) throw CountOverflowError(format_pattern(train.schema(), pattern));
  }
  return total;
}

// One line per non-zero count: user, item, pattern, count (sorted by user,
// item, then pattern order).
inline void write_feature_block_tsv(std::ostream& out, const MultiBehaviorDataset& train, const PatternSet& patterns,
                                    const FeatureBlock& block) {
  std::vector<std::string> names;
  for (const auto& p : patterns) names.push_back(format_pattern(train.schema(), p));
  for (std::size_t r = 0; r < block.users.size(); ++r) {
    const auto u = static_cast<Index>(block.users.begin + r);
    for (Index i = 0; i < train.item_count(); ++i) {
      for (std::size_t f = 0; f < patterns.size(); ++f) {
        Count c = block.counts[f].at(r, i);
        if (c == 0) continue;
        out << train.users().key(u) << '\t' << train.items().key(i) << '\t' << names[f] << '\t' << c << '\n';
      }
    }
  }
}

}  // namespace bpmr
