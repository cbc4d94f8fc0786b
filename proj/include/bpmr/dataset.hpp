#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bpmr/error.hpp"

namespace bpmr {

using Index = std::uint32_t;
using Count = std::uint64_t;

struct Entry {
  Index user;
  Index item;
  friend bool operator==(const Entry&, const Entry&) = default;
  friend auto operator<=>(const Entry&, const Entry&) = default;
};

// Ordered behavior labels; the target behavior is always the last one.
class BehaviorSchema {
 public:
  explicit BehaviorSchema(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.size() < 2) {
      throw ConfigError("behavior schema needs at least 2 behaviors, got " + std::to_string(names_.size()));
    }
    for (std::size_t b = 0; b < names_.size(); ++b) {
      if (names_[b].empty()) throw ConfigError("behavior label must be non-empty");
      if (names_[b].find_first_of("\t\n>,") != std::string::npos) {
        throw ConfigError("behavior label '" + names_[b] + "' contains a reserved character");
      }
      for (std::size_t c = 0; c < b; ++c) {
        if (names_[c] == names_[b]) throw ConfigError("duplicate behavior label '" + names_[b] + "'");
      }
    }
  }

  std::size_t size() const noexcept { return names_.size(); }
  std::size_t target_index() const noexcept { return names_.size() - 1; }
  const std::string& name(std::size_t b) const { return names_.at(b); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  std::optional<std::size_t> find(std::string_view label) const {
    for (std::size_t b = 0; b < names_.size(); ++b) {
      if (names_[b] == label) return b;
    }
    return std::nullopt;
  }

  std::string joined(char sep = ',') const {
    std::string out;
    for (std::size_t b = 0; b < names_.size(); ++b) {
      if (b) out += sep;
      out += names_[b];
    }
    return out;
  }

  friend bool operator==(const BehaviorSchema&, const BehaviorSchema&) = default;

 private:
  std::vector<std::string> names_;
};

// Binary user x item matrix. Rows are kept in CSR form, and a CSC copy
// serves as the transpose view (item -> users).
class InteractionMatrix {
 public:
  InteractionMatrix() = default;

  // Duplicates are collapsed. Throws ContractError on out-of-range entries.
  InteractionMatrix(Index rows, Index cols, std::vector<Entry> entries) : rows_(rows), cols_(cols) {
    for (const auto& e : entries) {
      if (e.user >= rows || e.item >= cols) {
        throw ContractError("interaction entry out of range");
      }
    }
    std::sort(entries.begin(), entries.end());
    entries.erase(std::unique(entries.begin(), entries.end()), entries.end());

    row_offsets_.assign(std::size_t{rows} + 1, 0);
    col_offsets_.assign(std::size_t{cols} + 1, 0);
    row_items_.resize(entries.size());
    col_users_.resize(entries.size());
    for (const auto& e : entries) {
      ++row_offsets_[e.user + 1];
      ++col_offsets_[e.item + 1];
    }
    for (std::size_t r = 0; r < rows; ++r) row_offsets_[r + 1] += row_offsets_[r];
    for (std::size_t c = 0; c < cols; ++c) col_offsets_[c + 1] += col_offsets_[c];
    for (std::size_t k = 0; k < entries.size(); ++k) row_items_[k] = entries[k].item;
    // Entries are sorted by (user, item), so users come out sorted per column.
    std::vector<std::uint64_t> fill(col_offsets_.begin(), col_offsets_.end() - 1);
    for (const auto& e : entries) col_users_[fill[e.item]++] = e.user;
  }

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  std::uint64_t nnz() const noexcept { return row_items_.size(); }

  // Sorted item indices of user u.
  std::span<const Index> row(Index u) const {
    return {row_items_.data() + row_offsets_[u], row_items_.data() + row_offsets_[u + 1]};
  }
  // Sorted user indices of item i (transpose view).
  std::span<const Index> col(Index i) const {
    return {col_users_.data() + col_offsets_[i], col_users_.data() + col_offsets_[i + 1]};
  }
  std::size_t row_degree(Index u) const { return row_offsets_[u + 1] - row_offsets_[u]; }

  bool contains(Index u, Index i) const {
    auto r = row(u);
    return std::binary_search(r.begin(), r.end(), i);
  }

  std::vector<Entry> entries() const {
    std::vector<Entry> out;
    out.reserve(row_items_.size());
    for (Index u = 0; u < rows_; ++u) {
      for (Index i : row(u)) out.push_back({u, i});
    }
    return out;
  }

  friend bool operator==(const InteractionMatrix& a, const InteractionMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.row_offsets_ == b.row_offsets_ &&
           a.row_items_ == b.row_items_;
  }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<std::uint64_t> row_offsets_{0};
  std::vector<Index> row_items_;
  std::vector<std::uint64_t> col_offsets_{0};
  std::vector<Index> col_users_;
};

// Bijection between external string keys and dense indices.
class IdMap {
 public:
  Index intern(std::string_view key) {
    auto it = lookup_.find(std::string(key));
    if (it != lookup_.end()) return it->second;
    if (keys_.size() >= std::size_t{std::numeric_limits<Index>::max()}) {
      throw CapacityError("too many distinct ids");
    }
    auto id = static_cast<Index>(keys_.size());
    keys_.emplace_back(key);
    lookup_.emplace(keys_.back(), id);
    return id;
  }

  std::optional<Index> find(std::string_view key) const {
    auto it = lookup_.find(std::string(key));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& key(Index id) const { return keys_.at(id); }
  Index size() const noexcept { return static_cast<Index>(keys_.size()); }

 private:
  std::vector<std::string> keys_;
  std::unordered_map<std::string, Index> lookup_;
};

// Immutable after construction; matrices are shared between derived
// datasets (splits, noisy copies) when they are unchanged.
class MultiBehaviorDataset {
 public:
  MultiBehaviorDataset(BehaviorSchema schema, std::vector<std::shared_ptr<const InteractionMatrix>> matrices,
                       std::shared_ptr<const IdMap> users, std::shared_ptr<const IdMap> items)
      : schema_(std::move(schema)), matrices_(std::move(matrices)), users_(std::move(users)), items_(std::move(items)) {
    if (matrices_.size() != schema_.size()) {
      throw ContractError("dataset needs exactly one matrix per behavior");
    }
    for (const auto& m : matrices_) {
      if (!m || m->rows() != users_->size() || m->cols() != items_->size()) {
        throw ContractError("dataset matrices must share the id-map dimensions");
      }
    }
  }

  const BehaviorSchema& schema() const noexcept { return schema_; }
  std::size_t behavior_count() const noexcept { return schema_.size(); }
  Index user_count() const noexcept { return users_->size(); }
  Index item_count() const noexcept { return items_->size(); }

  const InteractionMatrix& matrix(std::size_t b) const { return *matrices_.at(b); }
  const InteractionMatrix& target() const { return *matrices_.back(); }
  const std::shared_ptr<const InteractionMatrix>& matrix_ptr(std::size_t b) const { return matrices_.at(b); }

  const IdMap& users() const noexcept { return *users_; }
  const IdMap& items() const noexcept { return *items_; }
  const std::shared_ptr<const IdMap>& users_ptr() const noexcept { return users_; }
  const std::shared_ptr<const IdMap>& items_ptr() const noexcept { return items_; }

  // Same schema and ids, one matrix replaced.
  MultiBehaviorDataset with_matrix(std::size_t b, InteractionMatrix m) const {
    auto mats = matrices_;
    mats.at(b) = std::make_shared<const InteractionMatrix>(std::move(m));
    return MultiBehaviorDataset(schema_, std::move(mats), users_, items_);
  }

 private:
  BehaviorSchema schema_;
  std::vector<std::shared_ptr<const InteractionMatrix>> matrices_;
  std::shared_ptr<const IdMap> users_;
  std::shared_ptr<const IdMap> items_;
};

// Builds a dataset directly from index-space entries; ids become the
// decimal strings "u<k>" and "i<k>".
inline MultiBehaviorDataset make_dataset(const BehaviorSchema& schema, Index n_users, Index n_items,
                                         std::vector<std::vector<Entry>> per_behavior) {
  if (per_behavior.size() != schema.size()) {
    throw ContractError("make_dataset: one entry list per behavior required");
  }
  auto users = std::make_shared<IdMap>();
  auto items = std::make_shared<IdMap>();
  for (Index u = 0; u < n_users; ++u) users->intern("u" + std::to_string(u));
  for (Index i = 0; i < n_items; ++i) items->intern("i" + std::to_string(i));
  std::vector<std::shared_ptr<const InteractionMatrix>> mats;
  for (auto& entries : per_behavior) {
    mats.push_back(std::make_shared<const InteractionMatrix>(n_users, n_items, std::move(entries)));
  }
  return MultiBehaviorDataset(schema, std::move(mats), std::move(users), std::move(items));
}

struct InteractionRecord {
  std::string user;
  std::string item;
  std::string behavior;
};

// Dense indices are assigned in first-appearance order over the whole
// stream, regardless of behavior.
template <typename Range>
MultiBehaviorDataset ingest(const Range& records, const BehaviorSchema& schema) {
  auto users = std::make_shared<IdMap>();
  auto items = std::make_shared<IdMap>();
  std::vector<std::vector<Entry>> per_behavior(schema.size());
  std::size_t ordinal = 0;
  for (const InteractionRecord& r : records) {
    ++ordinal;
    auto b = schema.find(r.behavior);
    if (!b) throw SchemaMismatchError(r.behavior, ordinal);
    Index u = users->intern(r.user);
    Index i = items->intern(r.item);
    per_behavior[*b].push_back({u, i});
  }
  if (ordinal == 0) throw EmptyDatasetError();

  std::vector<std::shared_ptr<const InteractionMatrix>> mats;
  mats.reserve(schema.size());
  for (auto& entries : per_behavior) {
    mats.push_back(std::make_shared<const InteractionMatrix>(users->size(), items->size(), std::move(entries)));
  }
  return MultiBehaviorDataset(schema, std::move(mats), std::move(users), std::move(items));
}

// Reads `user<TAB>item<TAB>behavior` lines; `#` lines and blank lines are skipped.
inline std::vector<InteractionRecord> read_records(std::istream& in, const std::string& source = "<stream>") {
  std::vector<InteractionRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
      throw DataError(source + ":" + std::to_string(line_no) + ": expected exactly 3 tab-separated fields");
    }
    InteractionRecord rec{line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), line.substr(t2 + 1)};
    if (rec.user.empty() || rec.item.empty() || rec.behavior.empty()) {
      throw DataError(source + ":" + std::to_string(line_no) + ": empty field");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<InteractionRecord> read_records_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file '" + path + "'");
  return read_records(in, path);
}

// Triples for every stored interaction, behavior-major then user, item.
inline std::vector<InteractionRecord> export_records(const MultiBehaviorDataset& ds) {
  std::vector<InteractionRecord> out;
  for (std::size_t b = 0; b < ds.behavior_count(); ++b) {
    for (const auto& e : ds.matrix(b).entries()) {
      out.push_back({ds.users().key(e.user), ds.items().key(e.item), ds.schema().name(b)});
    }
  }
  return out;
}

inline void write_records(std::ostream& out, std::span<const InteractionRecord> records) {
  for (const auto& r : records) out << r.user << '\t' << r.item << '\t' << r.behavior << '\n';
}

struct SplitDataset {
  MultiBehaviorDataset train;
  std::vector<Entry> test_pairs;  // sorted by user, at most one per user
};

// Holds out one target interaction per user, uniformly at random.
inline SplitDataset leave_one_out_split(const MultiBehaviorDataset& ds, std::uint64_t seed) {
  const auto& target = ds.target();
  if (target.nnz() == 0) throw DataError("cannot split: target behavior has no interactions");

  std::mt19937_64 rng(seed);
  std::vector<Entry> kept;
  kept.reserve(target.nnz());
  std::vector<Entry> held;
  for (Index u = 0; u < target.rows(); ++u) {
    auto row = target.row(u);
    if (row.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, row.size() - 1);
    std::size_t h = pick(rng);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k == h) {
        held.push_back({u, row[k]});
      } else {
        kept.push_back({u, row[k]});
      }
    }
  }
  return {ds.with_matrix(ds.schema().target_index(),
                         InteractionMatrix(target.rows(), target.cols(), std::move(kept))),
          std::move(held)};
}

}  // namespace bpmr
