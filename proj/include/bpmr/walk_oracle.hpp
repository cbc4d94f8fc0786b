#pragma once

#include <cstdint>
#include <vector>

#include "bpmr/dataset.hpp"
#include "bpmr/pattern.hpp"

namespace bpmr {

// Brute-force walk enumeration, used as ground truth for the chain-product
// counter. Builds its own adjacency lists from the raw entry lists and
// follows every walk step by step (no visited set: revisits are allowed).
// Only meant for small graphs.
class WalkOracle {
 public:
  explicit WalkOracle(const MultiBehaviorDataset& ds) : n_users_(ds.user_count()), n_items_(ds.item_count()) {
    for (std::size_t b = 0; b < ds.behavior_count(); ++b) {
      std::vector<std::vector<Index>> fwd(n_users_), bwd(n_items_);
      for (const auto& e : ds.matrix(b).entries()) {
        fwd[e.user].push_back(e.item);
        bwd[e.item].push_back(e.user);
      }
      user_to_item_.push_back(std::move(fwd));
      item_to_user_.push_back(std::move(bwd));
    }
  }

  // Number of walks from user u ending at item i.
  std::uint64_t count(const BehaviorPattern& p, Index u, Index i) const {
    std::uint64_t hits = 0;
    walk(p, 0, u, [&](Index end) { hits += end == i; });
    return hits;
  }

  // Walk counts from user u to every item.
  std::vector<std::uint64_t> count_row(const BehaviorPattern& p, Index u) const {
    std::vector<std::uint64_t> out(n_items_, 0);
    walk(p, 0, u, [&](Index end) { ++out[end]; });
    return out;
  }

 private:
  template <typename OnArrive>
  void walk(const BehaviorPattern& p, std::size_t step, Index node, OnArrive&& arrive) const {
    if (step == p.length()) {
      arrive(node);
      return;
    }
    const auto& adj = step % 2 == 0 ? user_to_item_[p[step]] : item_to_user_[p[step]];
    for (Index next : adj[node]) walk(p, step + 1, next, arrive);
  }

  Index n_users_;
  Index n_items_;
  std::vector<std::vector<std::vector<Index>>> user_to_item_;
  std::vector<std::vector<std::vector<Index>>> item_to_user_;
};

// Oracle walk count for a single (user, item) pair.
inline std::uint64_t count_paths_oracle(const MultiBehaviorDataset& train, const BehaviorPattern& pattern, Index u,
                                        Index i) {
  return WalkOracle(train).count(pattern, u, i);
}

}  // namespace bpmr
