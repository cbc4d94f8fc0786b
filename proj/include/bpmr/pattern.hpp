#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "bpmr/dataset.hpp"
#include "bpmr/error.hpp"

namespace bpmr {

// Behavior sequence b1 o b2 o ... o bl of a user -> item walk. Odd steps
// go user -> item, even steps item -> user.
class BehaviorPattern {
 public:
  BehaviorPattern(std::vector<std::uint32_t> steps, std::size_t behavior_count) : steps_(std::move(steps)) {
    if (steps_.empty() || steps_.size() % 2 == 0) {
      throw ContractError("behavior pattern length must be odd, got " + std::to_string(steps_.size()));
    }
    for (auto b : steps_) {
      if (b >= behavior_count) throw ContractError("behavior pattern step out of range");
    }
  }

  std::size_t length() const noexcept { return steps_.size(); }
  std::uint32_t operator[](std::size_t k) const { return steps_[k]; }
  const std::vector<std::uint32_t>& steps() const noexcept { return steps_; }

  friend bool operator==(const BehaviorPattern&, const BehaviorPattern&) = default;

 private:
  std::vector<std::uint32_t> steps_;
};

// Labels joined by '>', e.g. "view>view>cart".
inline std::string format_pattern(const BehaviorSchema& schema, const BehaviorPattern& p) {
  std::string out;
  for (std::size_t k = 0; k < p.length(); ++k) {
    if (k) out += '>';
    out += schema.name(p[k]);
  }
  return out;
}

inline BehaviorPattern parse_pattern(const BehaviorSchema& schema, std::string_view text) {
  std::vector<std::uint32_t> steps;
  std::size_t start = 0;
  while (true) {
    auto end = text.find('>', start);
    auto label = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    auto b = schema.find(label);
    if (!b) throw DataError("unknown behavior '" + std::string(label) + "' in pattern '" + std::string(text) + "'");
    steps.push_back(static_cast<std::uint32_t>(*b));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return BehaviorPattern(std::move(steps), schema.size());
}

// Every odd-length pattern up to 2*alpha+1 steps, minus the bare target
// behavior. Length-major, lexicographic within a length.
class PatternSet {
 public:
  PatternSet(std::vector<BehaviorPattern> patterns, std::uint32_t alpha)
      : patterns_(std::move(patterns)), alpha_(alpha) {}

  std::size_t size() const noexcept { return patterns_.size(); }
  const BehaviorPattern& operator[](std::size_t f) const { return patterns_[f]; }
  const std::vector<BehaviorPattern>& patterns() const noexcept { return patterns_; }
  std::uint32_t alpha() const noexcept { return alpha_; }
  auto begin() const { return patterns_.begin(); }
  auto end() const { return patterns_.end(); }

  friend bool operator==(const PatternSet&, const PatternSet&) = default;

 private:
  std::vector<BehaviorPattern> patterns_;
  std::uint32_t alpha_;
};

// sum_{x=0..alpha} B^(2x+1) - 1, or CapacityError if it does not fit size_t.
inline std::size_t pattern_count(std::size_t behavior_count, std::uint32_t alpha) {
  std::size_t total = 0;
  std::size_t power = behavior_count;  // B^(2x+1)
  for (std::uint32_t x = 0; x <= alpha; ++x) {
    if (__builtin_add_overflow(total, power, &total)) throw CapacityError("pattern set size overflows size_t");
    if (x < alpha) {
      std::size_t square = 0;
      if (__builtin_mul_overflow(behavior_count, behavior_count, &square) ||
          __builtin_mul_overflow(power, square, &power)) {
        throw CapacityError("pattern set size overflows size_t");
      }
    }
  }
  return total - 1;
}

inline PatternSet enumerate_patterns(const BehaviorSchema& schema, std::uint32_t alpha) {
  const std::size_t n_behaviors = schema.size();
  const std::size_t total = pattern_count(n_behaviors, alpha);

  std::vector<BehaviorPattern> out;
  try {
    out.reserve(total);
  } catch (const std::exception&) {
    throw CapacityError("pattern set of " + std::to_string(total) + " patterns does not fit in memory");
  }
  for (std::uint32_t x = 0; x <= alpha; ++x) {
    const std::size_t len = 2 * std::size_t{x} + 1;
    std::vector<std::uint32_t> steps(len, 0);
    // Odometer over [0, B)^len, last position fastest.
    while (true) {
      if (!(len == 1 && steps[0] == schema.target_index())) out.emplace_back(steps, n_behaviors);
      std::size_t k = len;
      while (k > 0 && steps[k - 1] + 1 == n_behaviors) steps[--k] = 0;
      if (k == 0) break;
      ++steps[k - 1];
    }
  }
  return PatternSet(std::move(out), alpha);
}

}  // namespace bpmr
