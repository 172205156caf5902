#pragma once

// Crossed by-passable binary delay register (CBDR).
//
// A register of K steps carries delays 1T, 2T, ..., 2^(K-1)T; a photon takes
// or bypasses each step, so a subset of steps is a K-bit mask and its total
// delay is the mask value itself. The crossed layout limits boundary sources:
// source i (1-based, top = 1) can take at most i-1 steps and skip at most S-i.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spdcmux/errors.hpp"

namespace spdcmux {

enum class BoundaryMode { constrained, unconstrained };

inline constexpr int kMaxStepCount = 12;

/// Photons that can be deferred to the next pump cycle: 2^K - m.
inline int storage_capacity(int step_count, int multiple) {
  if (step_count < 1 || step_count > kMaxStepCount) {
    throw domain_error("step count must lie in [1, " +
                       std::to_string(kMaxStepCount) + "]");
  }
  const int train = 1 << step_count;
  if (multiple < 1 || multiple > train) {
    throw domain_error("frequency multiple " + std::to_string(multiple) +
                       " outside [1, " + std::to_string(train) + "]");
  }
  return train - multiple;
}

struct DelaySet {
  int source_index = 0;
  std::vector<int> accessible;  // ascending, units of T

  bool contains(int delay) const {
    return std::binary_search(accessible.begin(), accessible.end(), delay);
  }
};

struct DelayPath {
  int delay = 0;
  std::vector<int> steps;  // delays of the steps taken, ascending
};

struct DelayAssignment {
  int source_index = 0;
  int delay = 0;
};

class RegisterTopology {
 public:
  RegisterTopology(int source_count, int step_count,
                   BoundaryMode mode = BoundaryMode::constrained)
      : source_count_(source_count), step_count_(step_count), mode_(mode) {
    if (source_count < 1) throw domain_error("source count must be at least 1");
    if (step_count < 1 || step_count > kMaxStepCount) {
      throw domain_error("step count must lie in [1, " +
                         std::to_string(kMaxStepCount) + "]");
    }
    const auto width = static_cast<std::size_t>(train_length());
    reach_.assign(static_cast<std::size_t>(source_count) * width, 0);
    for (int i = 1; i <= source_count; ++i) {
      const auto [lo, hi] = step_bounds(i);
      for (int d = 0; d < train_length(); ++d) {
        const int taken = std::popcount(static_cast<unsigned>(d));
        reach_[row(i) + static_cast<std::size_t>(d)] =
            (taken >= lo && taken <= hi) ? 1 : 0;
      }
    }
  }

  int source_count() const noexcept { return source_count_; }
  int step_count() const noexcept { return step_count_; }
  BoundaryMode mode() const noexcept { return mode_; }
  /// Number of distinct delays, 2^K; also the longest photon train.
  int train_length() const noexcept { return 1 << step_count_; }
  int max_delay() const noexcept { return train_length() - 1; }

  std::vector<int> step_delays() const {
    std::vector<int> out;
    for (int k = 0; k < step_count_; ++k) out.push_back(1 << k);
    return out;
  }

  bool can_reach(int source_index, int delay) const {
    check_index(source_index);
    if (delay < 0 || delay > max_delay()) return false;
    return reach_[row(source_index) + static_cast<std::size_t>(delay)] != 0;
  }

  DelaySet accessible_delays(int source_index) const {
    check_index(source_index);
    DelaySet set{source_index, {}};
    for (int d = 0; d <= max_delay(); ++d) {
      if (can_reach(source_index, d)) set.accessible.push_back(d);
    }
    return set;
  }

  std::vector<DelayPath> enumerate_delay_paths(int source_index) const {
    check_index(source_index);
    std::vector<DelayPath> paths;
    for (int d = 0; d <= max_delay(); ++d) {
      if (!can_reach(source_index, d)) continue;
      DelayPath path{d, {}};
      for (int k = 0; k < step_count_; ++k) {
        if (d & (1 << k)) path.steps.push_back(1 << k);
      }
      paths.push_back(std::move(path));
    }
    return paths;
  }

 private:
  struct Bounds {
    int lo;
    int hi;
  };

  Bounds step_bounds(int i) const {
    if (mode_ == BoundaryMode::unconstrained) return {0, step_count_};
    return {std::max(0, step_count_ - (source_count_ - i)),
            std::min(step_count_, i - 1)};
  }

  std::size_t row(int source_index) const {
    return static_cast<std::size_t>(source_index - 1) *
           static_cast<std::size_t>(train_length());
  }

  void check_index(int source_index) const {
    if (source_index < 1 || source_index > source_count_) {
      throw domain_error("source index " + std::to_string(source_index) +
                         " outside [1, " + std::to_string(source_count_) + "]");
    }
  }

  int source_count_;
  int step_count_;
  BoundaryMode mode_;
  std::vector<std::uint8_t> reach_;
};

/// True iff delays strictly increase with source index. When it holds, every
/// register and tree switch changes state at most once per cycle, and always
/// in the same direction.
inline bool verify_monotone_assignment(
    std::span<const DelayAssignment> assignments) {
  std::vector<DelayAssignment> sorted(assignments.begin(), assignments.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) {
              return a.source_index < b.source_index;
            });
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    if (sorted[k].source_index == sorted[k - 1].source_index) {
      throw domain_error("duplicate source index " +
                         std::to_string(sorted[k].source_index) +
                         " in assignment");
    }
    if (sorted[k].delay <= sorted[k - 1].delay) return false;
  }
  return true;
}

}  // namespace spdcmux
