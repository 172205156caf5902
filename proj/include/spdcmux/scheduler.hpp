#pragma once

// Per-pump-cycle slot assignment: stored photons first, then fresh heralds
// driven fast-to-slow, top-to-down; surplus goes to storage or out of the tree.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "spdcmux/emission.hpp"
#include "spdcmux/errors.hpp"
#include "spdcmux/topology.hpp"

namespace spdcmux {

enum class PhotonOrigin { fresh, stored };

struct Photon {
  PhotonOrigin origin = PhotonOrigin::fresh;
  int source_index = 0;  // 1-based array position it was emitted from
  int multiplicity = 1;  // true pair count, never read by scheduling
  int delay = 0;         // units of T, relative to the current pump pulse
};

/// Photons parked in the longest delay lines for the next pump cycle, in
/// emission order. Capacity is 2^K - m.
struct StorageState {
  std::vector<Photon> stored;
  int capacity = 0;

  int level() const noexcept { return static_cast<int>(stored.size()); }
};

struct CyclePlan {
  std::vector<std::optional<Photon>> slot_fill;  // length m
  StorageState storage_out;
  int discarded = 0;
  int lack_count = 0;
  int multi_count = 0;
  int heralds_in = 0;
  int stored_in = 0;

  int filled_count() const noexcept {
    return static_cast<int>(slot_fill.size()) - lack_count;
  }

  /// heralds + stored_in == filled + stored_out + discarded
  bool conserves() const noexcept {
    return heralds_in + stored_in ==
           filled_count() + storage_out.level() + discarded;
  }

  /// Delays given to photons emitted this cycle, both train slots and
  /// storage lines. Carried-over photons are excluded.
  std::vector<DelayAssignment> fresh_assignments() const {
    std::vector<DelayAssignment> out;
    for (const auto& slot : slot_fill) {
      if (slot && slot->origin == PhotonOrigin::fresh) {
        out.push_back({slot->source_index, slot->delay});
      }
    }
    for (const auto& p : storage_out.stored) {
      if (p.origin == PhotonOrigin::fresh) {
        out.push_back({p.source_index, p.delay});
      }
    }
    return out;
  }
};

namespace detail {

inline void check_plan_inputs(const RegisterTopology& topology,
                              const HeraldReport& report,
                              const StorageState& storage_in, int multiple) {
  const int capacity = storage_capacity(topology.step_count(), multiple);
  if (static_cast<int>(report.source_count()) != topology.source_count()) {
    throw domain_error("herald report covers " +
                       std::to_string(report.source_count()) +
                       " sources, topology has " +
                       std::to_string(topology.source_count()));
  }
  if (report.multiplicity.size() != report.heralded.size()) {
    throw domain_error("herald report is ragged");
  }
  if (storage_in.level() > capacity) {
    throw domain_error("storage holds " + std::to_string(storage_in.level()) +
                       " photons, capacity is " + std::to_string(capacity));
  }
  for (const auto& p : storage_in.stored) {
    if (p.multiplicity < 1) {
      throw domain_error("stored photon with multiplicity below 1");
    }
  }
}

inline std::vector<int> heralded_sources(const HeraldReport& report) {
  std::vector<int> out;
  for (std::size_t i = 0; i < report.heralded.size(); ++i) {
    if (report.heralded[i]) out.push_back(static_cast<int>(i) + 1);
  }
  return out;
}

// Releases stored photons into the leading slots; those beyond the train stay
// in storage ahead of any fresh photon.
inline CyclePlan start_plan(const StorageState& storage_in,
                            const HeraldReport& report, int multiple,
                            int capacity) {
  CyclePlan plan;
  plan.slot_fill.assign(static_cast<std::size_t>(multiple), std::nullopt);
  plan.storage_out.capacity = capacity;
  plan.stored_in = storage_in.level();
  plan.heralds_in = static_cast<int>(report.herald_count());
  for (int k = 0; k < storage_in.level(); ++k) {
    Photon p = storage_in.stored[static_cast<std::size_t>(k)];
    p.origin = PhotonOrigin::stored;
    if (k < multiple) {
      p.delay = k;
      plan.slot_fill[static_cast<std::size_t>(k)] = p;
    } else {
      p.delay = multiple + plan.storage_out.level();
      plan.storage_out.stored.push_back(p);
    }
  }
  return plan;
}

inline Photon fresh_photon(const HeraldReport& report, int source_index,
                           int delay) {
  return Photon{PhotonOrigin::fresh, source_index,
                report.multiplicity[static_cast<std::size_t>(source_index - 1)],
                delay};
}

inline void finish_plan(CyclePlan& plan) {
  plan.lack_count = 0;
  plan.multi_count = 0;
  for (const auto& slot : plan.slot_fill) {
    if (!slot) {
      ++plan.lack_count;
    } else if (slot->multiplicity >= 2) {
      ++plan.multi_count;
    }
  }
  plan.discarded = plan.heralds_in + plan.stored_in - plan.filled_count() -
                   plan.storage_out.level();
}

}  // namespace detail

/// Greedy fast-to-slow, top-to-down planner.
///
/// Slots are filled in increasing order; for each slot the heralded sources
/// are scanned downward from just below the last source used, and the first
/// one that can reach the slot's delay takes it. Storage positions (delays
/// m, m+1, ...) continue the same scan. The scan never moves back up, so the
/// fresh photons' delays strictly increase down the array. Heralded sources
/// passed over are routed out of the tree.
inline CyclePlan plan_cycle(const RegisterTopology& topology,
                            const HeraldReport& report,
                            const StorageState& storage_in, int multiple) {
  detail::check_plan_inputs(topology, report, storage_in, multiple);
  const int capacity = storage_capacity(topology.step_count(), multiple);
  CyclePlan plan = detail::start_plan(storage_in, report, multiple, capacity);

  const std::vector<int> candidates = detail::heralded_sources(report);
  std::size_t cursor = 0;
  auto take = [&](int delay) -> std::optional<int> {
    for (std::size_t k = cursor; k < candidates.size(); ++k) {
      if (topology.can_reach(candidates[k], delay)) {
        cursor = k + 1;
        return candidates[k];
      }
    }
    return std::nullopt;
  };

  for (int slot = std::min(storage_in.level(), multiple); slot < multiple;
       ++slot) {
    if (auto source = take(slot)) {
      plan.slot_fill[static_cast<std::size_t>(slot)] =
          detail::fresh_photon(report, *source, slot);
    }
  }
  while (plan.storage_out.level() < capacity && cursor < candidates.size()) {
    const int delay = multiple + plan.storage_out.level();
    auto source = take(delay);
    if (!source) break;
    plan.storage_out.stored.push_back(
        detail::fresh_photon(report, *source, delay));
  }

  detail::finish_plan(plan);
  return plan;
}

inline constexpr int kOptimalMaxSources = 20;
inline constexpr int kOptimalMaxMultiple = 8;

/// Maximum-fill planner via bipartite matching (heralded sources vs. free
/// slots). Test oracle for plan_cycle; ignores switching order.
inline CyclePlan plan_cycle_optimal(const RegisterTopology& topology,
                                    const HeraldReport& report,
                                    const StorageState& storage_in,
                                    int multiple) {
  if (topology.source_count() > kOptimalMaxSources ||
      multiple > kOptimalMaxMultiple) {
    throw refusal_error("exact planner is limited to " +
                        std::to_string(kOptimalMaxSources) + " sources and " +
                        std::to_string(kOptimalMaxMultiple) + " slots");
  }
  detail::check_plan_inputs(topology, report, storage_in, multiple);
  const int capacity = storage_capacity(topology.step_count(), multiple);
  CyclePlan plan = detail::start_plan(storage_in, report, multiple, capacity);

  const std::vector<int> candidates = detail::heralded_sources(report);
  const int first_free = std::min(storage_in.level(), multiple);
  std::vector<int> slot_owner(static_cast<std::size_t>(multiple), -1);

  // Kuhn's augmenting paths; candidate k matched to slot via slot_owner.
  auto augment = [&](auto& self, std::size_t k,
                     std::vector<bool>& visited) -> bool {
    for (int slot = first_free; slot < multiple; ++slot) {
      const auto s = static_cast<std::size_t>(slot);
      if (visited[s] || !topology.can_reach(candidates[k], slot)) continue;
      visited[s] = true;
      if (slot_owner[s] < 0 ||
          self(self, static_cast<std::size_t>(slot_owner[s]), visited)) {
        slot_owner[s] = static_cast<int>(k);
        return true;
      }
    }
    return false;
  };
  std::vector<bool> used(candidates.size(), false);
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    std::vector<bool> visited(static_cast<std::size_t>(multiple), false);
    augment(augment, k, visited);
  }
  for (int slot = first_free; slot < multiple; ++slot) {
    const int owner = slot_owner[static_cast<std::size_t>(slot)];
    if (owner < 0) continue;
    used[static_cast<std::size_t>(owner)] = true;
    plan.slot_fill[static_cast<std::size_t>(slot)] = detail::fresh_photon(
        report, candidates[static_cast<std::size_t>(owner)], slot);
  }

  while (plan.storage_out.level() < capacity) {
    const int delay = multiple + plan.storage_out.level();
    bool stored = false;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      if (used[k] || !topology.can_reach(candidates[k], delay)) continue;
      used[k] = true;
      plan.storage_out.stored.push_back(
          detail::fresh_photon(report, candidates[k], delay));
      stored = true;
      break;
    }
    if (!stored) break;
  }

  detail::finish_plan(plan);
  return plan;
}

}  // namespace spdcmux
