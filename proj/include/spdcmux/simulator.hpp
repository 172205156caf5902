#pragma once

// Monte Carlo engine over pump cycles.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "spdcmux/emission.hpp"
#include "spdcmux/errors.hpp"
#include "spdcmux/rng.hpp"
#include "spdcmux/scheduler.hpp"
#include "spdcmux/topology.hpp"

namespace spdcmux {

enum class FeedbackMode { off, boost, turbo_boost };

struct FeedbackPolicy {
  FeedbackMode mode = FeedbackMode::off;
  double strength = 0.0;  // beta

  bool operator==(const FeedbackPolicy&) const = default;
};

struct SimConfig {
  int source_count = 0;
  int step_count = 3;
  int multiple = 0;
  double mean_pairs = 0.0;
  std::uint64_t cycles = 100000;
  std::uint64_t seed = 1;
  FeedbackPolicy feedback;
  BoundaryMode boundary = BoundaryMode::constrained;

  bool operator==(const SimConfig&) const = default;

  int capacity() const { return storage_capacity(step_count, multiple); }

  void validate() const {
    if (source_count < 1) throw domain_error("sources must be at least 1");
    storage_capacity(step_count, multiple);
    detail::require_positive_mean(mean_pairs);
    if (!(feedback.strength >= 0.0) || !std::isfinite(feedback.strength)) {
      throw domain_error("feedback strength must be a finite value >= 0");
    }
  }
};

/// Pump-power adjustment for the next cycle given the current storage level.
///   off:         N
///   boost:       N (1 + beta) while storage is not full
///   turbo_boost: N (1 + beta (C - level) / C)
/// With no storage (C = 0) every mode returns N.
inline double apply_feedback(const FeedbackPolicy& policy, int storage_level,
                             int capacity, double base_mean) {
  if (storage_level < 0 || storage_level > capacity) {
    throw domain_error("storage level outside [0, capacity]");
  }
  if (capacity == 0) return base_mean;
  switch (policy.mode) {
    case FeedbackMode::off:
      return base_mean;
    case FeedbackMode::boost:
      return storage_level < capacity ? base_mean * (1.0 + policy.strength)
                                      : base_mean;
    case FeedbackMode::turbo_boost:
      return base_mean *
             (1.0 + policy.strength * (capacity - storage_level) / capacity);
  }
  return base_mean;
}

struct SimMetrics {
  std::uint64_t cycles = 0;
  std::uint64_t total_slots = 0;
  std::uint64_t lack_count = 0;
  std::uint64_t multi_count = 0;
  std::uint64_t filled_count = 0;
  std::uint64_t discarded_count = 0;
  std::uint64_t herald_count = 0;
  std::uint64_t final_storage = 0;
  std::uint64_t conservation_violations = 0;
  double storage_level_sum = 0.0;  // of end-of-cycle levels

  bool operator==(const SimMetrics&) const = default;

  // Rates are undefined (nullopt) for an empty run.
  std::optional<double> lack_rate() const { return ratio(lack_count, total_slots); }
  std::optional<double> multi_rate() const { return ratio(multi_count, total_slots); }
  std::optional<double> relative_multi_rate() const {
    return ratio(multi_count, filled_count);
  }
  std::optional<double> mean_storage_level() const {
    if (cycles == 0) return std::nullopt;
    return storage_level_sum / static_cast<double>(cycles);
  }

  void record(const CyclePlan& plan) {
    ++cycles;
    total_slots += plan.slot_fill.size();
    lack_count += static_cast<std::uint64_t>(plan.lack_count);
    multi_count += static_cast<std::uint64_t>(plan.multi_count);
    filled_count += static_cast<std::uint64_t>(plan.filled_count());
    discarded_count += static_cast<std::uint64_t>(plan.discarded);
    herald_count += static_cast<std::uint64_t>(plan.heralds_in);
    final_storage = static_cast<std::uint64_t>(plan.storage_out.level());
    storage_level_sum += plan.storage_out.level();
    if (!plan.conserves()) ++conservation_violations;
  }

 private:
  static std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  }
};

struct CycleOutcome {
  StorageState storage;
  CyclePlan plan;
};

/// One configured structure. Owns the register topology so that repeated
/// cycles do not rebuild the reachability table.
class Simulator {
 public:
  explicit Simulator(SimConfig config)
      : config_((config.validate(), std::move(config))),
        topology_(config_.source_count, config_.step_count, config_.boundary) {}

  const SimConfig& config() const noexcept { return config_; }
  const RegisterTopology& topology() const noexcept { return topology_; }

  /// Sample, herald and plan one pump cycle at the given mean pair number.
  CycleOutcome run_cycle(const StorageState& state, double effective_mean,
                         Engine& rng, std::uint64_t cycle_index = 0) const {
    const EmissionBatch batch = sample_cycle_emissions(
        config_.source_count, effective_mean, rng, cycle_index);
    CyclePlan plan =
        plan_cycle(topology_, herald(batch), state, config_.multiple);
    StorageState next = plan.storage_out;
    return {std::move(next), std::move(plan)};
  }

  /// Full run from empty storage. on_cycle(index, effective_mean, plan) is
  /// called after every cycle.
  template <class Observer>
  SimMetrics run(Observer&& on_cycle) const {
    Engine rng(config_.seed);
    StorageState state{{}, config_.capacity()};
    SimMetrics metrics;
    for (std::uint64_t c = 0; c < config_.cycles; ++c) {
      const double mean = apply_feedback(config_.feedback, state.level(),
                                         state.capacity, config_.mean_pairs);
      CycleOutcome outcome = run_cycle(state, mean, rng, c);
      metrics.record(outcome.plan);
      on_cycle(c, mean, std::as_const(outcome.plan));
      state = std::move(outcome.storage);
    }
    return metrics;
  }

  SimMetrics run() const {
    return run([](std::uint64_t, double, const CyclePlan&) {});
  }

 private:
  SimConfig config_;
  RegisterTopology topology_;
};

/// Free-function form of Simulator::run_cycle.
inline CycleOutcome run_cycle(const StorageState& state, const SimConfig& config,
                              double effective_mean, Engine& rng) {
  return Simulator(config).run_cycle(state, effective_mean, rng);
}

inline SimMetrics run_simulation(const SimConfig& config) {
  return Simulator(config).run();
}

template <class Observer>
SimMetrics run_simulation(const SimConfig& config, Observer&& on_cycle) {
  return Simulator(config).run(std::forward<Observer>(on_cycle));
}

}  // namespace spdcmux
