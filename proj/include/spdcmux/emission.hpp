#pragma once

// Pair-generation statistics of a pulsed downconverter array and the
// non-number-resolving heralding contract.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "spdcmux/errors.hpp"
#include "spdcmux/rng.hpp"

namespace spdcmux {

namespace detail {

inline void require_positive_mean(double mean_pairs) {
  if (!(mean_pairs > 0.0) || !std::isfinite(mean_pairs)) {
    throw domain_error("mean pair number must be positive and finite, got " +
                       std::to_string(mean_pairs));
  }
}

}  // namespace detail

/// Pair counts drawn for one pump pulse. Entry 0 is the top downconverter.
struct EmissionBatch {
  std::uint64_t cycle_index = 0;
  std::vector<int> pair_counts;
};

/// What the control logic can see (heralded) next to what the error
/// accounting needs (multiplicity). Scheduling must only read `heralded`.
struct HeraldReport {
  std::vector<bool> heralded;
  std::vector<int> multiplicity;

  std::size_t source_count() const noexcept { return heralded.size(); }

  std::size_t herald_count() const noexcept {
    std::size_t n = 0;
    for (bool h : heralded) n += h ? 1 : 0;
    return n;
  }
};

/// Poisson probability of exactly n pairs at mean N: N^n e^-N / n!.
inline double pair_pmf(int n, double mean_pairs) {
  detail::require_positive_mean(mean_pairs);
  if (n < 0) throw domain_error("pair count must be non-negative");
  if (n > 100) {
    return std::exp(n * std::log(mean_pairs) - mean_pairs -
                    std::lgamma(static_cast<double>(n) + 1.0));
  }
  double p = std::exp(-mean_pairs);
  for (int k = 1; k <= n; ++k) p *= mean_pairs / k;
  return p;
}

struct HeraldProbabilities {
  double herald = 0.0;  // P(n >= 1)
  double multi = 0.0;   // P(n >= 2)
};

inline HeraldProbabilities herald_probabilities(double mean_pairs) {
  detail::require_positive_mean(mean_pairs);
  HeraldProbabilities out;
  out.herald = -std::expm1(-mean_pairs);
  if (mean_pairs < 0.5) {
    // Tail series; avoids the cancellation in 1 - P0 - P1 at small N.
    double term = mean_pairs * mean_pairs / 2.0;
    double sum = 0.0;
    for (int n = 2; term > sum * 1e-18 && n < 60; ++n) {
      sum += term;
      term *= mean_pairs / (n + 1);
    }
    out.multi = sum * std::exp(-mean_pairs);
  } else {
    out.multi = out.herald - mean_pairs * std::exp(-mean_pairs);
  }
  return out;
}

/// One Poisson draw by inversion with sequential search. Consumes exactly one
/// uniform from the stream.
inline int sample_pairs(double mean_pairs, Engine& rng) {
  detail::require_positive_mean(mean_pairs);
  const double u = uniform01(rng);
  double p = std::exp(-mean_pairs);
  double cdf = p;
  int n = 0;
  while (u >= cdf && p > 0.0) {
    ++n;
    p *= mean_pairs / n;
    cdf += p;
  }
  return n;
}

/// Independent draws for every source, in array order.
inline EmissionBatch sample_cycle_emissions(int source_count, double mean_pairs,
                                            Engine& rng,
                                            std::uint64_t cycle_index = 0) {
  if (source_count < 1) throw domain_error("source count must be at least 1");
  detail::require_positive_mean(mean_pairs);
  EmissionBatch batch;
  batch.cycle_index = cycle_index;
  batch.pair_counts.resize(static_cast<std::size_t>(source_count));
  for (int& count : batch.pair_counts) count = sample_pairs(mean_pairs, rng);
  return batch;
}

inline HeraldReport herald(const EmissionBatch& batch) {
  HeraldReport report;
  report.heralded.reserve(batch.pair_counts.size());
  report.multiplicity.reserve(batch.pair_counts.size());
  for (int count : batch.pair_counts) {
    if (count < 0) throw domain_error("negative pair count in batch");
    report.heralded.push_back(count >= 1);
    report.multiplicity.push_back(count);
  }
  return report;
}

}  // namespace spdcmux
