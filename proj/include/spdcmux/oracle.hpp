#pragma once

// Exact case analysis: the storage level evolves as a finite Markov chain.
//
// From level s with h heralds, available = s + h photons, filled = min(m,
// available), next level = min(C, available - filled), the rest is discarded.
// Boundary limits of the register are ignored (every source reaches every
// delay), which is what the unconstrained simulator mode reproduces.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "spdcmux/emission.hpp"
#include "spdcmux/errors.hpp"
#include "spdcmux/topology.hpp"

namespace spdcmux {

/// Binomial(S, p) law of the number of heralded sources in one cycle.
inline std::vector<double> herald_count_distribution(int source_count,
                                                     double p_herald) {
  if (source_count < 1) throw domain_error("source count must be at least 1");
  if (!(p_herald > 0.0 && p_herald < 1.0)) {
    throw domain_error("herald probability must lie in (0, 1)");
  }
  const double n = source_count;
  const double log_p = std::log(p_herald);
  const double log_q = std::log1p(-p_herald);
  std::vector<double> out(static_cast<std::size_t>(source_count) + 1);
  for (int h = 0; h <= source_count; ++h) {
    const double log_choose =
        std::lgamma(n + 1.0) - std::lgamma(h + 1.0) - std::lgamma(n - h + 1.0);
    out[static_cast<std::size_t>(h)] =
        std::exp(log_choose + h * log_p + (n - h) * log_q);
  }
  return out;
}

struct ChainSpec {
  int source_count = 0;
  int multiple = 0;
  int capacity = 0;
  double p_herald = 0.0;
  double p_multi = 0.0;

  static ChainSpec from_mean(int source_count, int step_count, int multiple,
                             double mean_pairs) {
    const auto probs = herald_probabilities(mean_pairs);
    return {source_count, multiple, storage_capacity(step_count, multiple),
            probs.herald, probs.multi};
  }
};

using Matrix = std::vector<std::vector<double>>;

namespace detail {

inline void check_chain(const ChainSpec& spec) {
  if (spec.source_count < 1) throw domain_error("source count must be >= 1");
  if (spec.multiple < 1) throw domain_error("multiple must be >= 1");
  if (spec.capacity < 0) throw domain_error("capacity must be >= 0");
  if (!(spec.p_multi > 0.0 && spec.p_multi < spec.p_herald &&
        spec.p_herald < 1.0)) {
    throw domain_error("need 0 < p_multi < p_herald < 1");
  }
}

// Expected (lack, discard) per cycle when starting at each level.
struct LevelCosts {
  std::vector<double> lack;
  std::vector<double> discard;
};

inline LevelCosts level_costs(const ChainSpec& spec,
                              const std::vector<double>& heralds) {
  const auto levels = static_cast<std::size_t>(spec.capacity) + 1;
  LevelCosts costs{std::vector<double>(levels, 0.0),
                   std::vector<double>(levels, 0.0)};
  for (int s = 0; s <= spec.capacity; ++s) {
    for (int h = 0; h <= spec.source_count; ++h) {
      const double p = heralds[static_cast<std::size_t>(h)];
      const int available = s + h;
      const int filled = std::min(spec.multiple, available);
      const int next = std::min(spec.capacity, available - filled);
      costs.lack[static_cast<std::size_t>(s)] += p * (spec.multiple - filled);
      costs.discard[static_cast<std::size_t>(s)] +=
          p * (available - filled - next);
    }
  }
  return costs;
}

}  // namespace detail

/// Row-stochastic transition matrix over storage levels 0..C.
inline Matrix transition_matrix(const ChainSpec& spec) {
  detail::check_chain(spec);
  const auto heralds =
      herald_count_distribution(spec.source_count, spec.p_herald);
  const auto levels = static_cast<std::size_t>(spec.capacity) + 1;
  Matrix P(levels, std::vector<double>(levels, 0.0));
  for (int s = 0; s <= spec.capacity; ++s) {
    for (int h = 0; h <= spec.source_count; ++h) {
      const int available = s + h;
      const int next =
          std::min(spec.capacity, available - std::min(spec.multiple, available));
      P[static_cast<std::size_t>(s)][static_cast<std::size_t>(next)] +=
          heralds[static_cast<std::size_t>(h)];
    }
  }
  return P;
}

struct StationaryResult {
  double lack_rate = 0.0;
  double multi_rate = 0.0;
  double relative_multi_rate = 0.0;
  double mean_storage = 0.0;
  double discarded_per_cycle = 0.0;
  std::vector<double> distribution;
  int iterations = 0;
};

/// Stationary distribution by power iteration (pi <- pi P) from the uniform
/// vector, stopping when the largest component change drops below tolerance.
///
/// Scheduling never sees multiplicity, so emitted photons are an unbiased
/// sample of heralded ones: multi_rate = (p_multi / p_herald)(1 - lack_rate).
inline StationaryResult stationary_rates(const ChainSpec& spec,
                                         double tolerance = 1e-12,
                                         int max_iterations = 1'000'000) {
  const Matrix P = transition_matrix(spec);
  const auto heralds =
      herald_count_distribution(spec.source_count, spec.p_herald);
  const auto levels = P.size();

  std::vector<double> pi(levels, 1.0 / static_cast<double>(levels));
  std::vector<double> next(levels);
  StationaryResult out;
  bool converged = false;
  for (int it = 1; it <= max_iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < levels; ++i) {
      for (std::size_t j = 0; j < levels; ++j) next[j] += pi[i] * P[i][j];
    }
    double total = 0.0;
    for (double v : next) total += v;
    double change = 0.0;
    for (std::size_t j = 0; j < levels; ++j) {
      next[j] /= total;
      change = std::max(change, std::abs(next[j] - pi[j]));
    }
    pi.swap(next);
    if (change < tolerance) {
      out.iterations = it;
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw convergence_error("stationary distribution did not converge in " +
                            std::to_string(max_iterations) + " iterations");
  }

  const auto costs = detail::level_costs(spec, heralds);
  double lack = 0.0;
  double discard = 0.0;
  double storage = 0.0;
  for (std::size_t s = 0; s < levels; ++s) {
    lack += pi[s] * costs.lack[s];
    discard += pi[s] * costs.discard[s];
    storage += pi[s] * static_cast<double>(s);
  }
  out.lack_rate = lack / spec.multiple;
  out.relative_multi_rate = spec.p_multi / spec.p_herald;
  out.multi_rate = out.relative_multi_rate * (1.0 - out.lack_rate);
  out.mean_storage = storage;
  out.discarded_per_cycle = discard;
  out.distribution = std::move(pi);
  return out;
}

inline StationaryResult stationary_rates(int source_count, int step_count,
                                         int multiple, double mean_pairs) {
  return stationary_rates(
      ChainSpec::from_mean(source_count, step_count, multiple, mean_pairs));
}

/// Bisection for a sign change of f on [lo, hi]. Returns as soon as
/// |f(x)| < tolerance; the bracket must have opposite signs at its ends.
template <class Function>
double bisect(Function f, double lo, double hi, double tolerance) {
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (std::abs(f_lo) < tolerance) return lo;
  if (std::abs(f_hi) < tolerance) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw search_error("no sign change on [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
  }
  for (;;) {
    const double mid = lo + (hi - lo) / 2.0;
    // Interval has shrunk to one ulp.
    if (mid == lo || mid == hi) {
      throw search_error("bracket collapsed before |f| < tolerance");
    }
    const double f_mid = f(mid);
    if (std::abs(f_mid) < tolerance) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
}

inline constexpr double kPowerSearchLow = 1e-6;
inline constexpr double kPowerSearchHigh = 1.0;
inline constexpr double kPowerSearchLimit = 16.0;

/// Mean pair number at which the exact lack and multi-photon rates coincide.
///
/// Searches (1e-6, 1] first. Tiny arrays (a single source, say) only cross
/// above N = 1, so the upper end doubles up to 16 before giving up.
inline double optimized_power(int source_count, int multiple, int step_count,
                              double tolerance) {
  if (!(tolerance > 0.0)) throw domain_error("tolerance must be positive");
  auto gap = [&](double mean) {
    const auto r = stationary_rates(source_count, step_count, multiple, mean);
    return r.lack_rate - r.multi_rate;
  };
  double lo = kPowerSearchLow;
  double hi = kPowerSearchHigh;
  const bool lo_positive = gap(lo) > 0.0;
  while ((gap(hi) > 0.0) == lo_positive) {
    if (hi >= kPowerSearchLimit) {
      throw search_error("lack and multi-photon rates never cross on [" +
                         std::to_string(kPowerSearchLow) + ", " +
                         std::to_string(kPowerSearchLimit) + "]");
    }
    lo = hi;
    hi *= 2.0;
  }
  return bisect(gap, lo, hi, tolerance);
}

}  // namespace spdcmux
