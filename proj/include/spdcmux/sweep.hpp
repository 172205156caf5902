#pragma once

// Parameter sweeps over pump power, frequency multiple or array size.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "spdcmux/config.hpp"
#include "spdcmux/csv.hpp"
#include "spdcmux/oracle.hpp"
#include "spdcmux/rng.hpp"
#include "spdcmux/simulator.hpp"

namespace spdcmux {

enum class SweepParameter { power, multiple, size };
enum class EngineSelection { monte_carlo, oracle, both };

inline SweepParameter parse_sweep_parameter(std::string_view text) {
  if (text == "power") return SweepParameter::power;
  if (text == "multiple") return SweepParameter::multiple;
  if (text == "size") return SweepParameter::size;
  throw config_error("unknown sweep parameter '" + std::string(text) + "'");
}

inline EngineSelection parse_engine_selection(std::string_view text) {
  if (text == "monte_carlo" || text == "mc") return EngineSelection::monte_carlo;
  if (text == "oracle") return EngineSelection::oracle;
  if (text == "both") return EngineSelection::both;
  throw config_error("unknown engine '" + std::string(text) + "'");
}

struct SweepSpec {
  SweepParameter parameter = SweepParameter::power;
  std::vector<double> grid;
  SimConfig base;
  EngineSelection engine = EngineSelection::monte_carlo;
};

/// `steps` evenly spaced values from `from` to `to`, both ends included.
inline std::vector<double> linear_grid(double from, double to, int steps) {
  if (steps < 1) throw config_error("grid needs at least one step");
  if (steps == 1) return {from};
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    grid.push_back(from + (to - from) * k / (steps - 1));
  }
  grid.back() = to;
  return grid;
}

/// Base configuration with the swept parameter set to `value`. Integer
/// parameters must be given as whole numbers.
inline SimConfig apply_parameter(const SimConfig& base, SweepParameter parameter,
                                 double value) {
  SimConfig out = base;
  auto as_int = [&](std::string_view name) {
    if (!std::isfinite(value) || value != std::round(value)) {
      throw config_error(std::string(name) + " sweep needs integer grid values");
    }
    return static_cast<int>(value);
  };
  switch (parameter) {
    case SweepParameter::power: out.mean_pairs = value; break;
    case SweepParameter::multiple: out.multiple = as_int("multiple"); break;
    case SweepParameter::size: out.source_count = as_int("size"); break;
  }
  try {
    out.validate();
  } catch (const domain_error& e) {
    throw config_error(e.what());
  }
  return out;
}

/// Rows in grid order; within a point the Monte Carlo row precedes the
/// oracle row. Point k uses derive_seed(base.seed, k), so output does not
/// depend on `jobs`.
inline std::vector<MetricRow> run_sweep(const SweepSpec& spec, unsigned jobs = 1) {
  std::vector<SimConfig> points;
  points.reserve(spec.grid.size());
  for (std::size_t k = 0; k < spec.grid.size(); ++k) {
    SimConfig point = apply_parameter(spec.base, spec.parameter, spec.grid[k]);
    point.seed = derive_seed(spec.base.seed, k);
    points.push_back(point);
  }

  const bool with_mc = spec.engine != EngineSelection::oracle;
  const bool with_oracle = spec.engine != EngineSelection::monte_carlo;
  const std::size_t per_point = (with_mc ? 1 : 0) + (with_oracle ? 1 : 0);
  std::vector<MetricRow> rows(points.size() * per_point);

  auto evaluate = [&](std::size_t k) {
    const SimConfig& cfg = points[k];
    std::size_t slot = k * per_point;
    if (with_mc) rows[slot++] = make_row(spec.grid[k], run_simulation(cfg), cfg.seed);
    if (with_oracle) {
      const auto rates = stationary_rates(cfg.source_count, cfg.step_count,
                                          cfg.multiple, cfg.mean_pairs);
      rows[slot] = make_row(spec.grid[k], rates, cfg.multiple, cfg.cycles, cfg.seed);
    }
  };

  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(points.size())));
  if (jobs <= 1) {
    for (std::size_t k = 0; k < points.size(); ++k) evaluate(k);
    return rows;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t k = next++; k < points.size(); k = next++) {
        try {
          evaluate(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

}  // namespace spdcmux
