#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <fmt/format.h>

#include "spdcmux/oracle.hpp"
#include "spdcmux/simulator.hpp"

namespace spdcmux {

inline constexpr std::string_view kCsvHeader =
    "param,lack_rate,multi_rate,relative_multi_rate,filled,discarded,"
    "mean_storage,engine,seed,cycles";

enum class EngineKind { monte_carlo, oracle };

inline std::string_view to_string(EngineKind engine) {
  return engine == EngineKind::monte_carlo ? "monte_carlo" : "oracle";
}

/// One output line. Oracle rows carry expected counts over `cycles`.
struct MetricRow {
  double param = 0.0;
  std::optional<double> lack_rate;
  std::optional<double> multi_rate;
  std::optional<double> relative_multi_rate;
  double filled = 0.0;
  double discarded = 0.0;
  std::optional<double> mean_storage;
  EngineKind engine = EngineKind::monte_carlo;
  std::uint64_t seed = 0;
  std::uint64_t cycles = 0;
};

inline MetricRow make_row(double param, const SimMetrics& metrics,
                          std::uint64_t seed) {
  return {param,
          metrics.lack_rate(),
          metrics.multi_rate(),
          metrics.relative_multi_rate(),
          static_cast<double>(metrics.filled_count),
          static_cast<double>(metrics.discarded_count),
          metrics.mean_storage_level(),
          EngineKind::monte_carlo,
          seed,
          metrics.cycles};
}

inline MetricRow make_row(double param, const StationaryResult& rates,
                          int multiple, std::uint64_t cycles,
                          std::uint64_t seed) {
  const double n = static_cast<double>(cycles);
  return {param,
          rates.lack_rate,
          rates.multi_rate,
          rates.relative_multi_rate,
          n * multiple * (1.0 - rates.lack_rate),
          n * rates.discarded_per_cycle,
          rates.mean_storage,
          EngineKind::oracle,
          seed,
          cycles};
}

namespace detail {

inline std::string sig6(double v) { return fmt::format("{:.6g}", v); }

inline std::string sig6(const std::optional<double>& v) {
  return v ? sig6(*v) : std::string("NA");
}

}  // namespace detail

inline std::string emit_csv(std::span<const MetricRow> rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", detail::sig6(r.param),
                       detail::sig6(r.lack_rate), detail::sig6(r.multi_rate),
                       detail::sig6(r.relative_multi_rate),
                       detail::sig6(r.filled), detail::sig6(r.discarded),
                       detail::sig6(r.mean_storage), to_string(r.engine),
                       r.seed, r.cycles);
  }
  return out;
}

/// Gnuplot-ready blocks: one "param value" series per error rate and engine,
/// separated by two blank lines so `index` can select them.
inline std::string emit_gnuplot(std::span<const MetricRow> rows) {
  std::string out;
  for (EngineKind engine : {EngineKind::monte_carlo, EngineKind::oracle}) {
    for (int series = 0; series < 2; ++series) {
      std::string block;
      for (const auto& r : rows) {
        if (r.engine != engine) continue;
        const auto& v = series == 0 ? r.lack_rate : r.multi_rate;
        block += fmt::format("{} {}\n", detail::sig6(r.param), detail::sig6(v));
      }
      if (block.empty()) continue;
      out += fmt::format("# {} {}\n", series == 0 ? "lack_rate" : "multi_rate",
                         to_string(engine));
      out += block;
      out += "\n\n";
    }
  }
  return out;
}

}  // namespace spdcmux
