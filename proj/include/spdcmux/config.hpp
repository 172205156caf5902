#pragma once

// Plain key=value configuration documents.
//
//   sources=100 steps=3 multiple=4 mean_pairs=0.049
//   cycles=100000 seed=1 feedback=off feedback_strength=0 boundary=constrained
//
// Pairs are separated by whitespace or newlines; '#' starts a comment.
// sources, multiple and mean_pairs are mandatory; every other key has the
// default shown above.

#include <charconv>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <system_error>

#include <fmt/format.h>

#include "spdcmux/errors.hpp"
#include "spdcmux/simulator.hpp"

namespace spdcmux {

inline std::string_view to_string(FeedbackMode mode) {
  switch (mode) {
    case FeedbackMode::off: return "off";
    case FeedbackMode::boost: return "boost";
    case FeedbackMode::turbo_boost: return "turbo_boost";
  }
  return "off";
}

inline std::string_view to_string(BoundaryMode mode) {
  return mode == BoundaryMode::constrained ? "constrained" : "unconstrained";
}

inline FeedbackMode parse_feedback_mode(std::string_view text) {
  if (text == "off") return FeedbackMode::off;
  if (text == "boost") return FeedbackMode::boost;
  if (text == "turbo_boost" || text == "turbo-boost") {
    return FeedbackMode::turbo_boost;
  }
  throw config_error("unknown feedback mode '" + std::string(text) + "'");
}

inline BoundaryMode parse_boundary_mode(std::string_view text) {
  if (text == "constrained") return BoundaryMode::constrained;
  if (text == "unconstrained") return BoundaryMode::unconstrained;
  throw config_error("unknown boundary mode '" + std::string(text) + "'");
}

namespace detail {

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw config_error("invalid value '" + std::string(text) + "' for key '" +
                       std::string(key) + "'");
  }
  return value;
}

}  // namespace detail

inline SimConfig parse_config(std::string_view text) {
  SimConfig config;
  std::set<std::string, std::less<>> seen;

  std::size_t pos = 0;
  while (pos < text.size()) {
    const char c = text[pos];
    if (c == '#') {
      while (pos < text.size() && text[pos] != '\n') ++pos;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++pos;
      continue;
    }
    std::size_t end = pos;
    while (end < text.size() && text[end] != ' ' && text[end] != '\t' &&
           text[end] != '\n' && text[end] != '\r' && text[end] != '#') {
      ++end;
    }
    const std::string_view token = text.substr(pos, end - pos);
    pos = end;

    const auto eq = token.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw config_error("expected key=value, got '" + std::string(token) + "'");
    }
    const std::string_view key = token.substr(0, eq);
    const std::string_view value = token.substr(eq + 1);
    if (!seen.emplace(key).second) {
      throw config_error("duplicate key '" + std::string(key) + "'");
    }

    if (key == "sources") {
      config.source_count = detail::parse_number<int>(key, value);
    } else if (key == "steps") {
      config.step_count = detail::parse_number<int>(key, value);
    } else if (key == "multiple") {
      config.multiple = detail::parse_number<int>(key, value);
    } else if (key == "mean_pairs") {
      config.mean_pairs = detail::parse_number<double>(key, value);
    } else if (key == "cycles") {
      config.cycles = detail::parse_number<std::uint64_t>(key, value);
    } else if (key == "seed") {
      config.seed = detail::parse_number<std::uint64_t>(key, value);
    } else if (key == "feedback") {
      config.feedback.mode = parse_feedback_mode(value);
    } else if (key == "feedback_strength") {
      config.feedback.strength = detail::parse_number<double>(key, value);
    } else if (key == "boundary") {
      config.boundary = parse_boundary_mode(value);
    } else {
      throw config_error("unknown key '" + std::string(key) + "'");
    }
  }

  for (const char* required : {"sources", "multiple", "mean_pairs"}) {
    if (!seen.contains(std::string_view(required))) {
      throw config_error(std::string("missing mandatory key '") + required +
                         "'");
    }
  }
  try {
    config.validate();
  } catch (const domain_error& e) {
    throw config_error(e.what());
  }
  return config;
}

/// Inverse of parse_config; doubles are written in shortest round-trip form.
inline std::string format_config(const SimConfig& config) {
  return fmt::format(
      "sources={}\nsteps={}\nmultiple={}\nmean_pairs={}\ncycles={}\nseed={}\n"
      "feedback={}\nfeedback_strength={}\nboundary={}\n",
      config.source_count, config.step_count, config.multiple,
      config.mean_pairs, config.cycles, config.seed,
      to_string(config.feedback.mode), config.feedback.strength,
      to_string(config.boundary));
}

}  // namespace spdcmux
