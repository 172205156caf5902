// spdcmux: command-line front end for the multiplexed SPDC source model.
//
//   spdcmux simulate        --sources 100 --multiple 4 --mean-pairs 0.049
//   spdcmux sweep           --param power --from 0.01 --to 0.30 --steps 30 ...
//   spdcmux optimize        --sources 100 --multiple 4
//   spdcmux oracle          --sources 100 --multiple 4 --mean-pairs 0.049
//   spdcmux verify-topology --sources 11 --steps 3

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#ifdef SPDCMUX_CLI11_PACKAGE
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif
#include <fmt/format.h>

#include "spdcmux/spdcmux.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Configuration flags shared by simulate, sweep, oracle and optimize. Values
// given on the command line override the same keys from --config.
struct ConfigFlags {
  std::string config_path;
  std::optional<int> sources;
  std::optional<int> steps;
  std::optional<int> multiple;
  std::optional<double> mean_pairs;
  std::optional<std::uint64_t> cycles;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> feedback;
  std::optional<double> feedback_strength;
  std::optional<std::string> boundary;

  // `steps_flags` names the register-depth option; sweep uses --steps for its
  // grid instead.
  void attach(CLI::App& app,
              const std::string& steps_flags = "--steps,--register-steps") {
    app.add_option("--config", config_path, "key=value configuration file")
        ->check(CLI::ExistingFile);
    app.add_option("--sources", sources, "number of downconverters (S)");
    app.add_option(steps_flags, steps, "delay register steps (K), default 3");
    app.add_option("--multiple", multiple, "frequency multiple (m)");
    app.add_option("--mean-pairs", mean_pairs, "mean pair number per pulse (N)");
    app.add_option("--cycles", cycles, "pump cycles, default 100000");
    app.add_option("--seed", seed, "random seed, default 1");
    app.add_option("--feedback", feedback, "off | boost | turbo_boost");
    app.add_option("--feedback-strength", feedback_strength, "feedback beta");
    app.add_option("--boundary", boundary, "constrained | unconstrained");
  }

  // Merges file and flags into one document and parses it, so every source of
  // configuration goes through the same validation.
  std::string document() const {
    std::vector<std::pair<std::string, std::string>> entries;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      std::stringstream buffer;
      buffer << in.rdbuf();
      std::string text = buffer.str();
      std::istringstream lines(text);
      std::string line;
      while (std::getline(lines, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) {
          line.erase(hash);
        }
        std::istringstream tokens(line);
        std::string token;
        while (tokens >> token) {
          const auto eq = token.find('=');
          if (eq == std::string::npos) {
            throw spdcmux::config_error("expected key=value, got '" + token +
                                        "'");
          }
          entries.emplace_back(token.substr(0, eq), token.substr(eq + 1));
        }
      }
    }
    auto set = [&](const std::string& key, std::string value) {
      for (auto& [k, v] : entries) {
        if (k == key) {
          v = std::move(value);
          return;
        }
      }
      entries.emplace_back(key, std::move(value));
    };
    if (sources) set("sources", std::to_string(*sources));
    if (steps) set("steps", std::to_string(*steps));
    if (multiple) set("multiple", std::to_string(*multiple));
    if (mean_pairs) set("mean_pairs", fmt::format("{}", *mean_pairs));
    if (cycles) set("cycles", std::to_string(*cycles));
    if (seed) set("seed", std::to_string(*seed));
    if (feedback) set("feedback", *feedback);
    if (feedback_strength) {
      set("feedback_strength", fmt::format("{}", *feedback_strength));
    }
    if (boundary) set("boundary", *boundary);

    std::string doc;
    for (const auto& [k, v] : entries) doc += k + "=" + v + "\n";
    return doc;
  }

  spdcmux::SimConfig parse() const { return spdcmux::parse_config(document()); }
};

struct Output {
  std::string path;
  bool gnuplot = false;

  void attach(CLI::App& app) {
    app.add_option("--out", path, "write output to this file instead of stdout");
    app.add_flag("--gnuplot", gnuplot,
                 "emit gnuplot two-column series instead of CSV");
  }

  void write(const std::string& text) const {
    if (path.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
  }

  std::string render(const std::vector<spdcmux::MetricRow>& rows) const {
    return gnuplot ? spdcmux::emit_gnuplot(rows) : spdcmux::emit_csv(rows);
  }
};

std::string topology_csv(const spdcmux::RegisterTopology& topology) {
  auto join = [](const std::vector<int>& delays) {
    std::string s;
    for (int d : delays) {
      if (!s.empty()) s += ' ';
      s += std::to_string(d);
    }
    return s;
  };
  std::string out = "source,accessible,inaccessible\n";
  for (int i = 1; i <= topology.source_count(); ++i) {
    const auto set = topology.accessible_delays(i);
    std::vector<int> missing;
    for (int d = 0; d <= topology.max_delay(); ++d) {
      if (!set.contains(d)) missing.push_back(d);
    }
    out += fmt::format("{},{},{}\n", i, join(set.accessible), join(missing));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiplexed SPDC single-photon source: simulation and exact analysis"};
  app.require_subcommand(1);

  // simulate
  ConfigFlags sim_flags;
  Output sim_out;
  auto* simulate = app.add_subcommand("simulate", "run one Monte Carlo experiment");
  sim_flags.attach(*simulate);
  sim_out.attach(*simulate);

  // oracle
  ConfigFlags oracle_flags;
  Output oracle_out;
  auto* oracle = app.add_subcommand("oracle", "exact stationary rates (unconstrained boundaries)");
  oracle_flags.attach(*oracle);
  oracle_out.attach(*oracle);

  // sweep
  ConfigFlags sweep_flags;
  Output sweep_out;
  std::string sweep_param = "power";
  std::optional<double> sweep_from;
  std::optional<double> sweep_to;
  int sweep_steps = 0;
  std::vector<double> sweep_grid;
  std::string sweep_engine = "monte_carlo";
  unsigned sweep_jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "vary one parameter over a grid");
  sweep_flags.attach(*sweep, "--register-steps");
  sweep_out.attach(*sweep);
  sweep->add_option("--param", sweep_param, "power | multiple | size")
      ->check(CLI::IsMember({"power", "multiple", "size"}));
  auto* from_opt = sweep->add_option("--from", sweep_from, "first grid value");
  auto* to_opt = sweep->add_option("--to", sweep_to, "last grid value");
  auto* steps_opt = sweep->add_option("--steps", sweep_steps, "number of grid points");
  auto* grid_opt = sweep->add_option("--grid", sweep_grid, "explicit grid values")
                       ->delimiter(',');
  from_opt->needs(to_opt)->needs(steps_opt)->excludes(grid_opt);
  to_opt->needs(from_opt);
  steps_opt->needs(from_opt);
  sweep->add_option("--engine", sweep_engine, "monte_carlo | oracle | both")
      ->check(CLI::IsMember({"monte_carlo", "mc", "oracle", "both"}));
  sweep->add_option("--jobs", sweep_jobs, "concurrent grid points")
      ->check(CLI::PositiveNumber);

  // optimize
  int opt_sources = 0;
  int opt_multiple = 0;
  int opt_steps = 3;
  double opt_tolerance = 1e-10;
  bool opt_confirm = false;
  std::uint64_t opt_cycles = 100000;
  std::uint64_t opt_seed = 1;
  std::string opt_boundary = "constrained";
  auto* optimize = app.add_subcommand("optimize", "mean pair number where lack and multi-photon rates meet");
  optimize->add_option("--sources", opt_sources, "number of downconverters (S)")->required();
  optimize->add_option("--multiple", opt_multiple, "frequency multiple (m)")->required();
  optimize->add_option("--steps", opt_steps, "delay register steps (K)");
  optimize->add_option("--tolerance", opt_tolerance, "|lack - multi| at the returned point")
      ->check(CLI::PositiveNumber);
  optimize->add_flag("--confirm", opt_confirm, "add a Monte Carlo run at the optimum");
  optimize->add_option("--cycles", opt_cycles, "cycles for --confirm");
  optimize->add_option("--seed", opt_seed, "seed for --confirm");
  optimize->add_option("--boundary", opt_boundary, "boundary mode for --confirm")
      ->check(CLI::IsMember({"constrained", "unconstrained"}));

  // verify-topology
  int topo_sources = 0;
  int topo_steps = 3;
  std::string topo_boundary = "constrained";
  std::string topo_path;
  auto* verify = app.add_subcommand("verify-topology", "per-source accessible delays as CSV");
  verify->add_option("--sources", topo_sources, "number of downconverters (S)")->required();
  verify->add_option("--steps", topo_steps, "delay register steps (K)");
  verify->add_option("--boundary", topo_boundary, "constrained | unconstrained")
      ->check(CLI::IsMember({"constrained", "unconstrained"}));
  verify->add_option("--out", topo_path, "write CSV to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*simulate) {
      const auto config = sim_flags.parse();
      const auto metrics = spdcmux::run_simulation(config);
      const std::vector rows{spdcmux::make_row(config.mean_pairs, metrics, config.seed)};
      sim_out.write(sim_out.render(rows));
    } else if (*oracle) {
      const auto config = oracle_flags.parse();
      const auto rates = spdcmux::stationary_rates(
          config.source_count, config.step_count, config.multiple, config.mean_pairs);
      const std::vector rows{spdcmux::make_row(config.mean_pairs, rates, config.multiple,
                                               config.cycles, config.seed)};
      oracle_out.write(oracle_out.render(rows));
    } else if (*sweep) {
      spdcmux::SweepSpec spec;
      spec.parameter = spdcmux::parse_sweep_parameter(sweep_param);
      spec.engine = spdcmux::parse_engine_selection(sweep_engine);
      if (sweep_from) {
        spec.grid = spdcmux::linear_grid(*sweep_from, *sweep_to, sweep_steps);
      } else {
        spec.grid = sweep_grid;
      }
      if (spec.grid.empty()) {
        throw spdcmux::config_error("sweep needs --grid or --from/--to/--steps");
      }
      // The swept key may be absent; a placeholder lets the base parse and
      // apply_parameter overwrites it per point.
      ConfigFlags base = sweep_flags;
      switch (spec.parameter) {
        case spdcmux::SweepParameter::power:
          if (!base.mean_pairs) base.mean_pairs = spec.grid.front();
          break;
        case spdcmux::SweepParameter::multiple:
          if (!base.multiple) base.multiple = 1;
          break;
        case spdcmux::SweepParameter::size:
          if (!base.sources) base.sources = 1;
          break;
      }
      spec.base = base.parse();
      const auto rows = spdcmux::run_sweep(spec, sweep_jobs);
      sweep_out.write(sweep_out.render(rows));
    } else if (*optimize) {
      const double best = spdcmux::optimized_power(opt_sources, opt_multiple,
                                                   opt_steps, opt_tolerance);
      const auto rates =
          spdcmux::stationary_rates(opt_sources, opt_steps, opt_multiple, best);
      std::string out = "mean_pairs,lack_rate,multi_rate,relative_multi_rate,engine\n";
      out += fmt::format("{:.6g},{:.6g},{:.6g},{:.6g},oracle\n", best, rates.lack_rate,
                         rates.multi_rate, rates.relative_multi_rate);
      if (opt_confirm) {
        spdcmux::SimConfig config;
        config.source_count = opt_sources;
        config.step_count = opt_steps;
        config.multiple = opt_multiple;
        config.mean_pairs = best;
        config.cycles = opt_cycles;
        config.seed = opt_seed;
        config.boundary = spdcmux::parse_boundary_mode(opt_boundary);
        const auto m = spdcmux::run_simulation(config);
        out += fmt::format("{:.6g},{:.6g},{:.6g},{:.6g},monte_carlo\n", best,
                           m.lack_rate().value_or(0.0), m.multi_rate().value_or(0.0),
                           m.relative_multi_rate().value_or(0.0));
      }
      std::cout << out;
    } else if (*verify) {
      const spdcmux::RegisterTopology topology(
          topo_sources, topo_steps, spdcmux::parse_boundary_mode(topo_boundary));
      Output out{topo_path, false};
      out.write(topology_csv(topology));
    }
  } catch (const spdcmux::config_error& e) {
    std::cerr << "spdcmux: " << e.what() << "\n";
    return kExitUsage;
  } catch (const spdcmux::domain_error& e) {
    std::cerr << "spdcmux: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "spdcmux: " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}
