// spinent: alpha sweeps, level diagrams and finite-size scaling from the command line.
//
// Exit codes: 0 success, 2 configuration error, 3 solver error, 4 fit error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spinent/analysis.hpp"
#include "spinent/csv.hpp"
#include "spinent/scaling.hpp"

namespace {

using namespace spinent;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitFit = 4;

struct RunConfig {
  std::string model = "chain1d";
  int n_sites = 16;
  std::string alpha;  // start:stop:step; empty means the model default
  std::size_t k = 0;  // 0 means the model default
  std::uint64_t seed = 42;
  double jump_threshold = kDefaultJumpThreshold;
  double resolution = kDefaultResolution;
  std::string out;  // empty means stdout
  unsigned threads = 0;
};

void add_common(CLI::App& cmd, RunConfig& cfg) {
  cmd.add_option("--model", cfg.model, "chain1d | square2d | ss")->capture_default_str();
  cmd.add_option("--n", cfg.n_sites, "number of sites")->capture_default_str();
  cmd.add_option("--alpha", cfg.alpha, "alpha grid start:stop:step (default per model)");
  cmd.add_option("--k", cfg.k, "lowest states per point (0: model default)")->capture_default_str();
  cmd.add_option("--seed", cfg.seed, "Lanczos start-vector seed")->capture_default_str();
  cmd.add_option("--jump-threshold", cfg.jump_threshold, "minimum |dC1| counted as a jump")->capture_default_str();
  cmd.add_option("--resolution", cfg.resolution, "bisection bracket width (0: no refinement)")
      ->capture_default_str();
  cmd.add_option("--out", cfg.out, "output file (default stdout)");
  cmd.add_option("--threads", cfg.threads, "worker threads (0: all cores)")->capture_default_str();
}

GridRange parse_range(const std::string& text, ModelKind kind) {
  if (text.empty()) return default_range(kind);
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(csv::parse_number(item));
  if (parts.size() != 3) throw ConfigError("--alpha expects start:stop:step, got '" + text + "'");
  return {parts[0], parts[1], parts[2]};
}

SweepConfig sweep_config(const RunConfig& cfg) {
  SweepConfig sc;
  sc.model.kind = parse_model(cfg.model);
  sc.model.n_sites = cfg.n_sites;
  validate(sc.model);
  sc.k = cfg.k == 0 ? default_k(sc.model) : cfg.k;
  sc.seed = cfg.seed;
  sc.threads = cfg.threads;
  if (!(cfg.jump_threshold > 0.0)) throw ConfigError("--jump-threshold must be positive");
  if (cfg.resolution < 0.0) throw ConfigError("--resolution must be non-negative");
  return sc;
}

std::vector<double> grid_of(const RunConfig& cfg, ModelKind kind) {
  const GridRange r = parse_range(cfg.alpha, kind);
  return alpha_grid(r.start, r.stop, r.step);
}

/// Writes through `emit` to --out, or to stdout when no file was named.
template <typename Emit>
void write_output(const std::string& path, Emit&& emit) {
  if (path.empty()) {
    emit(std::cout);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot open '" + path + "' for writing");
  emit(file);
  if (!file) throw ConfigError("write to '" + path + "' failed");
}

int run_sweep(const RunConfig& cfg) {
  const SweepConfig sc = sweep_config(cfg);
  const auto grid = grid_of(cfg, sc.model.kind);
  const SweepResult coarse = sweep(sc, grid);
  const DiscontinuityReport report = locate_discontinuities(coarse, cfg.jump_threshold, cfg.resolution);
  const SweepResult merged = merge_records(coarse, report.evaluated);
  write_output(cfg.out, [&](std::ostream& os) { csv::write_sweep(os, merged); });

  for (const auto& d : report.locations) {
    std::cerr << "jump at alpha=" << csv::format_number(d.alpha_star) << " bracket ["
              << csv::format_number(d.lo) << ", " << csv::format_number(d.hi) << "] dC1="
              << csv::format_number(d.jump) << (d.at_boundary ? " (grid boundary, not refined)" : "") << '\n';
  }
  std::size_t failures = 0;
  for (const auto& r : merged.records) {
    if (r.flag == RecordFlag::solver_error) {
      ++failures;
      std::cerr << "solver error at alpha=" << csv::format_number(r.alpha) << ": " << r.message << '\n';
    }
  }
  return failures == 0 ? kExitOk : kExitSolver;
}

int run_levels(const RunConfig& cfg) {
  SweepConfig sc = sweep_config(cfg);
  const auto grid = grid_of(cfg, sc.model.kind);
  LevelDiagram diagram;
  if (sc.k < 3) {
    std::cerr << "warning: k=" << sc.k << " < 3, no level crossings computable\n";
    diagram.config = sc;
    for (double a : grid) diagram.points.push_back(evaluate_levels(sc, a));
  } else {
    diagram = energy_levels(sc, grid, cfg.resolution);
  }
  write_output(cfg.out, [&](std::ostream& os) {
    csv::write_levels(os, diagram);
    if (cfg.out.empty()) os << '\n';
  });
  const std::string crossings_path = cfg.out.empty() ? "" : cfg.out + ".crossings.csv";
  write_output(crossings_path, [&](std::ostream& os) { csv::write_crossings(os, diagram); });
  for (const auto& p : diagram.points) {
    if (p.flag == RecordFlag::solver_error) return kExitSolver;
  }
  return kExitOk;
}

struct ScalingArgs {
  std::vector<int> even{8, 10, 12, 14, 16};
  std::vector<int> odd{9, 11, 13, 15};
  std::vector<std::string> from;  // N:path pairs
  std::optional<double> alpha_c;  // log-log reference point; default is the rational limit
};

int run_scaling(const RunConfig& cfg, const ScalingArgs& args) {
  if (parse_model(cfg.model) != ModelKind::Chain1D) throw ConfigError("scaling applies to --model chain1d");
  std::vector<SizeSweep> sweeps;
  if (!args.from.empty()) {
    for (const auto& item : args.from) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw ConfigError("--from expects N:path, got '" + item + "'");
      const int n = static_cast<int>(csv::parse_number(item.substr(0, colon)));
      std::ifstream file(item.substr(colon + 1), std::ios::binary);
      if (!file) throw ConfigError("cannot read '" + item.substr(colon + 1) + "'");
      sweeps.push_back({n, csv::read_sweep(file)});
    }
  } else {
    std::vector<int> sizes = args.even;
    sizes.insert(sizes.end(), args.odd.begin(), args.odd.end());
    for (int n : sizes) {
      RunConfig one = cfg;
      one.n_sites = n;
      const SweepConfig sc = sweep_config(one);
      const auto grid = grid_of(one, sc.model.kind);
      std::cerr << "N=" << n << ": sweeping " << grid.size() << " points\n";
      sweeps.push_back({n, refined_sweep(sc, grid, cfg.jump_threshold, cfg.resolution)});
    }
  }
  const ScalingReport report = scaling_report(sweeps, cfg.jump_threshold, args.alpha_c);
  write_report_text(std::cout, report);
  if (!cfg.out.empty()) write_output(cfg.out, [&](std::ostream& os) { write_report_csv(os, report); });
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact diagonalization of frustrated spin-1/2 models and pairwise concurrence"};
  app.set_config("--config", "", "TOML/INI file with option values; flags on the command line win");
  app.require_subcommand(1);

  RunConfig sweep_cfg, levels_cfg, scaling_cfg;
  ScalingArgs scaling_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "alpha sweep of energies and concurrences (CSV)");
  add_common(*sweep_cmd, sweep_cfg);
  auto* levels_cmd = app.add_subcommand("levels", "level curves and first/second excited crossings (CSV)");
  add_common(*levels_cmd, levels_cfg);
  auto* scaling_cmd = app.add_subcommand("scaling", "jump table, extrapolation and log-log fits for rings");
  add_common(*scaling_cmd, scaling_cfg);
  scaling_cmd->add_option("--even", scaling_args.even, "even ring sizes")->delimiter(',');
  scaling_cmd->add_option("--odd", scaling_args.odd, "odd ring sizes")->delimiter(',');
  scaling_cmd->add_option("--from", scaling_args.from, "N:path of a sweep CSV; repeat per size");
  scaling_cmd->add_option("--alpha-c", scaling_args.alpha_c, "alpha_c for the log-log fits (default: rational limit)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*sweep_cmd) return run_sweep(sweep_cfg);
    if (*levels_cmd) return run_levels(levels_cfg);
    if (*scaling_cmd) return run_scaling(scaling_cfg, scaling_args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const FitError& e) {
    std::cerr << "fit error: " << e.what() << '\n';
    return kExitFit;
  } catch (const DomainError& e) {
    std::cerr << "fit error: " << e.what() << '\n';
    return kExitFit;
  }
  return kExitOk;
}
