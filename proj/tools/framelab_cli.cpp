// Command-line harness: policy comparison grids, the redundancy study and
// sampler training runs, each driven by one JSON config.
//
// Exit codes: 0 success, 2 invalid config, 3 runtime failure.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "framelab/bench.hpp"

namespace {

constexpr int kInvalidConfig = 2;
constexpr int kRuntimeFailure = 3;

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "JSON experiment config")->required();
  cmd->add_option("--out", opts.out_dir, "Output directory")->required();
  cmd->add_option("--seed", opts.seed, "Root seed (overrides the config)");
  cmd->add_option("--workers", opts.workers, "Worker threads (results do not depend on it)");
}

framelab::bench::ExperimentConfig resolve(const CommonOptions& opts) {
  auto config = framelab::bench::load_config(opts.config_path);
  if (opts.seed) config.seed = *opts.seed;
  if (opts.workers) {
    if (*opts.workers < 1) throw framelab::bench::ConfigError("--workers must be at least 1");
    config.workers = *opts.workers;
    config.sampler.train.workers = *opts.workers;
  }
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"framelab: frame-sampling policy laboratory"};
  app.require_subcommand(1);

  CommonOptions grid_opts, redundancy_opts, train_opts;
  auto* grid = app.add_subcommand("policy-grid", "Compare sampling policies over an (N, T) grid");
  add_common(grid, grid_opts);
  auto* redundancy = app.add_subcommand("redundancy", "Consecutive-frame relevance versus smoothness");
  add_common(redundancy, redundancy_opts);
  auto* train = app.add_subcommand("train", "Train the sampler and compare it with reference policies");
  add_common(train, train_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInvalidConfig;
  }

  try {
    if (grid->parsed()) {
      const auto config = resolve(grid_opts);
      const auto report = framelab::bench::run_policy_grid(config, grid_opts.out_dir);
      for (const auto& cell : report.summary["cells"]) {
        std::cout << "N=" << cell["N"] << " T=" << cell["T"] << '\n';
        for (const auto& [name, entry] : cell["policies"].items()) {
          std::cout << "  " << name << ": " << entry.dump() << '\n';
        }
      }
    } else if (redundancy->parsed()) {
      const auto config = resolve(redundancy_opts);
      const auto report = framelab::bench::run_redundancy_study(config, redundancy_opts.out_dir);
      for (const auto& cell : report.sweep.cells) {
        std::cout << "rho=" << cell.rho << " mean=" << cell.mean << " p50=" << cell.p50 << '\n';
      }
    } else if (train->parsed()) {
      const auto config = resolve(train_opts);
      const auto report = framelab::bench::run_sampler_experiment(config, train_opts.out_dir);
      std::cout << report.summary["comparison"].dump(2) << '\n';
    }
  } catch (const framelab::bench::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return 0;
}
