// Command-line entry point: run, sweep and verify experiment configs.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "nmt/config.hpp"
#include "nmt/errors.hpp"
#include "nmt/harness.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_flags(CLI::App* cmd, Options& opts) {
  cmd->add_option("--config", opts.config, "Experiment config file")->required();
  cmd->add_option("--seed", opts.seed, "Override the config seed");
  cmd->add_option("--out", opts.out, "Output root directory");
}

int execute(const Options& opts, std::initializer_list<nmt::JobKind> allowed,
            const char* command) {
  nmt::ExperimentConfig config;
  try {
    config = nmt::load_config(opts.config);
  } catch (const nmt::ValidationError& e) {
    std::cerr << "invalid config " << opts.config << ":\n";
    for (const auto& issue : e.issues()) {
      std::cerr << "  " << issue.key << ": " << issue.message << "\n";
    }
    return 1;
  }
  bool ok = false;
  for (auto job : allowed) ok = ok || job == config.job;
  if (!ok) {
    std::cerr << "'" << command << "' cannot run job '" << nmt::to_string(config.job) << "'\n";
    return 1;
  }
  if (opts.seed) {
    config.seed = *opts.seed;
    if (config.data) config.data->seed = config.seed;
  }
  const nmt::RunOutcome outcome = nmt::run_experiment(config, opts.out);
  if (outcome.status != 0) {
    std::cerr << outcome.summary.dump(2) << "\n";
    std::cerr << "failed; details in " << (outcome.directory / "error.json").string() << "\n";
    return outcome.status;
  }
  std::cout << outcome.directory.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Staged Lagrangian multi-task optimization"};
  app.require_subcommand(1);

  Options run_opts, sweep_opts, verify_opts;
  auto* run = app.add_subcommand("run", "Run an nmt job");
  add_flags(run, run_opts);
  auto* sweep = app.add_subcommand("sweep", "Run a grid or sweep-compare job");
  add_flags(sweep, sweep_opts);
  auto* verify = app.add_subcommand("verify", "Run a duality analysis job");
  add_flags(verify, verify_opts);

  CLI11_PARSE(app, argc, argv);

  using nmt::JobKind;
  if (run->parsed()) return execute(run_opts, {JobKind::kNmt}, "run");
  if (sweep->parsed()) {
    return execute(sweep_opts, {JobKind::kGrid, JobKind::kSweepCompare}, "sweep");
  }
  return execute(verify_opts, {JobKind::kDuality}, "verify");
}
