#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "hsdm/error.hpp"
#include "hsdm/harness.hpp"
#include "hsdm/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitAllDiverged = 3;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Override scenario.seed");
  cmd->add_option("--trials", o.trials, "Override the trial count")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "Override the output directory");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = auto)");
}

hsdm::ExperimentConfig load(const std::string& path, const Overrides& o) {
  hsdm::ExperimentConfig cfg = hsdm::load_config(path);
  if (o.seed) cfg.scenario.seed = *o.seed;
  if (o.trials) cfg.trials = *o.trials;
  if (o.out) cfg.output = *o.out;
  if (o.threads) cfg.threads = *o.threads;
  cfg.validate();
  return cfg;
}

void print_summary(const hsdm::ExperimentResult& res) {
  std::printf("%-28s %-7s %7s %9s %16s\n", "algorithm", "kind", "trials", "diverged",
              "final mean NRMSD");
  for (const auto& s : res.summaries) {
    const double final_nrmsd = s.mean.empty() ? 0.0 : s.mean.back().mean_nrmsd;
    std::printf("%-28s %-7s %7zu %9zu %16.6e\n", s.label.c_str(), s.kind.c_str(), s.trials,
                s.diverged, final_nrmsd);
  }
}

int cmd_run(const std::string& path, const Overrides& o) {
  const hsdm::ExperimentConfig cfg = load(path, o);
  const hsdm::ExperimentResult res = hsdm::run_experiment(cfg);
  hsdm::write_outputs(cfg, res, cfg.output);
  print_summary(res);
  std::printf("wrote %s\n", cfg.output.string().c_str());
  if (res.all_diverged_somewhere) {
    std::fprintf(stderr, "error: every trial of at least one algorithm diverged\n");
    return kExitAllDiverged;
  }
  return kExitOk;
}

int cmd_sweep(const std::string& path, const Overrides& o) {
  const hsdm::ExperimentConfig cfg = load(path, o);
  const hsdm::SweepResult res = hsdm::run_sweep(cfg);
  hsdm::write_sweep_outputs(res, cfg.output);
  std::printf("%-4s %-40s %12s %16s\n", "rank", "label", "steps", "final mean NRMSD");
  for (const auto& e : res.entries) {
    const std::string steps = e.steps_to_target ? std::to_string(*e.steps_to_target) : "-";
    std::printf("%-4zu %-40s %12s %16.6e\n", e.rank, e.label.c_str(), steps.c_str(),
                e.final_mean_nrmsd);
  }
  std::printf("wrote %s\n", cfg.output.string().c_str());
  if (res.experiment.all_diverged_somewhere) {
    std::fprintf(stderr, "error: every trial of at least one grid point diverged\n");
    return kExitAllDiverged;
  }
  return kExitOk;
}

int cmd_verify(std::uint64_t seed) {
  bool ok = true;
  for (const auto& s : hsdm::verify_all(seed)) {
    std::printf("[%s] %-8s checks=%zu failures=%zu worst=%.3e%s%s\n", s.passed ? "PASS" : "FAIL",
                s.name.c_str(), s.checks, s.failures, s.worst, s.passed ? "" : "  first: ",
                s.detail.c_str());
    ok = ok && s.passed;
  }
  return ok ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid steepest descent filters for sparse system identification"};
  app.require_subcommand(1);

  std::string run_path;
  Overrides run_o;
  CLI::App* run = app.add_subcommand("run", "Run the Monte Carlo experiment in a config file");
  run->add_option("config", run_path, "Experiment config (JSON)")->required();
  add_overrides(run, run_o);

  std::string sweep_path;
  Overrides sweep_o;
  CLI::App* sweep = app.add_subcommand("sweep", "Run the step-size grid of a config's sweep block");
  sweep->add_option("config", sweep_path, "Experiment config (JSON)")->required();
  add_overrides(sweep, sweep_o);

  std::uint64_t verify_seed = 1;
  CLI::App* verify = app.add_subcommand("verify", "Run the mapping, prox and statistics suites");
  verify->add_option("--seed", verify_seed, "Seed of the randomized suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (run->parsed()) return cmd_run(run_path, run_o);
    if (sweep->parsed()) return cmd_sweep(sweep_path, sweep_o);
    return cmd_verify(verify_seed);
  } catch (const hsdm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
