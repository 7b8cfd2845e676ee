#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hsdm/datagen.hpp"
#include "hsdm/filters.hpp"

namespace hsdm {

/// One algorithm entry of an experiment. Step size is given either directly
/// (`lambda`) or as a fraction of the bound 2(1-alpha)/L.
struct AlgorithmSpec {
  std::string name;   // hrlsa | hrlsb | cregls | rls
  std::string label;  // unique within the experiment; defaults to name
  double alpha = 0.5;
  std::optional<double> lambda;
  std::optional<double> lambda_fraction;
  double lipschitz = 0.1;
  double forgetting = 1.0;
  double r0_scale = 0.0;
  VarpiPolicy varpi;
  double kappa = 0.0;     // hrlsb; <= 0 means kappa = lambda
  double rho = 1e-20;     // cregls
  double rls_delta = 1e-2;

  SolverParams solver_params() const;
  void validate() const;
};

struct SweepSpec {
  AlgorithmSpec base;
  std::vector<double> alphas{0.5};
  std::vector<double> lambda_fractions{0.2, 0.5, 0.9, 0.99};
  double target_nrmsd = 0.1;
};

struct ExperimentConfig {
  Scenario scenario;
  std::vector<AlgorithmSpec> algorithms;
  std::size_t trials = 50;
  std::size_t record_every = 1;
  std::filesystem::path output = "out";
  std::size_t threads = 0;  // 0 = HSDM_THREADS or hardware concurrency
  bool raw_traces = true;
  bool diagnostics = false;  // adds varpi, step_delta, theta_norm columns
  std::optional<SweepSpec> sweep;

  void validate() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

std::unique_ptr<OnlineFilter> make_filter(const AlgorithmSpec& spec, std::size_t dim);

/// ||x - theta|| / ||theta||; throws ZeroTruth when theta = 0.
double nrmsd(const Vec& x, const Vec& theta);

struct TraceRecord {
  std::size_t algorithm = 0;  // index into ExperimentConfig::algorithms
  std::size_t trial = 0;
  std::size_t step = 0;
  double nrmsd = 0.0;
  double varpi = 0.0;       // NaN when not applicable
  double step_delta = 0.0;
  double theta_norm = 0.0;  // NaN unless diagnostics are on for hrlsa
};

struct TrialOutcome {
  std::vector<TraceRecord> records;
  bool diverged = false;
  std::string message;
};

struct MeanPoint {
  std::size_t step = 0;
  double mean_nrmsd = 0.0;
  double stderr_nrmsd = 0.0;
};

struct AlgorithmSummary {
  std::string label;
  std::string kind;
  std::size_t trials = 0;
  std::size_t diverged = 0;
  std::vector<MeanPoint> mean;
};

struct ExperimentResult {
  std::vector<std::vector<TrialOutcome>> outcomes;  // [algorithm][trial]
  std::vector<AlgorithmSummary> summaries;
  bool all_diverged_somewhere = false;  // some algorithm lost every trial
};

/// Runs every (algorithm, trial) pair on a worker pool. The result depends
/// only on the configuration, never on the thread count or scheduling.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Runs one trial of one algorithm.
TrialOutcome run_trial(const ExperimentConfig& cfg, std::size_t algorithm, std::size_t trial);

/// Writes traces.csv (when raw traces are on), mean.csv, summary.csv and,
/// if any trial diverged, diverged.csv into `dir`.
void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& res,
                   const std::filesystem::path& dir);

std::string traces_csv(const ExperimentConfig& cfg, const ExperimentResult& res);
std::string mean_csv(const ExperimentConfig& cfg, const ExperimentResult& res);

struct SweepEntry {
  std::string label;
  double alpha = 0.0;
  double lambda_fraction = 0.0;
  double lambda = 0.0;
  std::optional<std::size_t> steps_to_target;
  double final_mean_nrmsd = 0.0;
  std::size_t rank = 0;
};

struct SweepResult {
  ExperimentConfig expanded;  // the sweep grid as an ordinary experiment
  ExperimentResult experiment;
  std::vector<SweepEntry> entries;  // in rank order, fastest first
};

/// Expands the sweep grid into algorithms, runs them on shared data streams
/// and ranks them by the first recorded step at which the mean NRMSD drops
/// to the target (never-reaching entries last, ordered by final NRMSD).
SweepResult run_sweep(const ExperimentConfig& cfg);
void write_sweep_outputs(const SweepResult& res, const std::filesystem::path& dir);

std::size_t resolve_threads(std::size_t requested);

}  // namespace hsdm
