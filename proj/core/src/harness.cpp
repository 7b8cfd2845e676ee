#include "hsdm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "hsdm/error.hpp"
#include "hsdm/solvers.hpp"
#include <nlohmann/json.hpp>

namespace hsdm {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::Config, msg); }

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) config_error(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) config_error("unknown key '" + key + "' in " + where);
  }
}

double get_number(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  }
  config_error("key '" + key + "' must be a number");
}

std::size_t get_count(const json& obj, const std::string& key, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    config_error("key '" + key + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

Scenario parse_scenario(const json& j) {
  reject_unknown(j,
                 {"dim", "sparsity_pct", "input", "ar_delta", "ar_ratio_db", "snr_db", "horizon",
                  "change", "seed"},
                 "scenario");
  Scenario sc;
  sc.dim = get_count(j, "dim", sc.dim);
  sc.sparsity_pct = get_number(j, "sparsity_pct", sc.sparsity_pct);
  const std::string input = j.value("input", std::string("iid"));
  if (input == "iid") {
    sc.input = InputModel::Iid;
  } else if (input == "ar1") {
    sc.input = InputModel::Ar1;
    if (j.contains("ar_delta")) {
      sc.ar_delta = get_number(j, "ar_delta", 0.0);
    } else {
      sc.ar_delta = ar1_delta_from_ratio_db(get_number(j, "ar_ratio_db", 5.0));
    }
  } else {
    config_error("scenario.input must be 'iid' or 'ar1'");
  }
  sc.snr_db = get_number(j, "snr_db", sc.snr_db);
  sc.horizon = get_count(j, "horizon", sc.horizon);
  if (j.contains("change")) {
    const json& c = j.at("change");
    reject_unknown(c, {"at", "sparsity_pct"}, "scenario.change");
    if (!c.contains("at") || !c.contains("sparsity_pct")) {
      config_error("scenario.change needs 'at' and 'sparsity_pct'");
    }
    sc.change = SystemChange{get_count(c, "at", 0), get_number(c, "sparsity_pct", 0.0)};
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) config_error("scenario.seed must be an unsigned integer");
    sc.seed = j.at("seed").get<std::uint64_t>();
  }
  return sc;
}

AlgorithmSpec parse_algorithm(const json& j) {
  reject_unknown(j,
                 {"name", "label", "alpha", "lambda", "lambda_fraction", "lipschitz", "forgetting",
                  "r0_scale", "varpi", "kappa", "rho", "delta"},
                 "algorithm");
  AlgorithmSpec a;
  if (!j.contains("name") || !j.at("name").is_string()) config_error("algorithm needs a 'name'");
  a.name = j.at("name").get<std::string>();
  a.label = j.value("label", a.name);
  a.alpha = get_number(j, "alpha", a.alpha);
  if (j.contains("lambda")) a.lambda = get_number(j, "lambda", 0.0);
  if (j.contains("lambda_fraction")) a.lambda_fraction = get_number(j, "lambda_fraction", 0.0);
  a.lipschitz = get_number(j, "lipschitz", a.lipschitz);
  a.forgetting = get_number(j, "forgetting", a.forgetting);
  a.r0_scale = get_number(j, "r0_scale", a.r0_scale);
  a.kappa = get_number(j, "kappa", a.kappa);
  a.rho = get_number(j, "rho", a.rho);
  a.rls_delta = get_number(j, "delta", a.rls_delta);
  if (j.contains("varpi")) {
    const json& v = j.at("varpi");
    reject_unknown(v, {"mode", "eps", "inner_steps", "fixed", "initial"}, "algorithm.varpi");
    a.varpi.mode = varpi_mode_from_string(v.value("mode", std::string("power")));
    a.varpi.eps = get_number(v, "eps", a.varpi.eps);
    a.varpi.inner_steps = get_count(v, "inner_steps", a.varpi.inner_steps);
    a.varpi.fixed = get_number(v, "fixed", a.varpi.fixed);
    a.varpi.initial = get_number(v, "initial", a.varpi.initial);
  }
  return a;
}

void append_double(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "nan";
    return;
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

}  // namespace

SolverParams AlgorithmSpec::solver_params() const {
  if (lambda && lambda_fraction) {
    throw Error(ErrorCode::Config, "give either lambda or lambda_fraction, not both");
  }
  if (lambda) return SolverParams(alpha, *lambda, lipschitz);
  return SolverParams::from_fraction(alpha, lambda_fraction.value_or(0.99), lipschitz);
}

void AlgorithmSpec::validate() const {
  static const std::set<std::string> kNames{"hrlsa", "hrlsb", "cregls", "rls"};
  if (!kNames.count(name)) {
    throw Error(ErrorCode::Config, "unknown algorithm '" + name + "'");
  }
  if (!(forgetting > 0.0 && forgetting <= 1.0)) {
    throw Error(ErrorCode::Config, "forgetting must lie in (0, 1]");
  }
  if (name == "rls") {
    if (!(rls_delta > 0.0)) throw Error(ErrorCode::Config, "rls delta must be positive");
    return;
  }
  solver_params();
  if (name == "cregls" && !(rho > 0.0)) throw Error(ErrorCode::Config, "rho must be positive");
  if (name == "hrlsa") VarpiTracker(1, varpi);
}

void ExperimentConfig::validate() const {
  scenario.validate();
  if (trials < 1) throw Error(ErrorCode::Config, "trials must be >= 1");
  if (record_every < 1) throw Error(ErrorCode::Config, "record_every must be >= 1");
  if (algorithms.empty() && !sweep) throw Error(ErrorCode::Config, "no algorithms configured");
  std::set<std::string> labels;
  for (const auto& a : algorithms) {
    a.validate();
    if (!labels.insert(a.label).second) {
      throw Error(ErrorCode::Config, "duplicate algorithm label '" + a.label + "'");
    }
  }
  if (sweep) {
    sweep->base.validate();
    if (sweep->alphas.empty() || sweep->lambda_fractions.empty()) {
      throw Error(ErrorCode::Config, "sweep grid is empty");
    }
  }
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_error(std::string("malformed config: ") + e.what());
  }
  try {
    reject_unknown(j,
                   {"scenario", "algorithms", "trials", "record_every", "output", "threads",
                    "raw_traces", "diagnostics", "sweep", "description"},
                   "config");
    ExperimentConfig cfg;
    if (!j.contains("scenario")) config_error("config needs a 'scenario'");
    cfg.scenario = parse_scenario(j.at("scenario"));
    if (j.contains("algorithms")) {
      if (!j.at("algorithms").is_array()) config_error("'algorithms' must be an array");
      for (const auto& a : j.at("algorithms")) cfg.algorithms.push_back(parse_algorithm(a));
    }
    cfg.trials = get_count(j, "trials", cfg.trials);
    cfg.record_every = get_count(j, "record_every", cfg.record_every);
    if (j.contains("output")) cfg.output = j.at("output").get<std::string>();
    if (j.contains("threads")) {
      const json& t = j.at("threads");
      if (t.is_string() && t.get<std::string>() == "auto") {
        cfg.threads = 0;
      } else {
        cfg.threads = get_count(j, "threads", 0);
      }
    }
    cfg.raw_traces = j.value("raw_traces", cfg.raw_traces);
    cfg.diagnostics = j.value("diagnostics", cfg.diagnostics);
    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      reject_unknown(s, {"algorithm", "alpha", "lambda_fractions", "target_nrmsd"}, "sweep");
      SweepSpec sw;
      if (!s.contains("algorithm")) config_error("sweep needs an 'algorithm'");
      sw.base = parse_algorithm(s.at("algorithm"));
      if (s.contains("alpha")) sw.alphas = s.at("alpha").get<std::vector<double>>();
      if (s.contains("lambda_fractions")) {
        sw.lambda_fractions = s.at("lambda_fractions").get<std::vector<double>>();
      }
      sw.target_nrmsd = get_number(s, "target_nrmsd", sw.target_nrmsd);
      cfg.sweep = std::move(sw);
    }
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    config_error(std::string("bad config value: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Config, "cannot open config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::unique_ptr<OnlineFilter> make_filter(const AlgorithmSpec& spec, std::size_t dim) {
  HrlsOptions opts;
  opts.forgetting = spec.forgetting;
  opts.r0_scale = spec.r0_scale;
  if (spec.name == "hrlsa") {
    return std::make_unique<HrlsaFilter>(dim, spec.solver_params(), spec.varpi, opts);
  }
  if (spec.name == "hrlsb") {
    return std::make_unique<HrlsbFilter>(dim, spec.solver_params(), spec.kappa, opts);
  }
  if (spec.name == "cregls") {
    return std::make_unique<CreglsFilter>(dim, spec.solver_params(), spec.rho, opts);
  }
  if (spec.name == "rls") {
    return std::make_unique<RlsFilter>(dim, RlsOptions{spec.forgetting, spec.rls_delta});
  }
  throw Error(ErrorCode::Config, "unknown algorithm '" + spec.name + "'");
}

double nrmsd(const Vec& x, const Vec& theta) {
  const double denom = theta.norm();
  if (!(denom > 0.0)) throw Error(ErrorCode::ZeroTruth, "NRMSD undefined for a zero system");
  return (x - theta).norm() / denom;
}

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HSDM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

TrialOutcome run_trial(const ExperimentConfig& cfg, std::size_t algorithm, std::size_t trial) {
  const AlgorithmSpec& spec = cfg.algorithms.at(algorithm);
  const std::size_t dim = cfg.scenario.dim;
  TrialOutcome out;
  out.records.reserve(cfg.scenario.horizon / cfg.record_every);

  ScenarioStream stream(cfg.scenario, trial);
  std::unique_ptr<OnlineFilter> filter = make_filter(spec, dim);

  // Weighted distance to the population solution, measured against the
  // population mapping T = grad_map(I, theta, 1, 1) (unit-variance inputs).
  std::optional<FejerDiag> fejer;
  const bool want_fejer = cfg.diagnostics && spec.name == "hrlsa";
  const double lambda = spec.name == "rls" ? 0.0 : spec.solver_params().lambda();
  auto reset_fejer = [&](const Vec& x_now) {
    const Vec& theta = stream.theta();
    fejer.emplace(grad_map(SymMat::identity(dim), theta, 1.0, 1.0), theta, spec.alpha, lambda,
                  l1_min_norm_subgradient(theta), x_now);
  };
  if (want_fejer) reset_fejer(filter->estimate());

  try {
    for (std::size_t n = 1; n <= cfg.scenario.horizon; ++n) {
      const Vec theta_before = stream.theta();
      const Sample s = stream.next();
      if (want_fejer && stream.theta() != theta_before) reset_fejer(filter->estimate());
      filter->observe(s.a, s.b);
      const Vec x = filter->estimate();
      if (fejer) fejer->update(x);
      if (n % cfg.record_every == 0) {
        TraceRecord r;
        r.algorithm = algorithm;
        r.trial = trial;
        r.step = n;
        r.nrmsd = nrmsd(x, stream.theta());
        r.varpi = filter->varpi();
        r.step_delta = filter->step_delta();
        r.theta_norm = fejer ? fejer->theta_norm_trace().back() : kNaN;
        out.records.push_back(r);
      }
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonFinite && e.code() != ErrorCode::NotPositiveDefinite) throw;
    out.diverged = true;
    out.message = e.what();
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t n_alg = cfg.algorithms.size();
  const std::size_t n_trials = cfg.trials;

  ExperimentResult res;
  res.outcomes.assign(n_alg, std::vector<TrialOutcome>(n_trials));

  const std::size_t jobs = n_alg * n_trials;
  const std::size_t threads = std::min(resolve_threads(cfg.threads), std::max<std::size_t>(jobs, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= jobs) return;
      const std::size_t alg = job / n_trials;
      const std::size_t trial = job % n_trials;
      try {
        res.outcomes[alg][trial] = run_trial(cfg, alg, trial);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(jobs);
        return;
      }
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  const std::size_t points = cfg.scenario.horizon / cfg.record_every;
  for (std::size_t a = 0; a < n_alg; ++a) {
    AlgorithmSummary sum;
    sum.label = cfg.algorithms[a].label;
    sum.kind = cfg.algorithms[a].name;
    sum.trials = n_trials;
    std::vector<const TrialOutcome*> kept;
    for (const auto& o : res.outcomes[a]) {
      if (o.diverged) {
        ++sum.diverged;
      } else {
        kept.push_back(&o);
      }
    }
    sum.mean.resize(points);
    for (std::size_t i = 0; i < points; ++i) {
      MeanPoint& mp = sum.mean[i];
      mp.step = (i + 1) * cfg.record_every;
      if (kept.empty()) {
        mp.mean_nrmsd = kNaN;
        mp.stderr_nrmsd = kNaN;
        continue;
      }
      double total = 0.0;
      for (const auto* o : kept) total += o->records[i].nrmsd;
      const double k = static_cast<double>(kept.size());
      mp.mean_nrmsd = total / k;
      if (kept.size() > 1) {
        double ss = 0.0;
        for (const auto* o : kept) {
          const double d = o->records[i].nrmsd - mp.mean_nrmsd;
          ss += d * d;
        }
        mp.stderr_nrmsd = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
      }
    }
    if (sum.diverged == n_trials) res.all_diverged_somewhere = true;
    res.summaries.push_back(std::move(sum));
  }
  return res;
}

std::string traces_csv(const ExperimentConfig& cfg, const ExperimentResult& res) {
  std::string out = cfg.diagnostics ? "algorithm,trial,step,nrmsd,varpi,step_delta,theta_norm\n"
                                    : "algorithm,trial,step,nrmsd\n";
  for (std::size_t a = 0; a < res.outcomes.size(); ++a) {
    for (std::size_t t = 0; t < res.outcomes[a].size(); ++t) {
      const TrialOutcome& o = res.outcomes[a][t];
      if (o.diverged) continue;
      for (const TraceRecord& r : o.records) {
        out += cfg.algorithms[a].label;
        out += ',';
        out += std::to_string(r.trial);
        out += ',';
        out += std::to_string(r.step);
        out += ',';
        append_double(out, r.nrmsd);
        if (cfg.diagnostics) {
          out += ',';
          if (!std::isnan(r.varpi)) append_double(out, r.varpi);
          out += ',';
          append_double(out, r.step_delta);
          out += ',';
          if (!std::isnan(r.theta_norm)) append_double(out, r.theta_norm);
        }
        out += '\n';
      }
    }
  }
  return out;
}

std::string mean_csv(const ExperimentConfig& cfg, const ExperimentResult& res) {
  (void)cfg;
  std::string out = "algorithm,step,mean_nrmsd,stderr\n";
  for (const AlgorithmSummary& s : res.summaries) {
    for (const MeanPoint& p : s.mean) {
      out += s.label;
      out += ',';
      out += std::to_string(p.step);
      out += ',';
      append_double(out, p.mean_nrmsd);
      out += ',';
      append_double(out, p.stderr_nrmsd);
      out += '\n';
    }
  }
  return out;
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& res,
                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  if (cfg.raw_traces) write_file(dir / "traces.csv", traces_csv(cfg, res));
  write_file(dir / "mean.csv", mean_csv(cfg, res));

  std::string summary = "algorithm,kind,trials,diverged,final_step,final_mean_nrmsd,varpi_mode\n";
  std::string diverged = "algorithm,trial,message\n";
  bool any_diverged = false;
  for (std::size_t a = 0; a < res.summaries.size(); ++a) {
    const AlgorithmSummary& s = res.summaries[a];
    summary += s.label + ',' + s.kind + ',' + std::to_string(s.trials) + ',' +
               std::to_string(s.diverged) + ',';
    if (s.mean.empty()) {
      summary += ",nan";
    } else {
      summary += std::to_string(s.mean.back().step) + ',';
      append_double(summary, s.mean.back().mean_nrmsd);
    }
    summary += ',';
    if (s.kind == "hrlsa") summary += std::string(to_string(cfg.algorithms[a].varpi.mode));
    summary += '\n';
    for (std::size_t t = 0; t < res.outcomes[a].size(); ++t) {
      const TrialOutcome& o = res.outcomes[a][t];
      if (!o.diverged) continue;
      any_diverged = true;
      std::string msg = o.message;
      std::replace(msg.begin(), msg.end(), ',', ';');
      diverged += s.label + ',' + std::to_string(t) + ',' + msg + '\n';
    }
  }
  write_file(dir / "summary.csv", summary);
  if (any_diverged) write_file(dir / "diverged.csv", diverged);
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  if (!cfg.sweep) throw Error(ErrorCode::Config, "config has no 'sweep' block");
  const SweepSpec& sw = *cfg.sweep;

  SweepResult res;
  res.expanded = cfg;
  res.expanded.algorithms.clear();
  res.expanded.sweep.reset();
  struct Grid {
    double alpha;
    double fraction;
  };
  std::vector<Grid> grid;
  for (double alpha : sw.alphas) {
    for (double frac : sw.lambda_fractions) {
      AlgorithmSpec spec = sw.base;
      spec.alpha = alpha;
      spec.lambda.reset();
      spec.lambda_fraction = frac;
      std::ostringstream label;
      label << sw.base.name << "[alpha=" << alpha << ";fraction=" << frac << "]";
      spec.label = label.str();
      res.expanded.algorithms.push_back(spec);
      grid.push_back({alpha, frac});
    }
  }
  res.experiment = run_experiment(res.expanded);

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const AlgorithmSummary& s = res.experiment.summaries[i];
    SweepEntry e;
    e.label = s.label;
    e.alpha = grid[i].alpha;
    e.lambda_fraction = grid[i].fraction;
    e.lambda = res.expanded.algorithms[i].solver_params().lambda();
    e.final_mean_nrmsd = s.mean.empty() ? kNaN : s.mean.back().mean_nrmsd;
    for (const MeanPoint& p : s.mean) {
      if (p.mean_nrmsd <= sw.target_nrmsd) {
        e.steps_to_target = p.step;
        break;
      }
    }
    res.entries.push_back(e);
  }
  std::stable_sort(res.entries.begin(), res.entries.end(),
                   [](const SweepEntry& a, const SweepEntry& b) {
                     if (a.steps_to_target && b.steps_to_target) {
                       return *a.steps_to_target < *b.steps_to_target;
                     }
                     if (a.steps_to_target != b.steps_to_target) return a.steps_to_target.has_value();
                     const double fa = std::isnan(a.final_mean_nrmsd) ? INFINITY : a.final_mean_nrmsd;
                     const double fb = std::isnan(b.final_mean_nrmsd) ? INFINITY : b.final_mean_nrmsd;
                     return fa < fb;
                   });
  for (std::size_t i = 0; i < res.entries.size(); ++i) res.entries[i].rank = i + 1;
  return res;
}

void write_sweep_outputs(const SweepResult& res, const std::filesystem::path& dir) {
  write_outputs(res.expanded, res.experiment, dir);
  std::string out = "label,alpha,lambda_fraction,lambda,steps_to_target,final_mean_nrmsd,rank\n";
  for (const SweepEntry& e : res.entries) {
    out += e.label + ',';
    append_double(out, e.alpha);
    out += ',';
    append_double(out, e.lambda_fraction);
    out += ',';
    append_double(out, e.lambda);
    out += ',';
    if (e.steps_to_target) out += std::to_string(*e.steps_to_target);
    out += ',';
    append_double(out, e.final_mean_nrmsd);
    out += ',' + std::to_string(e.rank) + '\n';
  }
  write_file(dir / "sweep.csv", out);
}

}  // namespace hsdm
