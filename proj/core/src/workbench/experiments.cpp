#include "adjqoc/workbench/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <stdexcept>

#include <json.hpp>

#include "adjqoc/adjoint.hpp"
#include "adjqoc/parallel.hpp"
#include "adjqoc/workbench/statistics.hpp"
#include "adjqoc/workbench/synthetic.hpp"

namespace adjqoc::workbench {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

json nullable(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

struct Instance {
  QuantumSystem sys;
  std::unique_ptr<ControlModel> model;
};

Instance make_instance(const SystemFile& file, const RunConfig& cfg) {
  cfg.validate();
  Instance in{to_quantum_system(file, cfg.rho, cfg.steps, cfg.dt), nullptr};
  in.model = make_control_model(cfg.model, in.sys.num_channels(), cfg.steps,
                                cfg.dt, cfg.model_options());
  return in;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

SmoothProblem make_problem(const QuantumSystem& sys, const ControlModel& model,
                           const AdjointOptions& opts) {
  check_compatible(sys, model);
  SmoothProblem p;
  p.cost = [&sys, &model](const RVector& theta) {
    return evaluate_cost(sys, model, theta);
  };
  p.gradient = [&sys, &model, opts](const RVector& theta) {
    FirstOrderResult r = first_order_pass(sys, model, theta, opts);
    return Evaluation{r.cost, std::move(r.grad), {}};
  };
  p.hessian = [&sys, &model, opts](const RVector& theta) {
    SecondOrderResult r = second_order_pass(sys, model, theta, opts);
    return Evaluation{r.cost, std::move(r.grad), std::move(r.hess)};
  };
  return p;
}

RunResult run_optimization(const SystemFile& system, const RunConfig& cfg,
                           OptimizerKind kind, const ParameterVector& theta0) {
  const Instance in = make_instance(system, cfg);
  if (theta0.size() != in.model->num_params()) {
    throw std::invalid_argument("run_optimization: theta0 has the wrong length");
  }
  const SmoothProblem problem = make_problem(in.sys, *in.model, cfg.adjoint_options());
  RunResult out;
  out.report = kind == OptimizerKind::kNewton
                   ? newton_trust_region(problem, theta0, cfg.criteria, cfg.trust_region())
                   : bfgs_baseline(problem, theta0, cfg.criteria, cfg.trust_region());
  PropagateOptions po;
  po.with_frechet = false;
  TrajectoryCache cache = propagate(in.sys, *in.model, out.report.final_theta, po);
  out.report.final_target_violation = target_violation(cache, in.sys.beta);
  out.controls = std::move(cache.controls);
  out.states = std::move(cache.states);
  return out;
}

RunResult run_optimization(const SystemFile& system, const RunConfig& cfg,
                           const std::optional<std::filesystem::path>& out_dir) {
  const Instance in = make_instance(system, cfg);
  const ParameterVector theta0 = draw_initial_theta(in.model->num_params(), cfg.seed);
  RunResult r = run_optimization(system, cfg, cfg.optimizer, theta0);
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    write_results_json(*out_dir / "results.json", system, cfg, r.report);
    write_controls_csv(*out_dir / "controls.csv", r.controls, cfg.dt);
    write_states_csv(*out_dir / "states.csv", r.states, cfg.dt);
  }
  return r;
}

void write_results_json(const std::filesystem::path& path,
                        const SystemFile& system, const RunConfig& cfg,
                        const OptimizationReport& rep) {
  json j;
  j["system"] = system.name;
  j["config"] = json::parse(dump_config(cfg));
  j["method"] = rep.method;
  j["iterations"] = rep.iterations;
  j["wall_time"] = rep.wall_time;
  j["termination_reason"] = to_string(rep.termination_reason);
  j["final_cost"] = nullable(rep.final_cost);
  j["final_grad_norm"] = nullable(rep.final_grad_norm);
  j["final_target_violation"] = nullable(rep.final_target_violation);
  j["final_hessian_min_eig"] =
      rep.final_hessian_min_eig ? nullable(*rep.final_hessian_min_eig) : json(nullptr);
  j["final_theta"] = std::vector<double>(rep.final_theta.data(),
                                         rep.final_theta.data() + rep.final_theta.size());
  json trace;
  std::vector<double> cost, grad, step, radius;
  std::vector<bool> accepted;
  for (const IterationRecord& r : rep.trace) {
    cost.push_back(r.cost);
    grad.push_back(r.grad_norm);
    step.push_back(r.step_norm);
    radius.push_back(r.trust_radius);
    accepted.push_back(r.accepted);
  }
  trace["cost"] = cost;
  trace["grad_norm"] = grad;
  trace["step_norm"] = step;
  trace["trust_radius"] = radius;
  trace["accepted"] = accepted;
  j["trace"] = std::move(trace);
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
  finish(out, path);
}

void write_controls_csv(const std::filesystem::path& path, const RMatrix& controls,
                        double dt) {
  std::ofstream out = open_out(path);
  out << "step,t";
  for (Eigen::Index k = 0; k < controls.rows(); ++k) out << ",f" << k;
  out << "\n";
  for (Eigen::Index j = 0; j < controls.cols(); ++j) {
    out << j << "," << static_cast<double>(j) * dt;
    for (Eigen::Index k = 0; k < controls.rows(); ++k) out << "," << controls(k, j);
    out << "\n";
  }
  finish(out, path);
}

void write_states_csv(const std::filesystem::path& path,
                      const std::vector<CVector>& states, double dt) {
  std::ofstream out = open_out(path);
  const Eigen::Index n = states.empty() ? 0 : states.front().size();
  out << "step,t";
  for (Eigen::Index p = 0; p < n; ++p) out << ",abs_a" << p;
  out << "\n";
  for (std::size_t j = 0; j < states.size(); ++j) {
    out << j << "," << static_cast<double>(j) * dt;
    for (Eigen::Index p = 0; p < n; ++p) out << "," << std::abs(states[j](p));
    out << "\n";
  }
  finish(out, path);
}

CheckReport grad_check(const SystemFile& system, const RunConfig& cfg,
                       std::uint64_t seed, double tol) {
  const Instance in = make_instance(system, cfg);
  const ParameterVector theta = draw_initial_theta(in.model->num_params(), seed);
  const FirstOrderResult adj = first_order_pass(in.sys, *in.model, theta, cfg.adjoint_options());
  const GradientResult fd = fd_gradient(in.sys, *in.model, theta);
  CheckReport r;
  r.tolerance = tol;
  r.max_rel_error = relative_inf_error(adj.grad, fd.grad);
  r.passed = r.max_rel_error <= tol;
  return r;
}

CheckReport hess_check(const SystemFile& system, const RunConfig& cfg,
                       std::uint64_t seed, double tol) {
  const Instance in = make_instance(system, cfg);
  const ParameterVector theta = draw_initial_theta(in.model->num_params(), seed);
  const AdjointOptions opts = cfg.adjoint_options();
  const SecondOrderResult adj = second_order_pass(in.sys, *in.model, theta, opts);
  const HessianResult fd = fd_hessian(in.sys, *in.model, theta, kFdHessianStep, opts);
  CheckReport r;
  r.tolerance = tol;
  r.max_rel_error = relative_inf_error(adj.hess, fd.hess);
  r.asymmetry = adj.asymmetry;
  r.passed = r.max_rel_error <= tol;
  return r;
}

std::string_view to_string(PassKind k) {
  return k == PassKind::kFirstOrder ? "first_order" : "second_order";
}

ScalingResult bench_scaling(const ScalingOptions& opts) {
  if (opts.trials < 3) throw std::invalid_argument("bench_scaling: trials must be >= 3");
  if (opts.dims.empty() || opts.steps.empty()) {
    throw std::invalid_argument("bench_scaling: empty N or J list");
  }
  ScalingResult result;
  for (const Eigen::Index n : opts.dims) {
    const SystemFile file =
        generate_synthetic(n, opts.channels, derive_seed(opts.seed, static_cast<std::uint64_t>(n)));
    for (const std::size_t steps : opts.steps) {
      const QuantumSystem sys = to_quantum_system(file, opts.rho, steps, opts.dt);
      const MaximalModel model(opts.channels, steps, opts.dt);
      const ParameterVector theta = draw_initial_theta(
          model.num_params(), derive_seed(opts.seed, static_cast<std::uint64_t>(n) * 100003u + steps));
      for (const PassKind kind : {PassKind::kFirstOrder, PassKind::kSecondOrder}) {
        if (kind == PassKind::kSecondOrder &&
            (!opts.second_order ||
             (opts.second_order_max_steps > 0 && steps > opts.second_order_max_steps))) {
          continue;
        }
        auto pass = [&] {
          if (kind == PassKind::kFirstOrder) {
            (void)first_order_pass(sys, model, theta, opts.adjoint);
          } else {
            (void)second_order_pass(sys, model, theta, opts.adjoint);
          }
        };
        pass();  // warm-up
        std::vector<double> times;
        for (std::size_t t = 0; t < opts.trials; ++t) {
          const auto t0 = std::chrono::steady_clock::now();
          pass();
          times.push_back(seconds_since(t0));
        }
        result.records.push_back({n, steps, kind, opts.trials, mean(times), stddev(times)});
      }
    }
  }
  for (const Eigen::Index n : opts.dims) {
    for (const PassKind kind : {PassKind::kFirstOrder, PassKind::kSecondOrder}) {
      std::vector<double> x, y;
      for (const BenchRecord& r : result.records) {
        if (r.dim == n && r.algorithm == kind) {
          x.push_back(std::log2(static_cast<double>(r.steps)));
          y.push_back(std::log2(r.mean_seconds));
        }
      }
      if (x.size() >= 2) result.slopes.push_back({n, kind, ols_slope(x, y)});
    }
  }
  return result;
}

void write_bench_csv(const std::filesystem::path& path,
                     const std::vector<BenchRecord>& records) {
  std::ofstream out = open_out(path);
  out << "N,J,algorithm,trials,mean_seconds,std_seconds\n";
  for (const BenchRecord& r : records) {
    out << r.dim << "," << r.steps << "," << to_string(r.algorithm) << "," << r.trials
        << "," << r.mean_seconds << "," << r.std_seconds << "\n";
  }
  finish(out, path);
}

std::string_view to_string(RatioMetric m) {
  switch (m) {
    case RatioMetric::kIterations: return "iterations";
    case RatioMetric::kWallTime: return "wall_s";
    case RatioMetric::kFinalCost: return "final_cost";
    case RatioMetric::kGradNorm: return "grad_norm";
    case RatioMetric::kTargetViolation: return "target_viol";
  }
  return "unknown";
}

namespace {

double metric_value(const TrialOutcome& o, RatioMetric m) {
  switch (m) {
    case RatioMetric::kIterations: return static_cast<double>(o.iterations);
    case RatioMetric::kWallTime: return o.wall_s;
    case RatioMetric::kFinalCost: return o.final_cost;
    case RatioMetric::kGradNorm: return o.grad_norm;
    case RatioMetric::kTargetViolation: return o.target_viol;
  }
  return 0.0;
}

TrialOutcome outcome(const OptimizationReport& r) {
  TrialOutcome o;
  o.iterations = r.iterations;
  o.wall_s = r.wall_time;
  o.final_cost = r.final_cost;
  o.grad_norm = r.final_grad_norm;
  o.target_viol = r.final_target_violation;
  o.termination = r.termination_reason;
  o.hessian_min_eig = r.final_hessian_min_eig;
  return o;
}

}  // namespace

double trial_ratio(const TrialRecord& t, RatioMetric m) {
  return metric_value(t.bfgs, m) / metric_value(t.newton, m);
}

StudyResult summarize(std::vector<TrialRecord> trials) {
  StudyResult s;
  s.trials = std::move(trials);
  if (s.trials.empty()) return s;
  for (const RatioMetric m : kRatioMetrics) {
    std::vector<double> ratios;
    for (const TrialRecord& t : s.trials) ratios.push_back(trial_ratio(t, m));
    s.ratios.push_back({m, mean(ratios), quantile(ratios, 0.05), quantile(ratios, 0.95)});
  }
  return s;
}

StudyResult study(const std::optional<SystemFile>& system, const RunConfig& cfg,
                  const StudyOptions& opts) {
  if (opts.num_trials < 1) throw std::invalid_argument("study: num_trials must be >= 1");
  cfg.validate();
  std::vector<TrialRecord> trials(opts.num_trials);
  std::mutex callback_mutex;
  const std::size_t workers = opts.workers == 0 ? default_worker_count() : opts.workers;
  parallel_for(opts.num_trials, workers, 1, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint64_t trial_seed = derive_seed(cfg.seed, i);
      const SystemFile file =
          system ? *system
                 : generate_synthetic(opts.synthetic_dim, opts.synthetic_channels, trial_seed);
      const Instance in = make_instance(file, cfg);
      const ParameterVector theta0 =
          draw_initial_theta(in.model->num_params(), derive_seed(trial_seed, 1));
      TrialRecord rec;
      rec.trial = i;
      rec.seed = trial_seed;
      rec.bfgs = outcome(run_optimization(file, cfg, OptimizerKind::kBfgs, theta0).report);
      rec.newton = outcome(run_optimization(file, cfg, OptimizerKind::kNewton, theta0).report);
      trials[i] = rec;
      if (opts.on_trial) {
        std::lock_guard<std::mutex> lock(callback_mutex);
        opts.on_trial(rec);
      }
    }
  });
  return summarize(std::move(trials));
}

void write_trials_csv(const std::filesystem::path& path,
                      const std::vector<TrialRecord>& trials) {
  std::ofstream out = open_out(path);
  out << "trial,algorithm,iterations,wall_s,final_cost,grad_norm,target_viol\n";
  for (const TrialRecord& t : trials) {
    for (const auto& [name, o] : {std::pair<const char*, const TrialOutcome&>{"bfgs", t.bfgs},
                                  {"newton", t.newton}}) {
      out << t.trial << "," << name << "," << o.iterations << "," << o.wall_s << ","
          << o.final_cost << "," << o.grad_norm << "," << o.target_viol << "\n";
    }
  }
  finish(out, path);
}

void write_study_json(const std::filesystem::path& path, const RunConfig& cfg,
                      const StudyResult& result) {
  json j;
  j["config"] = json::parse(dump_config(cfg));
  j["num_trials"] = result.trials.size();
  json summary = json::object();
  for (const RatioSummary& r : result.ratios) {
    summary[std::string(to_string(r.metric))] = {
        {"mean", nullable(r.mean)}, {"q05", nullable(r.q05)}, {"q95", nullable(r.q95)}};
  }
  j["ratio_summary"] = std::move(summary);
  json rows = json::array();
  for (const TrialRecord& t : result.trials) {
    json row;
    row["trial"] = t.trial;
    row["seed"] = t.seed;
    row["bfgs_termination"] = to_string(t.bfgs.termination);
    row["newton_termination"] = to_string(t.newton.termination);
    row["newton_hessian_min_eig"] =
        t.newton.hessian_min_eig ? nullable(*t.newton.hessian_min_eig) : json(nullptr);
    json ratios;
    for (const RatioMetric m : kRatioMetrics) {
      ratios[std::string(to_string(m))] = nullable(trial_ratio(t, m));
    }
    row["ratios"] = std::move(ratios);
    rows.push_back(std::move(row));
  }
  j["trials"] = std::move(rows);
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
  finish(out, path);
}

}  // namespace adjqoc::workbench
