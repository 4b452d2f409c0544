// adjqoc: command-line workbench.
//
//   adjqoc gen-system    --dim 4 --channels 1 --seed 7 --out data/
//   adjqoc propagate     --system data/system.json --config run.json --out out/
//   adjqoc grad-check    --system data/system.json --config run.json --seed 3
//   adjqoc hess-check    --system data/system.json --config run.json --seed 3
//   adjqoc run           --system data/system.json --config run.json --out out/
//   adjqoc study         --config run.json --trials 20 --out out/
//   adjqoc bench-scaling --dims 4,16 --steps 4,8,16 --trials 3 --out out/
//
// Exit status: 0 on success, 1 when a check fails, 2 on bad input.

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adjqoc/adjoint.hpp"
#include "adjqoc/dynamics.hpp"
#include "adjqoc/workbench/experiments.hpp"
#include "adjqoc/workbench/run_config.hpp"
#include "adjqoc/workbench/synthetic.hpp"
#include "adjqoc/workbench/system_file.hpp"

namespace fs = std::filesystem;
using namespace adjqoc;
using namespace adjqoc::workbench;

namespace {

struct Common {
  std::string system;
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--system", c.system, "system file (JSON)");
  app->add_option("--config", c.config, "run config file (JSON)");
  app->add_option("--out", c.out, "output directory")->capture_default_str();
  app->add_option("--seed", c.seed, "random seed (overrides the config's)");
}

RunConfig config_of(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  return cfg;
}

SystemFile system_of(const Common& c) {
  if (c.system.empty()) throw std::invalid_argument("--system is required");
  return load_system(c.system);
}

int print_check(const char* what, const CheckReport& r, bool with_asymmetry) {
  std::cout << std::setprecision(6) << what << ": max relative error "
            << r.max_rel_error << " (tolerance " << r.tolerance << ")";
  if (with_asymmetry) std::cout << ", asymmetry " << r.asymmetry;
  std::cout << " -> " << (r.passed ? "PASS" : "FAIL") << "\n";
  return r.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adjoint-based quantum optimal control workbench"};
  app.require_subcommand(1);

  Common gen_c, prop_c, gc_c, hc_c, run_c, study_c, bench_c;

  auto* gen = app.add_subcommand("gen-system", "write a random synthetic system");
  add_common(gen, gen_c);
  Eigen::Index gen_dim = 4;
  int gen_channels = 1;
  gen->add_option("--dim", gen_dim, "state dimension N")->capture_default_str();
  gen->add_option("--channels", gen_channels, "control channels K")->capture_default_str();

  auto* prop = app.add_subcommand("propagate", "forward sweep from a random theta");
  add_common(prop, prop_c);

  auto* gc = app.add_subcommand("grad-check", "adjoint gradient vs finite differences");
  add_common(gc, gc_c);
  double gc_tol = kGradCheckTol;
  gc->add_option("--tol", gc_tol, "relative tolerance")->capture_default_str();

  auto* hc = app.add_subcommand("hess-check", "adjoint Hessian vs finite differences");
  add_common(hc, hc_c);
  double hc_tol = kHessCheckTol;
  hc->add_option("--tol", hc_tol, "relative tolerance")->capture_default_str();

  auto* run = app.add_subcommand("run", "optimize and write results");
  add_common(run, run_c);
  std::string run_optimizer;
  run->add_option("--optimizer", run_optimizer, "newton or bfgs (overrides the config)");

  auto* st = app.add_subcommand("study", "paired BFGS/Newton runs over seeds");
  add_common(st, study_c);
  StudyOptions study_opts;
  st->add_option("--trials", study_opts.num_trials, "number of trials")->capture_default_str();
  st->add_option("--dim", study_opts.synthetic_dim, "synthetic N when --system is absent")
      ->capture_default_str();
  st->add_option("--channels", study_opts.synthetic_channels,
                 "synthetic K when --system is absent")
      ->capture_default_str();
  st->add_option("--workers", study_opts.workers, "concurrent trials (0: default)")
      ->capture_default_str();

  auto* bench = app.add_subcommand("bench-scaling", "time full passes against J");
  add_common(bench, bench_c);
  ScalingOptions bench_opts;
  bench->add_option("--dims", bench_opts.dims, "state dimensions")->delimiter(',');
  bench->add_option("--steps", bench_opts.steps, "step counts J")->delimiter(',');
  bench->add_option("--trials", bench_opts.trials, "timed repetitions per cell")
      ->capture_default_str();
  bench->add_option("--channels", bench_opts.channels, "control channels K")
      ->capture_default_str();
  bool bench_first_only = false;
  bench->add_flag("--first-order-only", bench_first_only, "skip second-order passes");
  bench->add_option("--second-order-max-steps", bench_opts.second_order_max_steps,
                    "largest J for second-order passes (0: all)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const SystemFile s = generate_synthetic(gen_dim, gen_channels, gen_c.seed.value_or(0));
      fs::create_directories(gen_c.out);
      const fs::path path = fs::path(gen_c.out) / "system.json";
      save_system(s, path);
      std::cout << "wrote " << path.string() << "\n";
    } else if (*prop) {
      const RunConfig cfg = config_of(prop_c);
      const SystemFile file = system_of(prop_c);
      const QuantumSystem sys = to_quantum_system(file, cfg.rho, cfg.steps, cfg.dt);
      const auto model = make_control_model(cfg.model, sys.num_channels(), cfg.steps,
                                            cfg.dt, cfg.model_options());
      const ParameterVector theta = draw_initial_theta(model->num_params(), cfg.seed);
      PropagateOptions po;
      po.with_frechet = false;
      const TrajectoryCache cache = propagate(sys, *model, theta, po);
      double defect = 0.0;
      for (const CVector& a : cache.states) defect = std::max(defect, std::abs(a.norm() - 1.0));
      fs::create_directories(prop_c.out);
      write_controls_csv(fs::path(prop_c.out) / "controls.csv", cache.controls, cfg.dt);
      write_states_csv(fs::path(prop_c.out) / "states.csv", cache.states, cfg.dt);
      std::cout << std::setprecision(10) << "cost " << cost(sys, cache)
                << "\ntarget_violation " << target_violation(cache, sys.beta)
                << "\nmax_norm_defect " << defect << "\n";
    } else if (*gc) {
      const RunConfig cfg = config_of(gc_c);
      return print_check("gradient", grad_check(system_of(gc_c), cfg, cfg.seed, gc_tol),
                         false);
    } else if (*hc) {
      const RunConfig cfg = config_of(hc_c);
      return print_check("hessian", hess_check(system_of(hc_c), cfg, cfg.seed, hc_tol),
                         true);
    } else if (*run) {
      RunConfig cfg = config_of(run_c);
      if (!run_optimizer.empty()) cfg.optimizer = optimizer_from_string(run_optimizer);
      const RunResult r = run_optimization(system_of(run_c), cfg, fs::path(run_c.out));
      const OptimizationReport& rep = r.report;
      std::cout << std::setprecision(8) << rep.method << ": " << rep.iterations
                << " iterations, " << rep.wall_time << " s, "
                << to_string(rep.termination_reason) << "\n  final cost "
                << rep.final_cost << ", grad norm " << rep.final_grad_norm
                << ", target violation " << rep.final_target_violation << "\n";
      if (rep.final_hessian_min_eig) {
        std::cout << "  smallest Hessian eigenvalue " << *rep.final_hessian_min_eig << "\n";
      }
    } else if (*st) {
      const RunConfig cfg = config_of(study_c);
      std::optional<SystemFile> file;
      if (!study_c.system.empty()) file = load_system(study_c.system);
      study_opts.on_trial = [](const TrialRecord& t) {
        std::cout << "trial " << t.trial << ": iterations bfgs " << t.bfgs.iterations
                  << " newton " << t.newton.iterations << std::endl;
      };
      const StudyResult res = study(file, cfg, study_opts);
      fs::create_directories(study_c.out);
      write_trials_csv(fs::path(study_c.out) / "trials.csv", res.trials);
      write_study_json(fs::path(study_c.out) / "results.json", cfg, res);
      std::cout << "ratio (bfgs / newton)     mean        q05        q95\n";
      for (const RatioSummary& r : res.ratios) {
        std::cout << std::left << std::setw(22) << to_string(r.metric) << std::right
                  << std::setprecision(4) << std::setw(11) << r.mean << std::setw(11)
                  << r.q05 << std::setw(11) << r.q95 << "\n";
      }
    } else if (*bench) {
      if (!bench_c.config.empty()) {
        const RunConfig cfg = config_of(bench_c);
        bench_opts.rho = cfg.rho;
        bench_opts.dt = cfg.dt;
        bench_opts.adjoint = cfg.adjoint_options();
      }
      bench_opts.seed = bench_c.seed.value_or(0);
      bench_opts.second_order = !bench_first_only;
      const ScalingResult res = bench_scaling(bench_opts);
      fs::create_directories(bench_c.out);
      write_bench_csv(fs::path(bench_c.out) / "bench.csv", res.records);
      for (const ScalingSlope& s : res.slopes) {
        std::cout << "N=" << s.dim << " " << to_string(s.algorithm)
                  << " log-log slope " << std::setprecision(4) << s.slope << "\n";
      }
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
