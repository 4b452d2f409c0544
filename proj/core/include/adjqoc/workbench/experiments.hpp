#pragma once

// Experiment drivers behind the CLI: optimization runs, derivative checks,
// the scaling benchmark and the paired optimizer study. Output files:
//   results.json  controls.csv  states.csv  trials.csv  bench.csv

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "adjqoc/optimizer.hpp"
#include "adjqoc/workbench/run_config.hpp"
#include "adjqoc/workbench/system_file.hpp"

namespace adjqoc::workbench {

inline constexpr double kGradCheckTol = 1e-6;
inline constexpr double kHessCheckTol = 1e-5;

/// Cost, first-order and second-order evaluators for the given instance.
/// The references must outlive the returned problem.
SmoothProblem make_problem(const QuantumSystem& sys, const ControlModel& model,
                           const AdjointOptions& opts);

struct RunResult {
  OptimizationReport report;
  RMatrix controls;             ///< K x J at the final theta
  std::vector<CVector> states;  ///< a_0 .. a_J at the final theta
};

/// Draws theta0 from cfg.seed, optimizes with cfg.optimizer and, when
/// out_dir is set, writes results.json, controls.csv and states.csv there.
RunResult run_optimization(const SystemFile& system, const RunConfig& cfg,
                           const std::optional<std::filesystem::path>& out_dir = {});

/// Same, from an explicit starting point and optimizer.
RunResult run_optimization(const SystemFile& system, const RunConfig& cfg,
                           OptimizerKind kind, const ParameterVector& theta0);

void write_results_json(const std::filesystem::path& path,
                        const SystemFile& system, const RunConfig& cfg,
                        const OptimizationReport& report);
/// Columns: step, t, f0 [, f1, f2]. One row per step (J rows).
void write_controls_csv(const std::filesystem::path& path, const RMatrix& controls,
                        double dt);
/// Columns: step, t, abs_a0 .. abs_a{N-1}. J + 1 rows.
void write_states_csv(const std::filesystem::path& path,
                      const std::vector<CVector>& states, double dt);

struct CheckReport {
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  /// Hessian check only: asymmetry of the adjoint Hessian before
  /// symmetrization.
  double asymmetry = 0.0;
};

/// Adjoint gradient against central differences of the cost at a
/// standard-normal theta drawn from `seed`.
CheckReport grad_check(const SystemFile& system, const RunConfig& cfg,
                       std::uint64_t seed, double tol = kGradCheckTol);
/// Adjoint Hessian against central differences of the adjoint gradient.
CheckReport hess_check(const SystemFile& system, const RunConfig& cfg,
                       std::uint64_t seed, double tol = kHessCheckTol);

enum class PassKind { kFirstOrder, kSecondOrder };
std::string_view to_string(PassKind k);

struct BenchRecord {
  Eigen::Index dim = 0;
  std::size_t steps = 0;
  PassKind algorithm = PassKind::kFirstOrder;
  std::size_t trials = 0;
  double mean_seconds = 0.0;
  double std_seconds = 0.0;
};

struct ScalingSlope {
  Eigen::Index dim = 0;
  PassKind algorithm = PassKind::kFirstOrder;
  double slope = 0.0;  ///< OLS of log2(mean time) on log2(J)
};

struct ScalingResult {
  std::vector<BenchRecord> records;
  std::vector<ScalingSlope> slopes;
};

struct ScalingOptions {
  std::vector<Eigen::Index> dims{4, 16};
  std::vector<std::size_t> steps{4, 8, 16, 32, 64, 128, 256, 512, 1024};
  std::size_t trials = 3;
  std::uint64_t seed = 0;
  int channels = 1;
  double rho = 1e6;
  double dt = 0.1;
  bool second_order = true;
  /// Second-order passes are skipped above this J (0 means no limit).
  std::size_t second_order_max_steps = 0;
  AdjointOptions adjoint;
};

/// Times full first- (and optionally second-) order passes with the maximal
/// model: one untimed warm-up then `trials` timed repetitions per cell,
/// strictly sequentially. Requires trials >= 3.
ScalingResult bench_scaling(const ScalingOptions& opts);

/// Columns: N, J, algorithm, trials, mean_seconds, std_seconds.
void write_bench_csv(const std::filesystem::path& path,
                     const std::vector<BenchRecord>& records);

struct TrialOutcome {
  std::size_t iterations = 0;
  double wall_s = 0.0;
  double final_cost = 0.0;
  double grad_norm = 0.0;
  double target_viol = 0.0;
  TerminationReason termination = TerminationReason::kMaxIters;
  std::optional<double> hessian_min_eig;
};

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  TrialOutcome bfgs;
  TrialOutcome newton;
};

/// Ratio of the first-order (BFGS) value to the second-order (Newton) value.
enum class RatioMetric { kIterations, kWallTime, kFinalCost, kGradNorm, kTargetViolation };
inline constexpr RatioMetric kRatioMetrics[] = {
    RatioMetric::kIterations, RatioMetric::kWallTime, RatioMetric::kFinalCost,
    RatioMetric::kGradNorm, RatioMetric::kTargetViolation};
std::string_view to_string(RatioMetric m);
double trial_ratio(const TrialRecord& t, RatioMetric m);

struct RatioSummary {
  RatioMetric metric = RatioMetric::kIterations;
  double mean = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
};

struct StudyResult {
  std::vector<TrialRecord> trials;
  std::vector<RatioSummary> ratios;
};

struct StudyOptions {
  std::size_t num_trials = 20;
  /// Used when no system is supplied: a fresh synthetic instance per trial.
  Eigen::Index synthetic_dim = 4;
  int synthetic_channels = 1;
  /// Trials run concurrently on this many workers (0 means default).
  std::size_t workers = 1;
  /// Called after each trial completes (from the worker that ran it).
  std::function<void(const TrialRecord&)> on_trial;
};

/// Trial i uses seed s = derive_seed(cfg.seed, i) for the synthetic system and
/// derive_seed(s, 1) for theta0, then runs
/// both optimizers from it. Ratios are formed per trial before aggregation.
StudyResult study(const std::optional<SystemFile>& system, const RunConfig& cfg,
                  const StudyOptions& opts);

StudyResult summarize(std::vector<TrialRecord> trials);

/// Columns: trial, algorithm, iterations, wall_s, final_cost, grad_norm,
/// target_viol. Two rows per trial.
void write_trials_csv(const std::filesystem::path& path,
                      const std::vector<TrialRecord>& trials);
void write_study_json(const std::filesystem::path& path, const RunConfig& cfg,
                      const StudyResult& result);

}  // namespace adjqoc::workbench
