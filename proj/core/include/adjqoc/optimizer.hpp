#pragma once

// Trust-region minimization with either exact Hessians (Newton) or a damped
// BFGS approximation built from gradient differences. Both paths share the
// same acceptance test, radius schedule and termination checks so their
// iteration counts are comparable.

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "adjqoc/trust_region.hpp"
#include "adjqoc/types.hpp"

namespace adjqoc {

struct TerminationCriteria {
  double step_tol = 1e-10;  ///< delta
  double grad_tol = 1e-10;  ///< epsilon
  std::size_t max_iters = 10000;

  /// Throws std::invalid_argument unless delta > 0, epsilon > 0, max_iters >= 1.
  void validate() const;
};

struct TrustRegionConfig {
  double initial_radius = 1.0;
  double max_radius = 1e8;
  double expand_factor = 2.0;
  double shrink_factor = 0.25;
  double accept_ratio = 1e-4;
  double expand_ratio = 0.75;
  double shrink_ratio = 0.25;
  double bfgs_damping = 0.2;  ///< Powell damping threshold
  /// Rescale B = I to (y^T y / |y^T s|) I just before the first BFGS update.
  bool bfgs_auto_scale = true;
  SubproblemSolver subproblem = SubproblemSolver::kExact;
  /// Newton only: compare the Hessian at theta0 with differences of the
  /// gradient before iterating; throws if they disagree.
  bool check_hessian = false;

  void validate() const;
};

enum class TerminationReason { kStepTol, kGradTol, kMaxIters };

std::string_view to_string(TerminationReason r);
TerminationReason termination_reason_from_string(std::string_view s);

struct IterationRecord {
  double cost = 0.0;       ///< at the iterate after this iteration
  double grad_norm = 0.0;  ///< at the iterate after this iteration
  double step_norm = 0.0;  ///< trial step, accepted or not
  double trust_radius = 0.0;  ///< radius the trial step was computed with
  bool accepted = false;
};

struct OptimizationReport {
  std::string method;  ///< "newton" or "bfgs"
  std::size_t iterations = 0;
  double wall_time = 0.0;  ///< seconds
  std::vector<IterationRecord> trace;
  RVector final_theta;
  TerminationReason termination_reason = TerminationReason::kMaxIters;
  double final_cost = 0.0;
  double final_grad_norm = 0.0;
  /// Filled by callers that know the target; NaN otherwise.
  double final_target_violation = std::numeric_limits<double>::quiet_NaN();
  /// Newton path only.
  std::optional<double> final_hessian_min_eig;
};

/// Cost, gradient and (optionally) Hessian at one point.
struct Evaluation {
  double cost = 0.0;
  RVector grad;
  RMatrix hess;  ///< empty unless requested
};

struct SmoothProblem {
  std::function<double(const RVector&)> cost;
  std::function<Evaluation(const RVector&)> gradient;
  std::function<Evaluation(const RVector&)> hessian;  ///< Newton path only
};

/// Raised on evaluator failure or a non-finite cost; carries the iteration.
class OptimizerError : public std::runtime_error {
 public:
  OptimizerError(const std::string& what, std::size_t iteration);
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

OptimizationReport newton_trust_region(const SmoothProblem& problem,
                                       const RVector& theta0,
                                       const TerminationCriteria& criteria,
                                       const TrustRegionConfig& config = {});

OptimizationReport bfgs_baseline(const SmoothProblem& problem,
                                 const RVector& theta0,
                                 const TerminationCriteria& criteria,
                                 const TrustRegionConfig& config = {});

/// Powell-damped BFGS update of a Hessian approximation B given step s and
/// gradient change y. Leaves B unchanged when s^T B s is not positive.
void damped_bfgs_update(RMatrix& b, const RVector& s, const RVector& y,
                        double damping = 0.2);

}  // namespace adjqoc
