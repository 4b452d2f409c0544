#pragma once

// First- and second-order adjoint derivatives of the discrete cost.
//
// With w_jk = i dt F_jk a_j and v_jk = (i dt F_jk)^dagger lambda_{j+1}, where
// F_jk = dexp(Z_j)/dZ . M_k, the recursions implemented here are
//
//   lambda_J = rho (a_J - beta),     lambda_j = exp(Z_j)^dagger lambda_{j+1}
//   dL/dtheta_l = sum_{jk} (f^k_j - Re lambda_{j+1}^dagger w_jk) df^k_j/dtheta_l
//   da_0 = 0,                         da_{j+1} = exp(Z_j) da_j - sum_k w_jk df^k_j
//   mu_J = rho da_J,                  mu_j = exp(Z_j)^dagger mu_{j+1} - sum_k v_jk df^k_j
//
// and the Hessian sums the control-curvature, mu-coupling, second-Frechet,
// first-Frechet-against-d2f and first-Frechet-against-da terms.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "adjqoc/control_model.hpp"
#include "adjqoc/dynamics.hpp"
#include "adjqoc/types.hpp"

namespace adjqoc {

inline constexpr std::uint64_t kDefaultMemoryBudget = 4ull << 30;  // 4 GiB

/// Raised when the sensitivity storage of a Hessian pass would exceed the
/// configured budget.
class MemoryBudgetError : public std::runtime_error {
 public:
  MemoryBudgetError(std::uint64_t required, std::uint64_t budget);
  std::uint64_t required() const noexcept { return required_; }
  std::uint64_t budget() const noexcept { return budget_; }

 private:
  std::uint64_t required_;
  std::uint64_t budget_;
};

struct AdjointOptions {
  /// Parameter columns per batch in the sensitivity and mu sweeps; 0 means
  /// all N_p columns in one batch.
  std::size_t batch_width = 0;
  /// Worker threads splitting the batches; 0 means default_worker_count().
  std::size_t workers = 1;
  std::uint64_t memory_budget = kDefaultMemoryBudget;
};

/// Costates lambda_1 .. lambda_J.
struct CostateTrajectory {
  std::vector<CVector> lambdas;  ///< lambdas[j-1] holds lambda_j

  std::size_t steps() const noexcept { return lambdas.size(); }
  /// lambda_j for 1 <= j <= J.
  const CVector& at(std::size_t j) const { return lambdas.at(j - 1); }
};

/// Per-parameter state sensitivities and second-order costates. Column l of
/// da[j] is d a_j / d theta_l (j = 0..J); column l of mu[j-1] is mu_{j,l}
/// (j = 1..J).
struct SensitivityBlock {
  std::vector<CMatrix> da;
  std::vector<CMatrix> mu;

  const CMatrix& mu_at(std::size_t j) const { return mu.at(j - 1); }
};

struct GradientResult {
  RVector grad;
};

struct HessianResult {
  RMatrix hess;  ///< symmetrized
  /// max|H - H^T| / max|H| of the assembled matrix before symmetrization.
  double asymmetry = 0.0;
};

/// Bytes of da and mu storage for a Hessian pass.
std::uint64_t sensitivity_bytes(Eigen::Index dim, std::size_t steps,
                                Eigen::Index num_params);

CostateTrajectory costate_sweep(const QuantumSystem& sys,
                                const TrajectoryCache& cache);

GradientResult gradient(const QuantumSystem& sys, const ControlModel& model,
                        const ParameterVector& theta,
                        const TrajectoryCache& cache,
                        const CostateTrajectory& costates);

/// Returns da[0..J]. Throws MemoryBudgetError before allocating if the full
/// da + mu footprint exceeds opts.memory_budget.
std::vector<CMatrix> sensitivity_sweep(const QuantumSystem& sys,
                                       const ControlModel& model,
                                       const ParameterVector& theta,
                                       const TrajectoryCache& cache,
                                       const AdjointOptions& opts = {});

/// Returns mu[0..J-1] (mu_1 .. mu_J).
std::vector<CMatrix> mu_sweep(const QuantumSystem& sys,
                              const ControlModel& model,
                              const ParameterVector& theta,
                              const TrajectoryCache& cache,
                              const CostateTrajectory& costates,
                              const std::vector<CMatrix>& da,
                              const AdjointOptions& opts = {});

HessianResult hessian(const QuantumSystem& sys, const ControlModel& model,
                      const ParameterVector& theta,
                      const TrajectoryCache& cache,
                      const CostateTrajectory& costates,
                      const SensitivityBlock& sens);

/// One full cost + gradient pass.
struct FirstOrderResult {
  double cost = 0.0;
  RVector grad;
};

/// One full cost + gradient + Hessian pass.
struct SecondOrderResult {
  double cost = 0.0;
  RVector grad;
  RMatrix hess;
  double asymmetry = 0.0;
};

FirstOrderResult first_order_pass(const QuantumSystem& sys,
                                  const ControlModel& model,
                                  const ParameterVector& theta,
                                  const AdjointOptions& opts = {});

SecondOrderResult second_order_pass(const QuantumSystem& sys,
                                    const ControlModel& model,
                                    const ParameterVector& theta,
                                    const AdjointOptions& opts = {});

// ---------------------------------------------------------------------------
// Finite-difference references.

inline constexpr double kFdGradientStep = 1e-5;
inline constexpr double kFdHessianStep = 1e-4;

/// Central-difference step for coordinate value x: h*(1+|x|) rounded to the
/// nearest power of two so that x +/- step is exactly representable.
double fd_step(double h, double x);

/// Central differences of the cost.
GradientResult fd_gradient(const QuantumSystem& sys, const ControlModel& model,
                           const ParameterVector& theta,
                           double h = kFdGradientStep);

/// Central differences of the adjoint gradient, symmetrized; `asymmetry`
/// reports the defect before symmetrization.
HessianResult fd_hessian(const QuantumSystem& sys, const ControlModel& model,
                         const ParameterVector& theta,
                         double h = kFdHessianStep,
                         const AdjointOptions& opts = {});

/// max|a - b| / max(max|b|, floor). The floor keeps the ratio finite when the
/// reference is identically zero.
double relative_inf_error(const Eigen::Ref<const RMatrix>& a,
                          const Eigen::Ref<const RMatrix>& b,
                          double floor = 1e-300);

}  // namespace adjqoc
