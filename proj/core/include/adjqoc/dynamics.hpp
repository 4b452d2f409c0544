#pragma once

// Forward propagation of the discrete Schrodinger system
//   Z_j = -i (H0 + sum_k f^k_j M_k) dt,   a_{j+1} = exp(Z_j) a_j,
// and the discrete cost
//   C(theta) = 1/2 sum_{k,j} (f^k_j)^2 + rho/2 |a_J - beta|^2.

#include <cstddef>
#include <vector>

#include "adjqoc/control_model.hpp"
#include "adjqoc/spectral.hpp"
#include "adjqoc/types.hpp"

namespace adjqoc {

/// Tolerance on |alpha| and |beta| being 1.
inline constexpr double kNormTol = 1e-10;

/// One problem instance. Build through make_system so the invariants hold.
struct QuantumSystem {
  HermitianMatrix h0;
  std::vector<HermitianMatrix> dipoles;  ///< one per control channel
  CVector alpha;
  CVector beta;
  double rho = 1.0;
  std::size_t steps = 1;  ///< J
  double dt = 0.1;

  Eigen::Index dim() const noexcept { return h0.dim(); }
  int num_channels() const noexcept {
    return static_cast<int>(dipoles.size());
  }
};

/// Validates and assembles a QuantumSystem. Throws std::invalid_argument on
/// dimension mismatch, non-unit alpha/beta, rho < 0, dt <= 0, J == 0, or a
/// channel count outside 1..3.
QuantumSystem make_system(HermitianMatrix h0,
                          std::vector<HermitianMatrix> dipoles, CVector alpha,
                          CVector beta, double rho, std::size_t steps,
                          double dt);

/// Throws std::invalid_argument if the model's (K, J, dt) disagree with the
/// system's.
void check_compatible(const QuantumSystem& sys, const ControlModel& model);

struct PropagateOptions {
  /// Also compute frechet_m (needed by gradients, not by the cost).
  bool with_frechet = true;
  /// Workers for the per-step spectral work; 0 means default_worker_count().
  std::size_t workers = 1;
};

/// Everything one forward pass produces. Immutable after propagate returns.
struct TrajectoryCache {
  RMatrix controls;                    ///< K x J, f^k_j
  std::vector<SpectralFactor> factors;  ///< J
  std::vector<CMatrix> propagators;     ///< J, exp(Z_j)
  std::vector<CVector> states;          ///< J+1, a_0 .. a_J
  /// frechet_m[j][k] = d exp(Z)/dZ at Z_j applied to M_k. Empty when
  /// propagated without Frechet data.
  std::vector<std::vector<CMatrix>> frechet_m;

  std::size_t steps() const noexcept { return factors.size(); }
  const CVector& final_state() const { return states.back(); }
};

/// H_j = H0 + sum_k f^k_j(theta) M_k.
HermitianMatrix build_generator(const QuantumSystem& sys,
                                const ControlModel& model,
                                const ParameterVector& theta, std::size_t j);

/// Same as build_generator with control values already evaluated.
HermitianMatrix build_generator(const QuantumSystem& sys,
                                const Eigen::Ref<const RVector>& f);

/// Forward sweep. Eigensolver failure raises SpectralError carrying j.
TrajectoryCache propagate(const QuantumSystem& sys, const ControlModel& model,
                          const ParameterVector& theta,
                          const PropagateOptions& opts = {});

/// Cost from a cache built with the same (sys, model, theta).
double cost(const QuantumSystem& sys, const TrajectoryCache& cache);

/// Cost without keeping a cache around.
double evaluate_cost(const QuantumSystem& sys, const ControlModel& model,
                     const ParameterVector& theta);

/// |a_J - beta|_2.
double target_violation(const TrajectoryCache& cache, const CVector& beta);

/// 1/2 sum_{k,j} (f^k_j)^2.
double control_energy(const RMatrix& controls);

}  // namespace adjqoc
