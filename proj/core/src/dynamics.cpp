#include "adjqoc/dynamics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "adjqoc/parallel.hpp"

namespace adjqoc {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("QuantumSystem: " + msg);
}

RMatrix evaluate_controls(const ControlModel& model,
                          const ParameterVector& theta) {
  const int nk = model.num_channels();
  const std::size_t nj = model.num_steps();
  RMatrix f(nk, static_cast<Eigen::Index>(nj));
  for (int k = 0; k < nk; ++k)
    for (std::size_t j = 0; j < nj; ++j)
      f(k, static_cast<Eigen::Index>(j)) = model.value(theta, j, k);
  return f;
}

}  // namespace

QuantumSystem make_system(HermitianMatrix h0,
                          std::vector<HermitianMatrix> dipoles, CVector alpha,
                          CVector beta, double rho, std::size_t steps,
                          double dt) {
  const Eigen::Index n = h0.dim();
  require(n >= 1, "dimension must be positive");
  require(!dipoles.empty() && dipoles.size() <= 3,
          "need between 1 and 3 dipole matrices");
  for (const auto& m : dipoles) {
    require(m.dim() == n, "dipole dimension differs from H0");
  }
  require(alpha.size() == n && beta.size() == n,
          "state dimension differs from H0");
  require(std::abs(alpha.norm() - 1.0) <= kNormTol,
          "initial state alpha is not unit norm");
  require(std::abs(beta.norm() - 1.0) <= kNormTol,
          "target state beta is not unit norm");
  require(std::isfinite(rho) && rho >= 0.0, "rho must be finite and >= 0");
  require(steps >= 1, "J must be positive");
  require(std::isfinite(dt) && dt > 0.0, "dt must be positive");

  QuantumSystem sys;
  sys.h0 = std::move(h0);
  sys.dipoles = std::move(dipoles);
  sys.alpha = std::move(alpha);
  sys.beta = std::move(beta);
  sys.rho = rho;
  sys.steps = steps;
  sys.dt = dt;
  return sys;
}

void check_compatible(const QuantumSystem& sys, const ControlModel& model) {
  if (model.num_channels() != sys.num_channels() ||
      model.num_steps() != sys.steps || model.dt() != sys.dt) {
    std::ostringstream os;
    os << "control model (K=" << model.num_channels()
       << ", J=" << model.num_steps() << ", dt=" << model.dt()
       << ") does not match system (K=" << sys.num_channels()
       << ", J=" << sys.steps << ", dt=" << sys.dt << ")";
    throw std::invalid_argument(os.str());
  }
}

HermitianMatrix build_generator(const QuantumSystem& sys,
                                const Eigen::Ref<const RVector>& f) {
  CMatrix h = sys.h0.matrix();
  for (int k = 0; k < sys.num_channels(); ++k) {
    h += f(k) * sys.dipoles[static_cast<std::size_t>(k)].matrix();
  }
  return HermitianMatrix(std::move(h));
}

HermitianMatrix build_generator(const QuantumSystem& sys,
                                const ControlModel& model,
                                const ParameterVector& theta, std::size_t j) {
  RVector f(sys.num_channels());
  for (int k = 0; k < sys.num_channels(); ++k) f(k) = model.value(theta, j, k);
  return build_generator(sys, f);
}

TrajectoryCache propagate(const QuantumSystem& sys, const ControlModel& model,
                          const ParameterVector& theta,
                          const PropagateOptions& opts) {
  check_compatible(sys, model);
  require_finite(theta, "propagate");
  const std::size_t nj = sys.steps;
  const int nk = sys.num_channels();

  TrajectoryCache cache;
  cache.controls = evaluate_controls(model, theta);
  cache.factors.resize(nj);
  cache.propagators.resize(nj);
  if (opts.with_frechet) cache.frechet_m.resize(nj);

  // Spectral work depends only on the controls, so steps are independent.
  const std::size_t workers =
      opts.workers == 0 ? default_worker_count() : opts.workers;
  parallel_for(nj, workers, 0, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const auto col = static_cast<Eigen::Index>(j);
      SpectralFactor sf = decompose(
          build_generator(sys, cache.controls.col(col)), sys.dt, j);
      cache.propagators[j] = step_propagator(sf);
      if (opts.with_frechet) {
        auto& fm = cache.frechet_m[j];
        fm.reserve(static_cast<std::size_t>(nk));
        for (int k = 0; k < nk; ++k) {
          fm.push_back(
              frechet_first(sf, sys.dipoles[static_cast<std::size_t>(k)]));
        }
      }
      cache.factors[j] = std::move(sf);
    }
  });

  cache.states.resize(nj + 1);
  cache.states[0] = sys.alpha;
  for (std::size_t j = 0; j < nj; ++j) {
    cache.states[j + 1] = cache.propagators[j] * cache.states[j];
  }
  return cache;
}

double control_energy(const RMatrix& controls) {
  return 0.5 * controls.squaredNorm();
}

double cost(const QuantumSystem& sys, const TrajectoryCache& cache) {
  return control_energy(cache.controls) +
         0.5 * sys.rho * (cache.final_state() - sys.beta).squaredNorm();
}

double evaluate_cost(const QuantumSystem& sys, const ControlModel& model,
                     const ParameterVector& theta) {
  return cost(sys, propagate(sys, model, theta, {.with_frechet = false}));
}

double target_violation(const TrajectoryCache& cache, const CVector& beta) {
  return (cache.final_state() - beta).norm();
}

}  // namespace adjqoc
