#include "adjqoc/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "adjqoc/parallel.hpp"

namespace adjqoc {

namespace {

// Control derivatives and Frechet-contracted vectors for every (j, k),
// indexed j*K + k.
struct StepTerms {
  int channels = 0;
  std::vector<SparseGradient> jac;
  std::vector<SparseHessian> hess;  // empty when the model is linear
  std::vector<CVector> w;           // i dt F_jk a_j
  std::vector<CVector> v;           // (i dt F_jk)^dagger lambda_{j+1}
  RMatrix g;                        // K x J, -Re lambda_{j+1}^dagger w_jk

  std::size_t at(std::size_t j, int k) const {
    return j * static_cast<std::size_t>(channels) + static_cast<std::size_t>(k);
  }
};

void require_frechet(const TrajectoryCache& cache) {
  if (cache.frechet_m.size() != cache.steps()) {
    throw std::invalid_argument(
        "adjoint: trajectory cache was built without Frechet data");
  }
}

StepTerms build_terms(const QuantumSystem& sys, const ControlModel& model,
                      const ParameterVector& theta,
                      const TrajectoryCache& cache,
                      const CostateTrajectory* costates, bool want_v,
                      bool want_hess) {
  require_frechet(cache);
  const std::size_t nj = sys.steps;
  const int nk = sys.num_channels();
  const Complex idt(0.0, sys.dt);

  StepTerms t;
  t.channels = nk;
  const std::size_t count = nj * static_cast<std::size_t>(nk);
  t.jac.resize(count);
  t.w.resize(count);
  if (want_v) t.v.resize(count);
  if (want_hess && !model.is_linear()) t.hess.resize(count);
  t.g = RMatrix::Zero(nk, static_cast<Eigen::Index>(nj));

  for (std::size_t j = 0; j < nj; ++j) {
    for (int k = 0; k < nk; ++k) {
      const std::size_t i = t.at(j, k);
      const CMatrix& fm = cache.frechet_m[j][static_cast<std::size_t>(k)];
      t.jac[i] = model.jacobian(theta, j, k);
      if (!t.hess.empty()) t.hess[i] = model.hessian(theta, j, k);
      t.w[i] = idt * (fm * cache.states[j]);
      if (costates != nullptr) {
        const CVector& lam = costates->at(j + 1);
        t.g(k, static_cast<Eigen::Index>(j)) = -lam.dot(t.w[i]).real();
        if (want_v) t.v[i] = std::conj(idt) * (fm.adjoint() * lam);
      }
    }
  }
  return t;
}

// Splits [0, np) into batches and runs `fn(begin, end)` on workers.
void for_each_batch(Eigen::Index np, const AdjointOptions& opts,
                    const std::function<void(Eigen::Index, Eigen::Index)>& fn) {
  const std::size_t workers =
      opts.workers == 0 ? default_worker_count() : opts.workers;
  parallel_for(static_cast<std::size_t>(np), workers, opts.batch_width,
               [&](std::size_t b, std::size_t e) {
                 fn(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(e));
               });
}

void check_budget(const QuantumSystem& sys, const ControlModel& model,
                  const AdjointOptions& opts) {
  const std::uint64_t need =
      sensitivity_bytes(sys.dim(), sys.steps, model.num_params());
  if (need > opts.memory_budget) throw MemoryBudgetError(need, opts.memory_budget);
}

std::vector<CMatrix> sweep_da(const QuantumSystem& sys, const ControlModel& model,
                              const TrajectoryCache& cache,
                              const StepTerms& terms,
                              const AdjointOptions& opts) {
  const std::size_t nj = sys.steps;
  const Eigen::Index n = sys.dim();
  const Eigen::Index np = model.num_params();
  std::vector<CMatrix> da(nj + 1, CMatrix::Zero(n, np));
  for_each_batch(np, opts, [&](Eigen::Index b, Eigen::Index e) {
    const Eigen::Index width = e - b;
    for (std::size_t j = 0; j < nj; ++j) {
      da[j + 1].middleCols(b, width).noalias() =
          cache.propagators[j] * da[j].middleCols(b, width);
      for (int k = 0; k < terms.channels; ++k) {
        const std::size_t i = terms.at(j, k);
        for (const auto& [l, c] : terms.jac[i]) {
          if (l >= b && l < e) da[j + 1].col(l) -= c * terms.w[i];
        }
      }
    }
  });
  return da;
}

std::vector<CMatrix> sweep_mu(const QuantumSystem& sys, const ControlModel& model,
                              const TrajectoryCache& cache,
                              const StepTerms& terms,
                              const std::vector<CMatrix>& da,
                              const AdjointOptions& opts) {
  const std::size_t nj = sys.steps;
  const Eigen::Index n = sys.dim();
  const Eigen::Index np = model.num_params();
  if (da.size() != nj + 1) {
    throw std::invalid_argument("mu_sweep: sensitivity history has wrong length");
  }
  std::vector<CMatrix> mu(nj, CMatrix::Zero(n, np));
  for_each_batch(np, opts, [&](Eigen::Index b, Eigen::Index e) {
    const Eigen::Index width = e - b;
    mu[nj - 1].middleCols(b, width) = sys.rho * da[nj].middleCols(b, width);
    // mu[j-1] holds mu_j; step j uses exp(Z_j) and lambda_{j+1}.
    for (std::size_t j = nj - 1; j >= 1; --j) {
      mu[j - 1].middleCols(b, width).noalias() =
          cache.propagators[j].adjoint() * mu[j].middleCols(b, width);
      for (int k = 0; k < terms.channels; ++k) {
        const std::size_t i = terms.at(j, k);
        for (const auto& [l, c] : terms.jac[i]) {
          if (l >= b && l < e) mu[j - 1].col(l) -= c * terms.v[i];
        }
      }
    }
  });
  return mu;
}

RVector assemble_gradient(const ControlModel& model, const TrajectoryCache& cache,
                          const StepTerms& terms) {
  RVector grad = RVector::Zero(model.num_params());
  const std::size_t nj = cache.steps();
  for (std::size_t j = 0; j < nj; ++j) {
    for (int k = 0; k < terms.channels; ++k) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double coeff = cache.controls(k, jj) + terms.g(k, jj);
      for (const auto& [l, c] : terms.jac[terms.at(j, k)]) grad(l) += coeff * c;
    }
  }
  return grad;
}

}  // namespace

MemoryBudgetError::MemoryBudgetError(std::uint64_t required,
                                     std::uint64_t budget)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "Hessian pass needs " << required
           << " bytes of sensitivity storage, over the budget of " << budget
           << " bytes";
        return os.str();
      }()),
      required_(required),
      budget_(budget) {}

std::uint64_t sensitivity_bytes(Eigen::Index dim, std::size_t steps,
                                Eigen::Index num_params) {
  // da_0..da_J plus mu_1..mu_J, each N x N_p complex doubles.
  return static_cast<std::uint64_t>(2 * steps + 1) *
         static_cast<std::uint64_t>(dim) *
         static_cast<std::uint64_t>(num_params) * sizeof(Complex);
}

CostateTrajectory costate_sweep(const QuantumSystem& sys,
                                const TrajectoryCache& cache) {
  const std::size_t nj = cache.steps();
  CostateTrajectory out;
  out.lambdas.resize(nj);
  out.lambdas[nj - 1] = sys.rho * (cache.final_state() - sys.beta);
  for (std::size_t j = nj - 1; j >= 1; --j) {
    out.lambdas[j - 1] = cache.propagators[j].adjoint() * out.lambdas[j];
  }
  return out;
}

GradientResult gradient(const QuantumSystem& sys, const ControlModel& model,
                        const ParameterVector& theta,
                        const TrajectoryCache& cache,
                        const CostateTrajectory& costates) {
  const StepTerms terms =
      build_terms(sys, model, theta, cache, &costates, false, false);
  return {assemble_gradient(model, cache, terms)};
}

std::vector<CMatrix> sensitivity_sweep(const QuantumSystem& sys,
                                       const ControlModel& model,
                                       const ParameterVector& theta,
                                       const TrajectoryCache& cache,
                                       const AdjointOptions& opts) {
  check_budget(sys, model, opts);
  const StepTerms terms =
      build_terms(sys, model, theta, cache, nullptr, false, false);
  return sweep_da(sys, model, cache, terms, opts);
}

std::vector<CMatrix> mu_sweep(const QuantumSystem& sys,
                              const ControlModel& model,
                              const ParameterVector& theta,
                              const TrajectoryCache& cache,
                              const CostateTrajectory& costates,
                              const std::vector<CMatrix>& da,
                              const AdjointOptions& opts) {
  const StepTerms terms =
      build_terms(sys, model, theta, cache, &costates, true, false);
  return sweep_mu(sys, model, cache, terms, da, opts);
}

namespace {

HessianResult assemble_hessian(const QuantumSystem& sys,
                               const ControlModel& model,
                               const TrajectoryCache& cache,
                               const CostateTrajectory& costates,
                               const StepTerms& terms,
                               const SensitivityBlock& sens) {
  const std::size_t nj = sys.steps;
  const int nk = sys.num_channels();
  const Eigen::Index np = model.num_params();
  const double dt2 = sys.dt * sys.dt;

  RMatrix h = RMatrix::Zero(np, np);
  // Rows of the mu- and da-coupling terms, accumulated as columns of h^T.
  RMatrix coupling_t = RMatrix::Zero(np, np);

  std::vector<CMatrix> dipole_eig(static_cast<std::size_t>(nk));
  RMatrix frechet2(nk, nk);

  for (std::size_t j = 0; j < nj; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const CVector& lam = costates.at(j + 1);
    const bool lam_zero = lam.squaredNorm() == 0.0;

    // Second-Frechet coefficients -dt^2 Re lambda^dagger d2exp(M_k, M_n) a.
    frechet2.setZero();
    if (!lam_zero) {
      const SpectralFactor& sf = cache.factors[j];
      for (int k = 0; k < nk; ++k) {
        dipole_eig[static_cast<std::size_t>(k)] =
            sf.to_eigenbasis(sys.dipoles[static_cast<std::size_t>(k)]);
      }
      const CVector lam_t = sf.eigenvectors().adjoint() * lam;
      const CVector a_t = sf.eigenvectors().adjoint() * cache.states[j];
      for (int k = 0; k < nk; ++k) {
        for (int n = k; n < nk; ++n) {
          const double s =
              -dt2 * frechet_second_form(sf, lam_t,
                                         dipole_eig[static_cast<std::size_t>(k)],
                                         dipole_eig[static_cast<std::size_t>(n)],
                                         a_t)
                         .real();
          frechet2(k, n) = s;
          frechet2(n, k) = s;
        }
      }
    }

    for (int k = 0; k < nk; ++k) {
      const std::size_t ik = terms.at(j, k);
      const SparseGradient& jk = terms.jac[ik];
      if (jk.empty()) continue;

      // Control curvature plus second-Frechet, both bilinear in the jacobians.
      for (int n = 0; n < nk; ++n) {
        const double scale = (n == k ? 1.0 : 0.0) + frechet2(k, n);
        if (scale == 0.0) continue;
        for (const auto& [l, c] : jk) {
          for (const auto& [m, d] : terms.jac[terms.at(j, n)]) {
            h(l, m) += scale * c * d;
          }
        }
      }

      // -Re mu_{j+1,m}^dagger w_jk - Re v_jk^dagger da_{j,m}
      RVector row = -(sens.mu_at(j + 1).adjoint() * terms.w[ik]).real();
      if (!lam_zero) {
        row.noalias() -= (sens.da[j].adjoint() * terms.v[ik]).real();
      }
      for (const auto& [l, c] : jk) coupling_t.col(l) += c * row;
    }

    if (!terms.hess.empty()) {
      for (int k = 0; k < nk; ++k) {
        const double coeff = cache.controls(k, jj) + terms.g(k, jj);
        for (const auto& e : terms.hess[terms.at(j, k)]) {
          h(e.row, e.col) += coeff * e.value;
        }
      }
    }
  }

  h += coupling_t.transpose();

  HessianResult out;
  const double scale = h.cwiseAbs().maxCoeff();
  out.asymmetry =
      scale > 0.0 ? (h - h.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
  out.hess = 0.5 * (h + h.transpose());
  return out;
}

}  // namespace

HessianResult hessian(const QuantumSystem& sys, const ControlModel& model,
                      const ParameterVector& theta,
                      const TrajectoryCache& cache,
                      const CostateTrajectory& costates,
                      const SensitivityBlock& sens) {
  if (sens.da.size() != sys.steps + 1 || sens.mu.size() != sys.steps) {
    throw std::invalid_argument("hessian: sensitivity block has wrong length");
  }
  const StepTerms terms =
      build_terms(sys, model, theta, cache, &costates, true, true);
  return assemble_hessian(sys, model, cache, costates, terms, sens);
}

FirstOrderResult first_order_pass(const QuantumSystem& sys,
                                  const ControlModel& model,
                                  const ParameterVector& theta,
                                  const AdjointOptions& opts) {
  const TrajectoryCache cache =
      propagate(sys, model, theta, {.with_frechet = true, .workers = opts.workers});
  const CostateTrajectory lam = costate_sweep(sys, cache);
  const StepTerms terms = build_terms(sys, model, theta, cache, &lam, false, false);
  return {cost(sys, cache), assemble_gradient(model, cache, terms)};
}

SecondOrderResult second_order_pass(const QuantumSystem& sys,
                                    const ControlModel& model,
                                    const ParameterVector& theta,
                                    const AdjointOptions& opts) {
  check_budget(sys, model, opts);
  const TrajectoryCache cache =
      propagate(sys, model, theta, {.with_frechet = true, .workers = opts.workers});
  const CostateTrajectory lam = costate_sweep(sys, cache);
  const StepTerms terms = build_terms(sys, model, theta, cache, &lam, true, true);
  SensitivityBlock sens;
  sens.da = sweep_da(sys, model, cache, terms, opts);
  sens.mu = sweep_mu(sys, model, cache, terms, sens.da, opts);
  HessianResult h = assemble_hessian(sys, model, cache, lam, terms, sens);

  SecondOrderResult out;
  out.cost = cost(sys, cache);
  out.grad = assemble_gradient(model, cache, terms);
  out.hess = std::move(h.hess);
  out.asymmetry = h.asymmetry;
  return out;
}

// ---------------------------------------------------------------------------

double fd_step(double h, double x) {
  const double raw = h * (1.0 + std::abs(x));
  return std::exp2(std::round(std::log2(raw)));
}

GradientResult fd_gradient(const QuantumSystem& sys, const ControlModel& model,
                           const ParameterVector& theta, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_gradient: h must be > 0");
  const Eigen::Index np = model.num_params();
  GradientResult out{RVector(np)};
  ParameterVector probe = theta;
  for (Eigen::Index l = 0; l < np; ++l) {
    const double step = fd_step(h, theta(l));
    probe(l) = theta(l) + step;
    const double up = evaluate_cost(sys, model, probe);
    probe(l) = theta(l) - step;
    const double down = evaluate_cost(sys, model, probe);
    probe(l) = theta(l);
    out.grad(l) = (up - down) / (2.0 * step);
  }
  return out;
}

HessianResult fd_hessian(const QuantumSystem& sys, const ControlModel& model,
                         const ParameterVector& theta, double h,
                         const AdjointOptions& opts) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_hessian: h must be > 0");
  const Eigen::Index np = model.num_params();
  RMatrix raw(np, np);
  ParameterVector probe = theta;
  for (Eigen::Index l = 0; l < np; ++l) {
    const double step = fd_step(h, theta(l));
    probe(l) = theta(l) + step;
    const RVector up = first_order_pass(sys, model, probe, opts).grad;
    probe(l) = theta(l) - step;
    const RVector down = first_order_pass(sys, model, probe, opts).grad;
    probe(l) = theta(l);
    raw.col(l) = (up - down) / (2.0 * step);
  }
  HessianResult out;
  const double scale = raw.cwiseAbs().maxCoeff();
  out.asymmetry =
      scale > 0.0 ? (raw - raw.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
  out.hess = 0.5 * (raw + raw.transpose());
  return out;
}

double relative_inf_error(const Eigen::Ref<const RMatrix>& a,
                          const Eigen::Ref<const RMatrix>& b, double floor) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("relative_inf_error: shape mismatch");
  }
  if (a.size() == 0) return 0.0;
  const double denom = std::max(b.cwiseAbs().maxCoeff(), floor);
  return (a - b).cwiseAbs().maxCoeff() / denom;
}

}  // namespace adjqoc
