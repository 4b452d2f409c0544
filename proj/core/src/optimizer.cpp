#include "adjqoc/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace adjqoc {

void TerminationCriteria::validate() const {
  if (!(step_tol > 0.0) || !(grad_tol > 0.0) || max_iters < 1) {
    throw std::invalid_argument(
        "termination criteria need step_tol > 0, grad_tol > 0, max_iters >= 1");
  }
}

void TrustRegionConfig::validate() const {
  if (!(initial_radius > 0.0) || !(max_radius >= initial_radius) ||
      !(expand_factor > 1.0) || !(shrink_factor > 0.0 && shrink_factor < 1.0) ||
      !(accept_ratio >= 0.0 && accept_ratio < shrink_ratio) ||
      !(shrink_ratio < expand_ratio && expand_ratio < 1.0) ||
      !(bfgs_damping >= 0.0 && bfgs_damping < 1.0)) {
    throw std::invalid_argument("invalid trust-region configuration");
  }
}

std::string_view to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::kStepTol: return "step_tol";
    case TerminationReason::kGradTol: return "grad_tol";
    case TerminationReason::kMaxIters: return "max_iters";
  }
  return "unknown";
}

TerminationReason termination_reason_from_string(std::string_view s) {
  if (s == "step_tol") return TerminationReason::kStepTol;
  if (s == "grad_tol") return TerminationReason::kGradTol;
  if (s == "max_iters") return TerminationReason::kMaxIters;
  throw std::invalid_argument("unknown termination reason '" + std::string(s) + "'");
}

OptimizerError::OptimizerError(const std::string& what, std::size_t iteration)
    : std::runtime_error(what), iteration_(iteration) {}

void damped_bfgs_update(RMatrix& b, const RVector& s, const RVector& y,
                        double damping) {
  const RVector bs = b * s;
  const double sbs = s.dot(bs);
  if (!(sbs > 0.0)) return;
  const double sy = s.dot(y);
  RVector r = y;
  if (sy < damping * sbs) {
    const double theta = (1.0 - damping) * sbs / (sbs - sy);
    r = theta * y + (1.0 - theta) * bs;
  }
  const double sr = s.dot(r);
  if (!(sr > 0.0)) return;
  b.noalias() += (r * r.transpose()) / sr;
  b.noalias() -= (bs * bs.transpose()) / sbs;
}

namespace {

enum class Method { kNewton, kBfgs };

template <class F>
auto guarded(std::size_t iteration, const char* what, F&& f) {
  try {
    return f();
  } catch (const OptimizerError&) {
    throw;
  } catch (const std::exception& e) {
    std::ostringstream os;
    os << what << " failed at iteration " << iteration << ": " << e.what();
    throw OptimizerError(os.str(), iteration);
  }
}

void check_hessian_fd(const SmoothProblem& p, const RVector& theta,
                      const RMatrix& hess) {
  const Eigen::Index n = theta.size();
  RMatrix fd(n, n);
  RVector probe = theta;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = 1e-5 * (1.0 + std::abs(theta(i)));
    probe(i) = theta(i) + h;
    const RVector up = p.gradient(probe).grad;
    probe(i) = theta(i) - h;
    const RVector down = p.gradient(probe).grad;
    probe(i) = theta(i);
    fd.col(i) = (up - down) / (2.0 * h);
  }
  const double scale = std::max(fd.cwiseAbs().maxCoeff(), 1e-300);
  const double err = (fd - hess).cwiseAbs().maxCoeff() / scale;
  if (err > 1e-4) {
    std::ostringstream os;
    os << "Hessian disagrees with differenced gradient at theta0 (relative "
       << err << ")";
    throw std::runtime_error(os.str());
  }
}

OptimizationReport run_trust_region(Method method, const SmoothProblem& problem,
                                    const RVector& theta0,
                                    const TerminationCriteria& criteria,
                                    const TrustRegionConfig& config) {
  criteria.validate();
  config.validate();
  if (!problem.cost || !problem.gradient ||
      (method == Method::kNewton && !problem.hessian)) {
    throw std::invalid_argument("trust region: missing evaluator");
  }
  const bool newton = method == Method::kNewton;
  auto evaluate = [&](const RVector& x) {
    return newton ? problem.hessian(x) : problem.gradient(x);
  };

  // Untimed warm-up of every evaluator used below.
  guarded(0, "warm-up", [&] {
    (void)problem.cost(theta0);
    Evaluation e = evaluate(theta0);
    if (newton && config.check_hessian) check_hessian_fd(problem, theta0, e.hess);
    return 0;
  });

  const auto start = std::chrono::steady_clock::now();

  OptimizationReport rep;
  rep.method = newton ? "newton" : "bfgs";
  RVector theta = theta0;
  Evaluation cur = guarded(0, "initial evaluation", [&] { return evaluate(theta); });
  if (!std::isfinite(cur.cost)) {
    throw OptimizerError("non-finite cost at the initial point", 0);
  }
  RMatrix model_hess =
      newton ? cur.hess : RMatrix::Identity(theta.size(), theta.size());
  bool first_update = true;
  double radius = config.initial_radius;
  double gnorm = cur.grad.norm();

  rep.termination_reason = TerminationReason::kMaxIters;
  bool done = false;
  if (gnorm < criteria.grad_tol) {
    rep.termination_reason = TerminationReason::kGradTol;
    done = true;
  }

  for (std::size_t it = 1; !done && it <= criteria.max_iters; ++it) {
    const RVector step = guarded(it, "subproblem", [&] {
      return trust_region_subproblem(model_hess, cur.grad, radius, config.subproblem);
    });
    const double step_norm = step.norm();
    const double predicted = -quadratic_model(model_hess, cur.grad, step);
    const RVector trial = theta + step;
    const double trial_cost = guarded(it, "cost evaluation", [&] { return problem.cost(trial); });
    if (!std::isfinite(trial_cost)) {
      std::ostringstream os;
      os << "non-finite cost at iteration " << it;
      throw OptimizerError(os.str(), it);
    }
    const double actual = cur.cost - trial_cost;
    const double ratio = predicted > 0.0 ? actual / predicted : -1.0;
    const double used_radius = radius;

    if (ratio < config.shrink_ratio) {
      radius *= config.shrink_factor;
    } else if (ratio > config.expand_ratio &&
               step_norm >= (1.0 - 1e-8) * used_radius) {
      radius = std::min(config.expand_factor * radius, config.max_radius);
    }

    const bool accepted = ratio > config.accept_ratio && actual > 0.0;
    if (accepted) {
      Evaluation next = guarded(it, "gradient evaluation", [&] { return evaluate(trial); });
      if (newton) {
        model_hess = next.hess;
      } else {
        const RVector y = next.grad - cur.grad;
        if (first_update && config.bfgs_auto_scale) {
          const double ys = std::abs(y.dot(step));
          if (ys > 0.0 && y.squaredNorm() > 0.0) model_hess *= y.squaredNorm() / ys;
        }
        first_update = false;
        damped_bfgs_update(model_hess, step, y, config.bfgs_damping);
      }
      theta = trial;
      cur = std::move(next);
      gnorm = cur.grad.norm();
    }

    rep.trace.push_back({cur.cost, gnorm, step_norm, used_radius, accepted});
    rep.iterations = it;

    if (accepted && gnorm < criteria.grad_tol) {
      rep.termination_reason = TerminationReason::kGradTol;
      done = true;
    } else if ((accepted && step_norm < criteria.step_tol) ||
               radius < criteria.step_tol) {
      rep.termination_reason = TerminationReason::kStepTol;
      done = true;
    }
  }

  rep.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.final_theta = theta;
  rep.final_cost = cur.cost;
  rep.final_grad_norm = gnorm;
  if (newton) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(cur.hess, Eigen::EigenvaluesOnly);
    rep.final_hessian_min_eig = es.eigenvalues()(0);
  }
  return rep;
}

}  // namespace

OptimizationReport newton_trust_region(const SmoothProblem& problem,
                                       const RVector& theta0,
                                       const TerminationCriteria& criteria,
                                       const TrustRegionConfig& config) {
  return run_trust_region(Method::kNewton, problem, theta0, criteria, config);
}

OptimizationReport bfgs_baseline(const SmoothProblem& problem,
                                 const RVector& theta0,
                                 const TerminationCriteria& criteria,
                                 const TrustRegionConfig& config) {
  return run_trust_region(Method::kBfgs, problem, theta0, criteria, config);
}

}  // namespace adjqoc
