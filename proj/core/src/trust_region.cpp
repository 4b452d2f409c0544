#include "adjqoc/trust_region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace adjqoc {

namespace {

RVector clip_to_radius(RVector s, double radius) {
  const double n = s.norm();
  if (n > radius) s *= radius / n;
  return s;
}

RVector solve_exact(const RMatrix& h, const RVector& g, double radius) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(h);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("trust_region_subproblem: eigensolver failed");
  }
  const RVector& lam = es.eigenvalues();
  const RMatrix& q = es.eigenvectors();
  const RVector gt = q.transpose() * g;
  const double lam_min = lam(0);
  const double lam_scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  const double gnorm = g.norm();

  auto step_norm = [&](double sigma) {
    return (gt.array() / (lam.array() + sigma)).matrix().norm();
  };
  auto step_at = [&](double sigma) -> RVector {
    return -(q * (gt.array() / (lam.array() + sigma)).matrix());
  };

  if (lam_min > 0.0) {
    RVector s = step_at(0.0);
    if (s.norm() <= radius) return s;
  }

  const double lo = std::max(0.0, -lam_min);

  // Hard case: g has no weight on the lowest eigenspace.
  const double eig_tol = 1e-12 * lam_scale;
  double low_weight = 0.0;
  for (Eigen::Index i = 0; i < lam.size() && lam(i) - lam_min <= eig_tol; ++i) {
    low_weight = std::max(low_weight, std::abs(gt(i)));
  }
  if (low_weight <= 1e-14 * std::max(gnorm, 1e-300) || gnorm == 0.0) {
    RVector coeff = RVector::Zero(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      if (lam(i) - lam_min > eig_tol) coeff(i) = gt(i) / (lam(i) + lo);
    }
    RVector s = -(q * coeff);
    const double sn = s.norm();
    if (sn <= radius) {
      if (lam_min < 0.0) {
        const double tau = std::sqrt(std::max(0.0, radius * radius - sn * sn));
        RVector dir = q.col(0);
        if (g.dot(dir) > 0.0) dir = -dir;
        s += tau * dir;
      }
      return clip_to_radius(std::move(s), radius);
    }
  }

  // Secular equation phi(sigma) = 1/|s(sigma)| - 1/radius = 0, increasing in
  // sigma on (lo, inf). Safeguarded Newton inside a shrinking bracket.
  double a = lo;
  double b = lo + gnorm / radius + 1e-300;
  while (step_norm(b) > radius) b = lo + 2.0 * (b - lo);
  double sigma = b;
  for (int it = 0; it < 200; ++it) {
    const double sn = step_norm(sigma);
    if (std::abs(sn - radius) <= 1e-12 * radius) break;
    if (sn > radius) {
      a = sigma;
    } else {
      b = sigma;
    }
    const Eigen::ArrayXd denom = lam.array() + sigma;
    const double dsn = -(gt.array().square() / denom.cube()).sum() / sn;
    const double phi = 1.0 / sn - 1.0 / radius;
    const double dphi = -dsn / (sn * sn);
    double next = sigma - phi / dphi;
    if (!(next > a && next < b) || !std::isfinite(next)) next = 0.5 * (a + b);
    if (next == sigma || b - a <= 4.0 * std::numeric_limits<double>::epsilon() * b) {
      sigma = next;
      break;
    }
    sigma = next;
  }
  return clip_to_radius(step_at(sigma), radius);
}

RVector solve_steihaug(const RMatrix& h, const RVector& g, double radius) {
  const Eigen::Index n = g.size();
  RVector z = RVector::Zero(n);
  RVector r = g;
  RVector d = -r;
  const double tol = std::min(0.5, std::sqrt(g.norm())) * g.norm();
  if (g.norm() == 0.0) return z;

  auto to_boundary = [&](const RVector& p, const RVector& dir) {
    const double a = dir.squaredNorm();
    const double b = 2.0 * p.dot(dir);
    const double c = p.squaredNorm() - radius * radius;
    const double tau = (-b + std::sqrt(std::max(0.0, b * b - 4.0 * a * c))) / (2.0 * a);
    return RVector(p + tau * dir);
  };

  for (Eigen::Index it = 0; it < 2 * n + 10; ++it) {
    const RVector hd = h * d;
    const double curv = d.dot(hd);
    if (curv <= 0.0) return to_boundary(z, d);
    const double alpha = r.squaredNorm() / curv;
    RVector z_next = z + alpha * d;
    if (z_next.norm() >= radius) return to_boundary(z, d);
    RVector r_next = r + alpha * hd;
    if (r_next.norm() < tol) return z_next;
    const double beta = r_next.squaredNorm() / r.squaredNorm();
    d = -r_next + beta * d;
    z = std::move(z_next);
    r = std::move(r_next);
  }
  return z;
}

}  // namespace

double quadratic_model(const RMatrix& h, const RVector& g, const RVector& s) {
  return g.dot(s) + 0.5 * s.dot(h * s);
}

RVector cauchy_point(const RMatrix& h, const RVector& g, double radius) {
  const double gnorm = g.norm();
  if (gnorm == 0.0) return RVector::Zero(g.size());
  const double ghg = g.dot(h * g);
  double tau = 1.0;
  if (ghg > 0.0) tau = std::min(1.0, gnorm * gnorm * gnorm / (radius * ghg));
  return -(tau * radius / gnorm) * g;
}

RVector trust_region_subproblem(const RMatrix& h, const RVector& g,
                                double radius, SubproblemSolver solver) {
  if (!(radius > 0.0)) {
    throw std::invalid_argument("trust_region_subproblem: radius must be > 0");
  }
  if (h.rows() != g.size() || h.cols() != g.size()) {
    throw std::invalid_argument("trust_region_subproblem: dimension mismatch");
  }
  RVector s = solver == SubproblemSolver::kExact ? solve_exact(h, g, radius)
                                                 : solve_steihaug(h, g, radius);
  const RVector sc = cauchy_point(h, g, radius);
  if (!s.allFinite() || quadratic_model(h, g, s) > quadratic_model(h, g, sc)) {
    return sc;
  }
  return s;
}

}  // namespace adjqoc
