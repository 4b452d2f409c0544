#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the spectral kernels: exponentials come from a scaled Taylor series and
// derivatives from central differences of that series.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "adjqoc/types.hpp"

namespace adjqoc::testing {

/// exp(A) by scaling and squaring a 30-term Taylor series.
inline CMatrix expm_taylor(const CMatrix& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int s = 0;
  while (norm / std::ldexp(1.0, s) > 0.25) ++s;
  const CMatrix x = a / std::ldexp(1.0, s);
  CMatrix term = CMatrix::Identity(a.rows(), a.cols());
  CMatrix sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = (term * x) / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = (sum * sum).eval();
  return sum;
}

/// (exp(Z + hW) - exp(Z - hW)) / 2h.
inline CMatrix fd_frechet_first(const CMatrix& z, const CMatrix& w, double h = 1e-5) {
  return (expm_taylor(z + h * w) - expm_taylor(z - h * w)) / (2.0 * h);
}

/// Mixed central difference of exp(Z + s W1 + t W2) in (s, t).
inline CMatrix fd_frechet_second(const CMatrix& z, const CMatrix& w1, const CMatrix& w2,
                                 double h = 1e-4) {
  return (expm_taylor(z + h * w1 + h * w2) - expm_taylor(z + h * w1 - h * w2) -
          expm_taylor(z - h * w1 + h * w2) + expm_taylor(z - h * w1 - h * w2)) /
         (4.0 * h * h);
}

inline double rel_frobenius(const CMatrix& a, const CMatrix& ref) {
  return (a - ref).norm() / std::max(ref.norm(), 1e-300);
}

/// Seeded source of random test objects.
class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  double normal() { return normal_(rng_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  Complex complex() { return {normal(), normal()}; }

  RVector real_vector(Eigen::Index n) {
    RVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }
  CVector complex_vector(Eigen::Index n) {
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = complex();
    return v;
  }
  CVector unit_vector(Eigen::Index n) { return complex_vector(n).normalized(); }
  CMatrix complex_matrix(Eigen::Index n) {
    CMatrix m(n, n);
    for (Eigen::Index c = 0; c < n; ++c)
      for (Eigen::Index r = 0; r < n; ++r) m(r, c) = complex();
    return m;
  }
  /// Exactly Hermitian.
  CMatrix hermitian(Eigen::Index n) {
    CMatrix a = complex_matrix(n);
    CMatrix h = 0.5 * (a + a.adjoint());
    for (Eigen::Index r = 0; r < n; ++r) {
      h(r, r) = h(r, r).real();
      for (Eigen::Index c = r + 1; c < n; ++c) h(c, r) = std::conj(h(r, c));
    }
    return h;
  }
  /// Random unitary from the QR factor of a complex Gaussian matrix.
  CMatrix unitary(Eigen::Index n) {
    Eigen::HouseholderQR<CMatrix> qr(complex_matrix(n));
    return qr.householderQ() * CMatrix::Identity(n, n);
  }
  /// Hermitian with the given spectrum and random eigenvectors.
  CMatrix hermitian_with_spectrum(const RVector& lambda) {
    const CMatrix u = unitary(lambda.size());
    CMatrix h = u * lambda.cast<Complex>().asDiagonal() * u.adjoint();
    return 0.5 * (h + h.adjoint());
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
};

}  // namespace adjqoc::testing
