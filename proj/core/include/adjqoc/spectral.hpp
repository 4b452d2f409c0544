#pragma once

// Eigendecomposition-based matrix exponential kernels for generators of the
// form Z = -i*dt*H with H Hermitian, together with the first and second
// Frechet (directional) derivatives of exp at Z.
//
// All derivative kernels use the Daleckii-Krein representation: in the
// eigenbasis of H the derivative is an entrywise (Hadamard) product with a
// table of divided differences of exp over the spectrum z_p = -i*dt*lambda_p.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include "adjqoc/types.hpp"

namespace adjqoc {

/// Tolerance used when validating Hermitian input (absolute, per entry).
inline constexpr double kHermitianTol = 1e-12;

class SpectralError : public std::runtime_error {
 public:
  SpectralError(const std::string& what, std::optional<std::size_t> step)
      : std::runtime_error(what), step_(step) {}
  std::optional<std::size_t> step() const noexcept { return step_; }

 private:
  std::optional<std::size_t> step_;
};

/// A square complex matrix that equals its conjugate transpose.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  /// Throws std::invalid_argument if `m` is not square or not Hermitian
  /// within `tol`. The stored matrix is (m + m^dagger)/2.
  explicit HermitianMatrix(CMatrix m, double tol = kHermitianTol);

  static HermitianMatrix zero(Eigen::Index n);
  static HermitianMatrix diagonal(const RVector& d);

  Eigen::Index dim() const noexcept { return m_.rows(); }
  const CMatrix& matrix() const noexcept { return m_; }
  operator const CMatrix&() const noexcept { return m_; }

  /// Largest |m_pq - conj(m_qp)|.
  static double hermiticity_residual(const CMatrix& m);

 private:
  CMatrix m_;
};

/// First divided difference exp[a, b], stable for a close to b.
Complex exp_divided1(Complex a, Complex b);

/// Second divided difference exp[a, b, c], symmetric in its arguments and
/// stable when any or all of the points cluster.
Complex exp_divided2(Complex a, Complex b, Complex c);

/// Divided-difference multipliers over one spectrum. The second-order table
/// is evaluated on demand; `materialize_second()` exists for inspection.
class LoewnerTable {
 public:
  LoewnerTable() = default;
  explicit LoewnerTable(const CVector& spectrum);

  const CMatrix& first_divided() const noexcept { return first_; }
  const CVector& spectrum() const noexcept { return z_; }
  /// exp[z_p, z_r, z_q]; exactly invariant under permutation of indices.
  Complex second_divided(Eigen::Index p, Eigen::Index r,
                         Eigen::Index q) const;
  /// Full N*N*N tensor, flattened as index (p*N + r)*N + q.
  CVector materialize_second() const;

 private:
  CVector z_;
  CMatrix first_;
};

/// Eigendecomposition H = V diag(lambda) V^dagger together with the step dt,
/// plus derived quantities shared by every kernel. Immutable once built.
class SpectralFactor {
 public:
  SpectralFactor() = default;

  const RVector& eigenvalues() const noexcept { return lambda_; }
  const CMatrix& eigenvectors() const noexcept { return v_; }
  double dt() const noexcept { return dt_; }
  Eigen::Index dim() const noexcept { return lambda_.size(); }

  /// Spectrum of Z = -i*dt*H.
  const CVector& z_spectrum() const noexcept { return loewner_.spectrum(); }
  /// exp of the Z spectrum.
  const CVector& exp_spectrum() const noexcept { return exp_z_; }
  const LoewnerTable& loewner() const noexcept { return loewner_; }

  /// V^dagger W V.
  CMatrix to_eigenbasis(const CMatrix& w) const;
  /// V X V^dagger.
  CMatrix from_eigenbasis(const CMatrix& x) const;

 private:
  friend SpectralFactor decompose(const HermitianMatrix& h, double dt,
                                  std::optional<std::size_t> step);
  RVector lambda_;
  CMatrix v_;
  double dt_ = 0.0;
  CVector exp_z_;
  LoewnerTable loewner_;
};

/// Eigenvalues ascending; each eigenvector column scaled so its largest
/// magnitude component is real positive. `step` only labels diagnostics.
SpectralFactor decompose(const HermitianMatrix& h, double dt,
                         std::optional<std::size_t> step = std::nullopt);

/// exp(-i*dt*H) = V diag(exp(z)) V^dagger.
CMatrix step_propagator(const SpectralFactor& sf);

/// d/ds exp(Z + s W) at s = 0.
CMatrix frechet_first(const SpectralFactor& sf, const CMatrix& w);

/// Same as frechet_first with W already in the eigenbasis; result stays in
/// the eigenbasis.
CMatrix frechet_first_eigenbasis(const SpectralFactor& sf,
                                 const CMatrix& w_tilde);

/// d^2/(ds dt) exp(Z + s W1 + t W2) at s = t = 0. Symmetric in (W1, W2).
CMatrix frechet_second(const SpectralFactor& sf, const CMatrix& w1,
                       const CMatrix& w2);

/// Eigenbasis variant of frechet_second.
CMatrix frechet_second_eigenbasis(const SpectralFactor& sf,
                                  const CMatrix& w1_tilde,
                                  const CMatrix& w2_tilde);

/// u^dagger (d^2 exp . (W1, W2)) v with u, v and W already in the
/// eigenbasis. Avoids forming the full N x N second derivative.
Complex frechet_second_form(const SpectralFactor& sf, const CVector& u_tilde,
                            const CMatrix& w1_tilde, const CMatrix& w2_tilde,
                            const CVector& v_tilde);

}  // namespace adjqoc
