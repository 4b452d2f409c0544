#include "adjqoc/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace adjqoc {

namespace {

// Below this spread the second divided difference is summed as a series
// about the centroid; above it the recurrence loses at most eps/spread.
constexpr double kClusterSpread = 1e-3;
constexpr int kClusterSeriesOrder = 10;

Complex sinhc(Complex x) {
  if (std::abs(x) < 1e-4) {
    const Complex x2 = x * x;
    return 1.0 + x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sinh(x) / x;
}

bool ordered_before(Complex a, Complex b) {
  if (a.imag() != b.imag()) return a.imag() < b.imag();
  return a.real() < b.real();
}

// exp[z1, z2, z3] by series in the offsets from the centroid.
Complex clustered_divided2(Complex a, Complex b, Complex c) {
  const Complex m = (a + b + c) / 3.0;
  const std::array<Complex, 3> d{a - m, b - m, c - m};
  // h_n(d2, d3) for n = 0..order, then h_n(d1, d2, d3).
  std::array<Complex, kClusterSeriesOrder + 1> h23{};
  for (int n = 0; n <= kClusterSeriesOrder; ++n) {
    Complex s = 0.0;
    Complex p2 = 1.0;
    for (int i = 0; i <= n; ++i) {
      s += p2 * std::pow(d[2], n - i);
      p2 *= d[1];
    }
    h23[n] = s;
  }
  Complex sum = 0.0;
  double factorial = 2.0;  // (n+2)!
  for (int n = 0; n <= kClusterSeriesOrder; ++n) {
    Complex hn = 0.0;
    Complex p1 = 1.0;
    for (int i = 0; i <= n; ++i) {
      hn += p1 * h23[n - i];
      p1 *= d[0];
    }
    sum += hn / factorial;
    factorial *= static_cast<double>(n + 3);
  }
  return std::exp(m) * sum;
}

// Points sorted along the spectrum; the outer pair is the divisor.
Complex divided2_from_first(Complex za, Complex zc, Complex ab, Complex bc) {
  return (bc - ab) / (zc - za);
}

}  // namespace

// ---------------------------------------------------------------------------
// HermitianMatrix

HermitianMatrix::HermitianMatrix(CMatrix m, double tol) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) {
    throw std::invalid_argument("HermitianMatrix: matrix is not square");
  }
  const double res = hermiticity_residual(m_);
  if (!(res <= tol)) {
    std::ostringstream os;
    os << "HermitianMatrix: hermiticity residual " << res << " exceeds "
       << tol;
    throw std::invalid_argument(os.str());
  }
  // Make the stored matrix Hermitian to the last bit.
  m_ = (0.5 * (m_ + m_.adjoint())).eval();
}

HermitianMatrix HermitianMatrix::zero(Eigen::Index n) {
  return HermitianMatrix(CMatrix::Zero(n, n));
}

HermitianMatrix HermitianMatrix::diagonal(const RVector& d) {
  return HermitianMatrix(d.cast<Complex>().asDiagonal().toDenseMatrix());
}

double HermitianMatrix::hermiticity_residual(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Divided differences

Complex exp_divided1(Complex a, Complex b) {
  // (e^a - e^b)/(a - b) = e^{(a+b)/2} sinh((a-b)/2)/((a-b)/2), with no
  // cancellation as a -> b.
  return std::exp(0.5 * (a + b)) * sinhc(0.5 * (a - b));
}

Complex exp_divided2(Complex a, Complex b, Complex c) {
  std::array<Complex, 3> z{a, b, c};
  std::sort(z.begin(), z.end(), ordered_before);
  if (std::abs(z[2] - z[0]) < kClusterSpread) {
    return clustered_divided2(z[0], z[1], z[2]);
  }
  return divided2_from_first(z[0], z[2], exp_divided1(z[0], z[1]),
                             exp_divided1(z[1], z[2]));
}

LoewnerTable::LoewnerTable(const CVector& spectrum) : z_(spectrum) {
  const Eigen::Index n = z_.size();
  first_.resize(n, n);
  for (Eigen::Index p = 0; p < n; ++p) {
    first_(p, p) = std::exp(z_(p));
    for (Eigen::Index q = p + 1; q < n; ++q) {
      const Complex v = exp_divided1(z_(p), z_(q));
      first_(p, q) = v;
      first_(q, p) = v;
    }
  }
}

Complex LoewnerTable::second_divided(Eigen::Index p, Eigen::Index r,
                                     Eigen::Index q) const {
  std::array<Eigen::Index, 3> idx{p, r, q};
  std::sort(idx.begin(), idx.end(), [this](Eigen::Index a, Eigen::Index b) {
    if (z_(a) != z_(b)) return ordered_before(z_(a), z_(b));
    return a < b;
  });
  const Complex za = z_(idx[0]);
  const Complex zc = z_(idx[2]);
  if (std::abs(zc - za) < kClusterSpread) {
    return clustered_divided2(za, z_(idx[1]), zc);
  }
  return divided2_from_first(za, zc, first_(idx[0], idx[1]),
                             first_(idx[1], idx[2]));
}

CVector LoewnerTable::materialize_second() const {
  const Eigen::Index n = z_.size();
  CVector out(n * n * n);
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index q = 0; q < n; ++q)
        out((p * n + r) * n + q) = second_divided(p, r, q);
  return out;
}

// ---------------------------------------------------------------------------
// SpectralFactor

SpectralFactor decompose(const HermitianMatrix& h, double dt,
                         std::optional<std::size_t> step) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("decompose: dt must be positive and finite");
  }
  const CMatrix& m = h.matrix();
  if (!m.allFinite()) {
    throw SpectralError("decompose: non-finite Hamiltonian entries", step);
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eigensolver did not converge";
    if (step) os << " at step " << *step;
    throw SpectralError(os.str(), step);
  }

  SpectralFactor sf;
  sf.dt_ = dt;
  sf.lambda_ = es.eigenvalues();  // ascending
  sf.v_ = es.eigenvectors();
  for (Eigen::Index c = 0; c < sf.v_.cols(); ++c) {
    Eigen::Index imax = 0;
    sf.v_.col(c).cwiseAbs().maxCoeff(&imax);
    const Complex pivot = sf.v_(imax, c);
    sf.v_.col(c) *= std::conj(pivot) / std::abs(pivot);
    sf.v_(imax, c) = Complex(sf.v_(imax, c).real(), 0.0);
  }

  const Eigen::Index n = sf.lambda_.size();
  CVector z(n);
  sf.exp_z_.resize(n);
  for (Eigen::Index p = 0; p < n; ++p) {
    z(p) = Complex(0.0, -dt * sf.lambda_(p));
    sf.exp_z_(p) = std::exp(z(p));
  }
  sf.loewner_ = LoewnerTable(z);
  return sf;
}

CMatrix SpectralFactor::to_eigenbasis(const CMatrix& w) const {
  return v_.adjoint() * w * v_;
}

CMatrix SpectralFactor::from_eigenbasis(const CMatrix& x) const {
  return v_ * x * v_.adjoint();
}

CMatrix step_propagator(const SpectralFactor& sf) {
  return sf.eigenvectors() * sf.exp_spectrum().asDiagonal() *
         sf.eigenvectors().adjoint();
}

CMatrix frechet_first_eigenbasis(const SpectralFactor& sf,
                                 const CMatrix& w_tilde) {
  return sf.loewner().first_divided().cwiseProduct(w_tilde);
}

CMatrix frechet_first(const SpectralFactor& sf, const CMatrix& w) {
  if (w.rows() != sf.dim() || w.cols() != sf.dim()) {
    throw std::invalid_argument("frechet_first: dimension mismatch");
  }
  return sf.from_eigenbasis(frechet_first_eigenbasis(sf, sf.to_eigenbasis(w)));
}

CMatrix frechet_second_eigenbasis(const SpectralFactor& sf,
                                  const CMatrix& w1, const CMatrix& w2) {
  const Eigen::Index n = sf.dim();
  const LoewnerTable& lt = sf.loewner();
  CMatrix x = CMatrix::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index q = 0; q < n; ++q) {
      const Complex b1 = w1(r, q);
      const Complex b2 = w2(r, q);
      for (Eigen::Index p = 0; p < n; ++p) {
        x(p, q) += lt.second_divided(p, r, q) *
                   (w1(p, r) * b2 + w2(p, r) * b1);
      }
    }
  }
  return x;
}

CMatrix frechet_second(const SpectralFactor& sf, const CMatrix& w1,
                       const CMatrix& w2) {
  if (w1.rows() != sf.dim() || w1.cols() != sf.dim() ||
      w2.rows() != sf.dim() || w2.cols() != sf.dim()) {
    throw std::invalid_argument("frechet_second: dimension mismatch");
  }
  return sf.from_eigenbasis(frechet_second_eigenbasis(
      sf, sf.to_eigenbasis(w1), sf.to_eigenbasis(w2)));
}

Complex frechet_second_form(const SpectralFactor& sf, const CVector& u,
                            const CMatrix& w1, const CMatrix& w2,
                            const CVector& v) {
  const Eigen::Index n = sf.dim();
  const LoewnerTable& lt = sf.loewner();
  Complex acc = 0.0;
  for (Eigen::Index p = 0; p < n; ++p) {
    const Complex up = std::conj(u(p));
    if (up == 0.0) continue;
    for (Eigen::Index q = 0; q < n; ++q) {
      const Complex weight = up * v(q);
      if (weight == 0.0) continue;
      Complex inner = 0.0;
      for (Eigen::Index r = 0; r < n; ++r) {
        inner += lt.second_divided(p, r, q) *
                 (w1(p, r) * w2(r, q) + w2(p, r) * w1(r, q));
      }
      acc += weight * inner;
    }
  }
  return acc;
}

}  // namespace adjqoc
