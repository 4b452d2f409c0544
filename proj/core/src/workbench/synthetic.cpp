#include "adjqoc/workbench/synthetic.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>

namespace adjqoc::workbench {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

SystemFile generate_synthetic(Eigen::Index dim, int channels,
                              std::uint64_t seed) {
  if (dim < 2) throw std::invalid_argument("generate_synthetic: N must be >= 2");
  if (channels < 1 || channels > 3) {
    throw std::invalid_argument("generate_synthetic: K must be 1, 2 or 3");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;

  SystemFile s;
  s.name = "synthetic-N" + std::to_string(dim) + "-K" + std::to_string(channels) +
           "-seed" + std::to_string(seed);
  s.dim = dim;
  s.num_channels = channels;

  std::vector<double> diag(static_cast<std::size_t>(dim));
  for (double& d : diag) d = normal(rng);
  std::sort(diag.begin(), diag.end());
  s.h0 = CMatrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) s.h0(i, i) = diag[static_cast<std::size_t>(i)];

  for (int k = 0; k < channels; ++k) {
    CMatrix a(dim, dim);
    for (Eigen::Index c = 0; c < dim; ++c)
      for (Eigen::Index r = 0; r < dim; ++r) {
        const double re = normal(rng);
        const double im = normal(rng);
        a(r, c) = Complex(re, im);
      }
    CMatrix m = 0.5 * (a + a.adjoint());
    // Exactly Hermitian: mirror the upper triangle, real diagonal.
    for (Eigen::Index r = 0; r < dim; ++r) {
      m(r, r) = m(r, r).real();
      for (Eigen::Index c = r + 1; c < dim; ++c) m(c, r) = std::conj(m(r, c));
    }
    s.dipoles.push_back(std::move(m));
  }

  s.alpha = CVector::Zero(dim);
  s.alpha(0) = 1.0;
  s.beta = CVector::Zero(dim);
  s.beta(dim - 1) = 1.0;
  return s;
}

ParameterVector draw_initial_theta(Eigen::Index num_params,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  ParameterVector theta(num_params);
  for (Eigen::Index i = 0; i < num_params; ++i) theta(i) = normal(rng);
  return theta;
}

}  // namespace adjqoc::workbench
