#include <gtest/gtest.h>

#include "adjqoc/dynamics.hpp"
#include "oracles.hpp"

namespace adjqoc {
namespace {

using testing::Generator;
using testing::expm_taylor;

CVector basis(Eigen::Index n, Eigen::Index i) {
  CVector e = CVector::Zero(n);
  e(i) = 1.0;
  return e;
}

QuantumSystem random_system(Generator& gen, Eigen::Index n, int k, std::size_t steps,
                            double rho, double dt = 0.1) {
  std::vector<HermitianMatrix> dipoles;
  for (int c = 0; c < k; ++c) dipoles.emplace_back(gen.hermitian(n));
  return make_system(HermitianMatrix(gen.hermitian(n)), std::move(dipoles),
                     gen.unit_vector(n), gen.unit_vector(n), rho, steps, dt);
}

TEST(MakeSystem, Validation) {
  const HermitianMatrix h0 = HermitianMatrix::zero(2);
  const std::vector<HermitianMatrix> dip{HermitianMatrix::zero(2)};
  const CVector e1 = basis(2, 0);
  EXPECT_NO_THROW(make_system(h0, dip, e1, e1, 0.0, 1, 0.1));
  EXPECT_THROW(make_system(h0, dip, 2.0 * e1, e1, 1.0, 1, 0.1), std::invalid_argument);
  EXPECT_THROW(make_system(h0, dip, e1, e1, -1.0, 1, 0.1), std::invalid_argument);
  EXPECT_THROW(make_system(h0, dip, e1, e1, 1.0, 0, 0.1), std::invalid_argument);
  EXPECT_THROW(make_system(h0, dip, e1, e1, 1.0, 1, 0.0), std::invalid_argument);
  EXPECT_THROW(make_system(h0, {}, e1, e1, 1.0, 1, 0.1), std::invalid_argument);
  EXPECT_THROW(make_system(h0, {dip[0], dip[0], dip[0], dip[0]}, e1, e1, 1.0, 1, 0.1),
               std::invalid_argument);
  EXPECT_THROW(make_system(h0, {HermitianMatrix::zero(3)}, e1, e1, 1.0, 1, 0.1),
               std::invalid_argument);
  EXPECT_THROW(make_system(h0, dip, basis(3, 0), e1, 1.0, 1, 0.1), std::invalid_argument);
}

TEST(MakeSystem, CompatibilityWithModel) {
  const QuantumSystem sys = make_system(HermitianMatrix::zero(2), {HermitianMatrix::zero(2)},
                                        basis(2, 0), basis(2, 1), 1.0, 4, 0.1);
  EXPECT_NO_THROW(check_compatible(sys, MaximalModel(1, 4, 0.1)));
  EXPECT_THROW(check_compatible(sys, MaximalModel(2, 4, 0.1)), std::invalid_argument);
  EXPECT_THROW(check_compatible(sys, MaximalModel(1, 5, 0.1)), std::invalid_argument);
  EXPECT_THROW(check_compatible(sys, MaximalModel(1, 4, 0.2)), std::invalid_argument);
}

TEST(BuildGenerator, Examples) {
  Generator gen(1);
  const CMatrix h0 = gen.hermitian(3);
  const QuantumSystem sys =
      make_system(HermitianMatrix(h0), {HermitianMatrix(CMatrix::Identity(3, 3))}, basis(3, 0),
                  basis(3, 1), 1.0, 2, 0.1);
  const MaximalModel model(1, 2, 0.1);
  EXPECT_TRUE(build_generator(sys, model, ParameterVector::Zero(2), 0).matrix() == h0);
  ParameterVector theta(2);
  theta << 2.0, 0.0;
  const CMatrix expected = h0 + 2.0 * CMatrix::Identity(3, 3);
  EXPECT_LT((build_generator(sys, model, theta, 0).matrix() - expected).norm(), 1e-15);
}

TEST(BuildGenerator, RandomIsHermitian) {
  Generator gen(2);
  const QuantumSystem sys = random_system(gen, 5, 3, 4, 1.0);
  const MaximalModel model(3, 4, 0.1);
  const ParameterVector theta = gen.real_vector(model.num_params());
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_LT(HermitianMatrix::hermiticity_residual(build_generator(sys, model, theta, j)), 1e-13);
  }
}

TEST(Propagate, ZeroEigenvalueStaysPut) {
  const QuantumSystem sys = make_system(HermitianMatrix::diagonal(RVector::LinSpaced(2, 0.0, 1.0)),
                                        {HermitianMatrix::zero(2)}, basis(2, 0), basis(2, 1),
                                        1.0, 6, 0.1);
  const TrajectoryCache cache = propagate(sys, MaximalModel(1, 6, 0.1), ParameterVector::Zero(6));
  ASSERT_EQ(cache.states.size(), 7u);
  for (const CVector& a : cache.states) EXPECT_LT((a - basis(2, 0)).norm(), 1e-15);
}

TEST(Propagate, DiagonalFreeEvolution) {
  Generator gen(3);
  const RVector e = gen.real_vector(4);
  const CVector alpha = gen.unit_vector(4);
  const QuantumSystem sys = make_system(HermitianMatrix::diagonal(e), {HermitianMatrix::zero(4)},
                                        alpha, basis(4, 0), 1.0, 10, 0.1);
  const TrajectoryCache cache = propagate(sys, MaximalModel(1, 10, 0.1), ParameterVector::Zero(10));
  for (std::size_t j = 0; j <= 10; ++j) {
    for (Eigen::Index p = 0; p < 4; ++p) {
      const Complex expected = std::exp(Complex(0.0, -e(p) * 0.1 * static_cast<double>(j))) * alpha(p);
      EXPECT_LT(std::abs(cache.states[j](p) - expected), 1e-13);
      EXPECT_NEAR(std::abs(cache.states[j](p)), std::abs(alpha(p)), 1e-14);
    }
  }
}

TEST(Propagate, MatchesSeriesOraclePropagator) {
  Generator gen(4);
  const QuantumSystem sys = random_system(gen, 4, 2, 16, 1.0);
  const MaximalModel model(2, 16, 0.1);
  const ParameterVector theta = gen.real_vector(model.num_params());
  const TrajectoryCache cache = propagate(sys, model, theta);
  CVector a = sys.alpha;
  for (std::size_t j = 0; j < 16; ++j) {
    CMatrix h = sys.h0.matrix();
    for (int k = 0; k < 2; ++k) h += theta(model.index(j, k)) * sys.dipoles[k].matrix();
    a = expm_taylor(Complex(0.0, -0.1) * h) * a;
    EXPECT_LT((cache.states[j + 1] - a).norm(), 1e-10);
  }
}

TEST(Propagate, FrechetDataMatchesKernel) {
  Generator gen(5);
  const QuantumSystem sys = random_system(gen, 3, 2, 3, 1.0);
  const MaximalModel model(2, 3, 0.1);
  const ParameterVector theta = gen.real_vector(model.num_params());
  const TrajectoryCache full = propagate(sys, model, theta);
  ASSERT_EQ(full.frechet_m.size(), 3u);
  for (std::size_t j = 0; j < 3; ++j) {
    for (int k = 0; k < 2; ++k) {
      const CMatrix expected = frechet_first(full.factors[j], sys.dipoles[k].matrix());
      EXPECT_LT((full.frechet_m[j][k] - expected).norm(), 1e-14);
    }
  }
  PropagateOptions lean;
  lean.with_frechet = false;
  EXPECT_TRUE(propagate(sys, model, theta, lean).frechet_m.empty());
}

TEST(Propagate, WorkersDoNotChangeResults) {
  Generator gen(6);
  const QuantumSystem sys = random_system(gen, 4, 1, 40, 1.0);
  const MaximalModel model(1, 40, 0.1);
  const ParameterVector theta = gen.real_vector(40);
  PropagateOptions many;
  many.workers = 4;
  const TrajectoryCache a = propagate(sys, model, theta);
  const TrajectoryCache b = propagate(sys, model, theta, many);
  EXPECT_TRUE(a.final_state() == b.final_state());
}

TEST(Propagate, NormPreservationLongHorizon) {
  Generator gen(7);
  const QuantumSystem sys = random_system(gen, 6, 2, 1000, 1.0);
  const MaximalModel model(2, 1000, 0.1);
  const TrajectoryCache cache = propagate(sys, model, gen.real_vector(model.num_params()));
  double worst = 0.0;
  for (const CVector& a : cache.states) worst = std::max(worst, std::abs(a.norm() - 1.0));
  EXPECT_LT(worst, 1e-10);
}

TEST(Propagate, Reversibility) {
  Generator gen(8);
  const QuantumSystem sys = random_system(gen, 4, 1, 200, 1.0);
  const MaximalModel model(1, 200, 0.1);
  const TrajectoryCache cache = propagate(sys, model, gen.real_vector(200));
  CVector a = cache.final_state();
  for (std::size_t j = 200; j-- > 0;) a = cache.propagators[j].adjoint() * a;
  EXPECT_LT((a - sys.alpha).norm(), 1e-9);
}

TEST(Cost, Examples) {
  const QuantumSystem sys = make_system(HermitianMatrix::zero(2), {HermitianMatrix::zero(2)},
                                        basis(2, 0), basis(2, 1), 3.5, 4, 0.1);
  const MaximalModel model(1, 4, 0.1);
  EXPECT_DOUBLE_EQ(evaluate_cost(sys, model, ParameterVector::Zero(4)), 3.5);
  const QuantumSystem same = make_system(HermitianMatrix::zero(2), {HermitianMatrix::zero(2)},
                                         basis(2, 0), basis(2, 0), 3.5, 4, 0.1);
  EXPECT_EQ(evaluate_cost(same, model, ParameterVector::Zero(4)), 0.0);
}

TEST(Cost, MatchesUnwoundProduct) {
  Generator gen(9);
  for (int trial = 0; trial < 5; ++trial) {
    const QuantumSystem sys = random_system(gen, 4, 2, 12, gen.uniform(0.1, 10.0));
    const MaximalModel model(2, 12, 0.1);
    const ParameterVector theta = gen.real_vector(model.num_params());
    CMatrix product = CMatrix::Identity(4, 4);
    for (std::size_t j = 0; j < 12; ++j) {
      CMatrix h = sys.h0.matrix();
      for (int k = 0; k < 2; ++k) h += theta(model.index(j, k)) * sys.dipoles[k].matrix();
      product = expm_taylor(Complex(0.0, -0.1) * h) * product;
    }
    const double expected =
        0.5 * theta.squaredNorm() + 0.5 * sys.rho * (product * sys.alpha - sys.beta).squaredNorm();
    EXPECT_NEAR(evaluate_cost(sys, model, theta), expected, 1e-10 * expected);
  }
}

TEST(Cost, RhoZeroIsRegularization) {
  Generator gen(10);
  const QuantumSystem sys = random_system(gen, 3, 1, 20, 0.0);
  const MaximalModel model(1, 20, 0.1);
  const ParameterVector theta = gen.real_vector(20);
  EXPECT_NEAR(evaluate_cost(sys, model, theta), 0.5 * theta.squaredNorm(), 1e-12);
}

TEST(TargetViolation, Examples) {
  TrajectoryCache cache;
  cache.states = {basis(2, 0)};
  EXPECT_EQ(target_violation(cache, basis(2, 0)), 0.0);
  EXPECT_DOUBLE_EQ(target_violation(cache, basis(2, 1)), std::sqrt(2.0));
  Generator gen(11);
  const CVector u = gen.unit_vector(5), v = gen.unit_vector(5);
  cache.states = {u};
  EXPECT_DOUBLE_EQ(target_violation(cache, v), (u - v).norm());
}

}  // namespace
}  // namespace adjqoc
