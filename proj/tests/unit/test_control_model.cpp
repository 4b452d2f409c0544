#include <gtest/gtest.h>

#include "adjqoc/control_model.hpp"
#include "oracles.hpp"

namespace adjqoc {
namespace {

using testing::Generator;

// f^k_j = theta_l * theta_m for every (j, k).
class ProductModel final : public ControlModel {
 public:
  ProductModel(Eigen::Index l, Eigen::Index m) : ControlModel(1, 3, 0.1), l_(l), m_(m) {}
  std::string_view name() const override { return "product"; }
  Eigen::Index num_params() const override { return 4; }

 protected:
  double do_value(const ParameterVector& t, std::size_t, int) const override {
    return t(l_) * t(m_);
  }
  SparseGradient do_jacobian(const ParameterVector& t, std::size_t, int) const override {
    return {{l_, t(m_)}, {m_, t(l_)}};
  }
  SparseHessian do_hessian(const ParameterVector&, std::size_t, int) const override {
    return {{l_, m_, 1.0}, {m_, l_, 1.0}};
  }

 private:
  Eigen::Index l_, m_;
};

TEST(MaximalModel, ValueIsParameter) {
  const MaximalModel model(2, 8, 0.1);
  ParameterVector theta = ParameterVector::Zero(model.num_params());
  theta(model.index(5, 1)) = 0.7;
  EXPECT_EQ(model.value(theta, 5, 1), 0.7);
  EXPECT_EQ(model.value(theta, 5, 0), 0.0);
  EXPECT_EQ(model.index(5, 1), 13);
  for (std::size_t j = 0; j < 8; ++j)
    for (int k = 0; k < 2; ++k)
      EXPECT_EQ(model.value(ParameterVector::Zero(16), j, k), 0.0);
}

TEST(MaximalModel, JacobianIsUnitVector) {
  const MaximalModel model(3, 4, 0.2);
  Generator gen(1);
  const ParameterVector a = gen.real_vector(12), b = gen.real_vector(12);
  for (std::size_t j = 0; j < 4; ++j) {
    for (int k = 0; k < 3; ++k) {
      RVector e = RVector::Zero(12);
      e(model.index(j, k)) = 1.0;
      EXPECT_TRUE(model.dense_jacobian(a, j, k) == e);
      EXPECT_TRUE(model.dense_jacobian(b, j, k) == e);
      EXPECT_TRUE(model.hessian(a, j, k).empty());
      EXPECT_EQ(model.dense_hessian(a, j, k).cwiseAbs().maxCoeff(), 0.0);
    }
  }
  EXPECT_TRUE(model.is_linear());
}

TEST(MaximalModel, SingleChannelParameterCountAndEnergy) {
  const MaximalModel model(1, 9, 0.1);
  EXPECT_EQ(model.num_params(), 9);
  Generator gen(2);
  const ParameterVector theta = gen.real_vector(9);
  double energy = 0.0;
  for (std::size_t j = 0; j < 9; ++j) energy += 0.5 * model.value(theta, j, 0) * model.value(theta, j, 0);
  EXPECT_DOUBLE_EQ(energy, 0.5 * theta.squaredNorm());
}

TEST(ControlModel, RangeChecks) {
  const MaximalModel model(1, 4, 0.1);
  const ParameterVector theta = ParameterVector::Zero(4);
  EXPECT_THROW(model.value(theta, 4, 0), std::out_of_range);
  EXPECT_THROW(model.value(theta, 0, 1), std::out_of_range);
  EXPECT_THROW(model.value(theta, 0, -1), std::out_of_range);
  EXPECT_THROW(model.value(ParameterVector::Zero(3), 0, 0), std::out_of_range);
  EXPECT_THROW(MaximalModel(0, 4, 0.1), std::invalid_argument);
  EXPECT_THROW(MaximalModel(4, 4, 0.1), std::invalid_argument);
  EXPECT_THROW(MaximalModel(1, 0, 0.1), std::invalid_argument);
  EXPECT_THROW(MaximalModel(1, 4, 0.0), std::invalid_argument);
}

TEST(ControlModel, ProductModelHessian) {
  const ProductModel model(1, 3);
  Generator gen(3);
  const ParameterVector theta = gen.real_vector(4);
  RMatrix expected = RMatrix::Zero(4, 4);
  expected(1, 3) = expected(3, 1) = 1.0;
  EXPECT_TRUE(model.dense_hessian(theta, 2, 0) == expected);
  EXPECT_DOUBLE_EQ(model.value(theta, 0, 0), theta(1) * theta(3));
}

TEST(GaussianPulseModel, ValueMatchesClosedForm) {
  const int pulses = 3;
  const std::size_t steps = 30;
  const double dt = 0.2;
  const GaussianPulseModel model(2, steps, dt, pulses);
  EXPECT_EQ(model.num_params(), 2 * pulses * 2);
  EXPECT_FALSE(model.is_linear());
  Generator gen(4);
  const ParameterVector theta = gen.real_vector(model.num_params());
  const double width = steps * dt / pulses;
  for (std::size_t j = 0; j < steps; j += 7) {
    for (int k = 0; k < 2; ++k) {
      double f = 0.0;
      for (int p = 0; p < pulses; ++p) {
        const double amp = theta((k * pulses + p) * 2);
        const double center = theta((k * pulses + p) * 2 + 1);
        const double u = (j * dt - (p + 0.5) * width) / width;
        f += amp * std::exp(-0.5 * (u - center) * (u - center));
      }
      EXPECT_NEAR(model.value(theta, j, k), f, 1e-14);
    }
  }
}

// Jacobian and Hessian against central differences of value and jacobian,
// for every registered model on 10 random draws.
TEST(ControlModel, RegisteredModelsAreFdConsistent) {
  for (const std::string& name : registered_models()) {
    const auto model = make_control_model(name, 2, 12, 0.1, ModelOptions{3});
    Generator gen(5);
    for (int draw = 0; draw < 10; ++draw) {
      const ParameterVector theta = gen.real_vector(model->num_params());
      const std::size_t j = static_cast<std::size_t>(gen.integer(0, 11));
      const int k = gen.integer(0, 1);
      const Eigen::Index np = model->num_params();
      RVector fd_jac(np);
      RMatrix fd_hess(np, np);
      const double h = 1e-6;
      for (Eigen::Index l = 0; l < np; ++l) {
        ParameterVector up = theta, dn = theta;
        up(l) += h;
        dn(l) -= h;
        fd_jac(l) = (model->value(up, j, k) - model->value(dn, j, k)) / (2 * h);
        fd_hess.col(l) =
            (model->dense_jacobian(up, j, k) - model->dense_jacobian(dn, j, k)) / (2 * h);
      }
      const RVector jac = model->dense_jacobian(theta, j, k);
      const RMatrix hess = model->dense_hessian(theta, j, k);
      EXPECT_LT((jac - fd_jac).cwiseAbs().maxCoeff(), 1e-5 * std::max(1.0, jac.cwiseAbs().maxCoeff()))
          << name;
      EXPECT_LT((hess - fd_hess).cwiseAbs().maxCoeff(), 1e-5 * std::max(1.0, hess.cwiseAbs().maxCoeff()))
          << name;
      EXPECT_EQ((hess - hess.transpose()).cwiseAbs().maxCoeff(), 0.0) << name;
    }
  }
}

TEST(ControlModel, Factory) {
  EXPECT_EQ(make_control_model("maximal", 1, 4, 0.1)->name(), "maximal");
  EXPECT_EQ(make_control_model("gaussian", 1, 4, 0.1)->name(), "gaussian");
  EXPECT_THROW(make_control_model("neural", 1, 4, 0.1), std::invalid_argument);
}

TEST(ControlModel, RequireFinite) {
  ParameterVector theta = ParameterVector::Zero(3);
  EXPECT_NO_THROW(require_finite(theta, "theta"));
  theta(1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(require_finite(theta, "theta"), std::invalid_argument);
}

}  // namespace
}  // namespace adjqoc
