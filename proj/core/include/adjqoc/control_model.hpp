#pragma once

// Parameterizations f^k(j*dt; theta) of the control field.
//
// Channels and steps are zero-based: k in [0, K), j in [0, J). Controls are
// sampled at left endpoints t = j*dt.

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "adjqoc/types.hpp"

namespace adjqoc {

using ParameterVector = RVector;

/// One nonzero of a parameter gradient.
struct SparseEntry {
  Eigen::Index index;
  double value;
};
using SparseGradient = std::vector<SparseEntry>;

/// One nonzero of a symmetric parameter Hessian. Off-diagonal entries are
/// listed in both triangles.
struct SparseHessianEntry {
  Eigen::Index row;
  Eigen::Index col;
  double value;
};
using SparseHessian = std::vector<SparseHessianEntry>;

/// Throws std::invalid_argument if any entry is NaN or infinite.
void require_finite(const ParameterVector& theta, std::string_view what);

class ControlModel {
 public:
  virtual ~ControlModel() = default;

  virtual std::string_view name() const = 0;
  virtual Eigen::Index num_params() const = 0;

  int num_channels() const noexcept { return channels_; }
  std::size_t num_steps() const noexcept { return steps_; }
  double dt() const noexcept { return dt_; }

  /// f^k_j(theta). Throws std::out_of_range for bad (j, k) or theta size.
  double value(const ParameterVector& theta, std::size_t j, int k) const;
  /// d f^k_j / d theta, nonzeros only.
  SparseGradient jacobian(const ParameterVector& theta, std::size_t j,
                          int k) const;
  /// d^2 f^k_j / d theta^2, nonzeros only.
  SparseHessian hessian(const ParameterVector& theta, std::size_t j,
                        int k) const;

  RVector dense_jacobian(const ParameterVector& theta, std::size_t j,
                         int k) const;
  RMatrix dense_hessian(const ParameterVector& theta, std::size_t j,
                        int k) const;

  /// True if every hessian is identically zero, letting callers skip the
  /// curvature terms of the control.
  virtual bool is_linear() const { return false; }

 protected:
  ControlModel(int channels, std::size_t steps, double dt);

  virtual double do_value(const ParameterVector& theta, std::size_t j,
                          int k) const = 0;
  virtual SparseGradient do_jacobian(const ParameterVector& theta,
                                     std::size_t j, int k) const = 0;
  virtual SparseHessian do_hessian(const ParameterVector& theta,
                                   std::size_t j, int k) const = 0;

 private:
  void check(const ParameterVector& theta, std::size_t j, int k) const;

  int channels_;
  std::size_t steps_;
  double dt_;
};

/// Piecewise-constant control: every per-step value is its own parameter,
/// f^k_j = theta[k*J + j].
class MaximalModel final : public ControlModel {
 public:
  MaximalModel(int channels, std::size_t steps, double dt);

  std::string_view name() const override { return "maximal"; }
  Eigen::Index num_params() const override;
  bool is_linear() const override { return true; }

  Eigen::Index index(std::size_t j, int k) const noexcept {
    return static_cast<Eigen::Index>(k) *
               static_cast<Eigen::Index>(num_steps()) +
           static_cast<Eigen::Index>(j);
  }

 protected:
  double do_value(const ParameterVector& theta, std::size_t j,
                  int k) const override;
  SparseGradient do_jacobian(const ParameterVector& theta, std::size_t j,
                             int k) const override;
  SparseHessian do_hessian(const ParameterVector& theta, std::size_t j,
                           int k) const override;
};

/// Sum of Gaussian pulses per channel with trainable amplitude and center:
///   f^k(t) = sum_p A_kp exp(-(u_p(t) - c_kp)^2 / 2),  u_p(t) = (t - t_p)/w
/// where the pulse anchors t_p are evenly spaced over [0, J*dt) and the width
/// w equals the anchor spacing. Parameters are laid out as
/// theta[(k*P + p)*2 + {0: A, 1: c}]. Nonlinear in c.
class GaussianPulseModel final : public ControlModel {
 public:
  GaussianPulseModel(int channels, std::size_t steps, double dt, int pulses);

  std::string_view name() const override { return "gaussian"; }
  Eigen::Index num_params() const override;
  int pulses() const noexcept { return pulses_; }

 protected:
  double do_value(const ParameterVector& theta, std::size_t j,
                  int k) const override;
  SparseGradient do_jacobian(const ParameterVector& theta, std::size_t j,
                             int k) const override;
  SparseHessian do_hessian(const ParameterVector& theta, std::size_t j,
                           int k) const override;

 private:
  double offset(std::size_t j, int p) const;

  int pulses_;
  double width_;
};

struct ModelOptions {
  int pulses = 8;  ///< gaussian only
};

/// Names accepted by make_control_model.
std::vector<std::string> registered_models();

/// Builds a model by name. Throws std::invalid_argument for unknown names.
std::unique_ptr<ControlModel> make_control_model(std::string_view name,
                                                 int channels,
                                                 std::size_t steps, double dt,
                                                 const ModelOptions& opts = {});

}  // namespace adjqoc
