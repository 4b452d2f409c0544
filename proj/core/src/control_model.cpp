#include "adjqoc/control_model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace adjqoc {

void require_finite(const ParameterVector& theta, std::string_view what) {
  if (!theta.allFinite()) {
    std::ostringstream os;
    os << what << ": parameter vector has non-finite entries";
    throw std::invalid_argument(os.str());
  }
}

ControlModel::ControlModel(int channels, std::size_t steps, double dt)
    : channels_(channels), steps_(steps), dt_(dt) {
  if (channels < 1 || channels > 3) {
    throw std::invalid_argument("ControlModel: channel count must be 1..3");
  }
  if (steps == 0) {
    throw std::invalid_argument("ControlModel: step count must be positive");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("ControlModel: dt must be positive");
  }
}

void ControlModel::check(const ParameterVector& theta, std::size_t j,
                         int k) const {
  if (j >= steps_ || k < 0 || k >= channels_) {
    std::ostringstream os;
    os << name() << ": index (j=" << j << ", k=" << k
       << ") outside J=" << steps_ << ", K=" << channels_;
    throw std::out_of_range(os.str());
  }
  if (theta.size() != num_params()) {
    std::ostringstream os;
    os << name() << ": expected " << num_params() << " parameters, got "
       << theta.size();
    throw std::out_of_range(os.str());
  }
}

double ControlModel::value(const ParameterVector& theta, std::size_t j,
                           int k) const {
  check(theta, j, k);
  return do_value(theta, j, k);
}

SparseGradient ControlModel::jacobian(const ParameterVector& theta,
                                      std::size_t j, int k) const {
  check(theta, j, k);
  return do_jacobian(theta, j, k);
}

SparseHessian ControlModel::hessian(const ParameterVector& theta,
                                    std::size_t j, int k) const {
  check(theta, j, k);
  return do_hessian(theta, j, k);
}

RVector ControlModel::dense_jacobian(const ParameterVector& theta,
                                     std::size_t j, int k) const {
  RVector out = RVector::Zero(num_params());
  for (const auto& e : jacobian(theta, j, k)) out(e.index) += e.value;
  return out;
}

RMatrix ControlModel::dense_hessian(const ParameterVector& theta,
                                    std::size_t j, int k) const {
  RMatrix out = RMatrix::Zero(num_params(), num_params());
  for (const auto& e : hessian(theta, j, k)) out(e.row, e.col) += e.value;
  return out;
}

// ---------------------------------------------------------------------------

MaximalModel::MaximalModel(int channels, std::size_t steps, double dt)
    : ControlModel(channels, steps, dt) {}

Eigen::Index MaximalModel::num_params() const {
  return static_cast<Eigen::Index>(num_channels()) *
         static_cast<Eigen::Index>(num_steps());
}

double MaximalModel::do_value(const ParameterVector& theta, std::size_t j,
                              int k) const {
  return theta(index(j, k));
}

SparseGradient MaximalModel::do_jacobian(const ParameterVector&,
                                         std::size_t j, int k) const {
  return {{index(j, k), 1.0}};
}

SparseHessian MaximalModel::do_hessian(const ParameterVector&, std::size_t,
                                       int) const {
  return {};
}

// ---------------------------------------------------------------------------

GaussianPulseModel::GaussianPulseModel(int channels, std::size_t steps,
                                       double dt, int pulses)
    : ControlModel(channels, steps, dt), pulses_(pulses) {
  if (pulses < 1) {
    throw std::invalid_argument("GaussianPulseModel: pulses must be >= 1");
  }
  width_ = static_cast<double>(steps) * dt / pulses;
}

Eigen::Index GaussianPulseModel::num_params() const {
  return static_cast<Eigen::Index>(num_channels()) * pulses_ * 2;
}

double GaussianPulseModel::offset(std::size_t j, int p) const {
  const double t = static_cast<double>(j) * dt();
  const double anchor = (p + 0.5) * width_;
  return (t - anchor) / width_;
}

double GaussianPulseModel::do_value(const ParameterVector& theta,
                                    std::size_t j, int k) const {
  double f = 0.0;
  for (int p = 0; p < pulses_; ++p) {
    const Eigen::Index base = (static_cast<Eigen::Index>(k) * pulses_ + p) * 2;
    const double d = offset(j, p) - theta(base + 1);
    f += theta(base) * std::exp(-0.5 * d * d);
  }
  return f;
}

SparseGradient GaussianPulseModel::do_jacobian(const ParameterVector& theta,
                                               std::size_t j, int k) const {
  SparseGradient g;
  g.reserve(2 * pulses_);
  for (int p = 0; p < pulses_; ++p) {
    const Eigen::Index base = (static_cast<Eigen::Index>(k) * pulses_ + p) * 2;
    const double d = offset(j, p) - theta(base + 1);
    const double e = std::exp(-0.5 * d * d);
    g.push_back({base, e});
    g.push_back({base + 1, theta(base) * d * e});
  }
  return g;
}

SparseHessian GaussianPulseModel::do_hessian(const ParameterVector& theta,
                                             std::size_t j, int k) const {
  SparseHessian h;
  h.reserve(3 * pulses_);
  for (int p = 0; p < pulses_; ++p) {
    const Eigen::Index base = (static_cast<Eigen::Index>(k) * pulses_ + p) * 2;
    const double d = offset(j, p) - theta(base + 1);
    const double e = std::exp(-0.5 * d * d);
    h.push_back({base, base + 1, d * e});
    h.push_back({base + 1, base, d * e});
    h.push_back({base + 1, base + 1, theta(base) * (d * d - 1.0) * e});
  }
  return h;
}

// ---------------------------------------------------------------------------

std::vector<std::string> registered_models() { return {"maximal", "gaussian"}; }

std::unique_ptr<ControlModel> make_control_model(std::string_view name,
                                                 int channels,
                                                 std::size_t steps, double dt,
                                                 const ModelOptions& opts) {
  if (name == "maximal") {
    return std::make_unique<MaximalModel>(channels, steps, dt);
  }
  if (name == "gaussian") {
    return std::make_unique<GaussianPulseModel>(channels, steps, dt,
                                                opts.pulses);
  }
  throw std::invalid_argument("unknown control model '" + std::string(name) +
                              "'");
}

}  // namespace adjqoc
