// Acceptance run. Prints one PASS/FAIL line per criterion (8 is a note) and
// exits nonzero when any criterion fails. Optional argv[1]: directory for
// bench.csv, trials.csv, results.json and summary.txt.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "adjqoc/adjoint.hpp"
#include "adjqoc/dynamics.hpp"
#include "adjqoc/parallel.hpp"
#include "adjqoc/spectral.hpp"
#include "adjqoc/workbench/experiments.hpp"
#include "oracles.hpp"

using namespace adjqoc;
using adjqoc::testing::Generator;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;
std::string summary;

void emit(const std::string& line) {
  std::printf("%s\n", line.c_str());
  std::fflush(stdout);
  summary += line + "\n";
}

void report(int id, const char* title, const Verdict& v, double seconds) {
  if (!v.pass) ++failures;
  char head[128];
  std::snprintf(head, sizeof head, "criterion %d %s: %s [", id, v.pass ? "PASS" : "FAIL", title);
  char tail[32];
  std::snprintf(tail, sizeof tail, "] (%.1f s)", seconds);
  emit(head + v.detail + tail);
}

template <class F>
void run(int id, const char* title, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = f();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(id, title, v, s);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

struct Instance {
  QuantumSystem sys;
  MaximalModel model;
  ParameterVector theta;
};

// Instance i of the 20-system derivative set.
Instance derivative_instance(int i) {
  static const Eigen::Index dims[] = {2, 4, 8};
  static const int channels[] = {1, 3};
  static const std::size_t steps[] = {4, 16};
  static const double rhos[] = {0.0, 1.0, 1e6};
  const Eigen::Index n = dims[i % 3];
  const int k = channels[i % 2];
  const std::size_t j = steps[(i / 2) % 2];
  const double rho = rhos[(i / 6) % 3];
  Generator gen(1000 + static_cast<std::uint64_t>(i));
  std::vector<HermitianMatrix> dip;
  for (int c = 0; c < k; ++c) dip.emplace_back(gen.hermitian(n));
  QuantumSystem sys = make_system(HermitianMatrix(gen.hermitian(n)), std::move(dip),
                                  gen.unit_vector(n), gen.unit_vector(n), rho, j, 0.1);
  MaximalModel model(k, j, 0.1);
  ParameterVector theta = gen.real_vector(model.num_params());
  return {std::move(sys), std::move(model), std::move(theta)};
}

// Unwound cost from scratch with the series exponential.
double oracle_cost(const Instance& in, const ParameterVector& theta) {
  const QuantumSystem& s = in.sys;
  CVector a = s.alpha;
  for (std::size_t j = 0; j < s.steps; ++j) {
    CMatrix h = s.h0.matrix();
    for (int k = 0; k < s.num_channels(); ++k) {
      h += theta(in.model.index(j, k)) * s.dipoles[static_cast<std::size_t>(k)].matrix();
    }
    a = testing::expm_taylor(Complex(0.0, -s.dt) * h) * a;
  }
  return 0.5 * theta.squaredNorm() + 0.5 * s.rho * (a - s.beta).squaredNorm();
}

double rel_inf(const RMatrix& a, const RMatrix& ref) {
  return (a - ref).cwiseAbs().maxCoeff() / std::max(ref.cwiseAbs().maxCoeff(), 1e-300);
}

Verdict gradient_agreement() {
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Instance in = derivative_instance(i);
    const RVector g = first_order_pass(in.sys, in.model, in.theta).grad;
    RVector fd(g.size());
    for (Eigen::Index p = 0; p < g.size(); ++p) {
      const double h = 1e-5 * (1.0 + std::abs(in.theta(p)));
      ParameterVector up = in.theta, dn = in.theta;
      up(p) += h;
      dn(p) -= h;
      fd(p) = (oracle_cost(in, up) - oracle_cost(in, dn)) / (up(p) - dn(p));
    }
    worst = std::max(worst, rel_inf(g, fd));
  }
  return {worst < 1e-6, fmt("20 systems, max rel inf-norm error %.2e < 1e-6", worst)};
}

Verdict hessian_agreement() {
  double worst = 0.0, worst_asym = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Instance in = derivative_instance(i);
    const SecondOrderResult r = second_order_pass(in.sys, in.model, in.theta);
    const Eigen::Index np = in.theta.size();
    RMatrix fd(np, np);
    for (Eigen::Index p = 0; p < np; ++p) {
      const double h = 1e-4 * (1.0 + std::abs(in.theta(p)));
      ParameterVector up = in.theta, dn = in.theta;
      up(p) += h;
      dn(p) -= h;
      fd.col(p) = (first_order_pass(in.sys, in.model, up).grad -
                   first_order_pass(in.sys, in.model, dn).grad) /
                  (up(p) - dn(p));
    }
    const RMatrix sym = 0.5 * (fd + fd.transpose());
    worst = std::max(worst, rel_inf(r.hess, sym));
    worst_asym = std::max(worst_asym, r.asymmetry);
  }
  return {worst < 1e-5 && worst_asym < 1e-8,
          fmt("max rel error %.2e < 1e-5, max asymmetry %.2e < 1e-8", worst, worst_asym)};
}

Verdict frechet_kernels() {
  Generator gen(77);
  double worst1 = 0.0, worst2 = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Eigen::Index n = t % 2 == 0 ? 4 : 8;
    CMatrix h;
    if (t == 0) {
      RVector lambda(4);
      lambda << -0.7, 0.3, 0.3 + 1e-12, 1.1;
      h = gen.hermitian_with_spectrum(lambda);
    } else {
      h = gen.hermitian(n);
    }
    const double dt = 0.1;
    const SpectralFactor sf = decompose(HermitianMatrix(h), dt);
    const CMatrix z = Complex(0.0, -dt) * HermitianMatrix(h).matrix();
    // Directions of the propagation kind: -i dt M with M Hermitian.
    const CMatrix w1 = Complex(0.0, -dt) * gen.hermitian(h.rows());
    const CMatrix w2 = Complex(0.0, -dt) * gen.hermitian(h.rows());
    worst1 = std::max(worst1, testing::rel_frobenius(frechet_first(sf, w1),
                                                     testing::fd_frechet_first(z, w1)));
    worst2 = std::max(worst2, testing::rel_frobenius(frechet_second(sf, w1, w2),
                                                     testing::fd_frechet_second(z, w1, w2)));
  }
  return {worst1 < 1e-7 && worst2 < 1e-5,
          fmt("50 matrices incl. 1e-12 gap: first %.2e < 1e-7, second %.2e < 1e-5", worst1,
              worst2)};
}

Verdict unitarity() {
  Generator gen(5);
  double worst = 0.0;
  for (const Eigen::Index n : {4, 8}) {
    std::vector<HermitianMatrix> dip{HermitianMatrix(gen.hermitian(n)),
                                     HermitianMatrix(gen.hermitian(n))};
    const QuantumSystem sys = make_system(HermitianMatrix(gen.hermitian(n)), std::move(dip),
                                          gen.unit_vector(n), gen.unit_vector(n), 1.0, 1000, 0.1);
    const MaximalModel model(2, 1000, 0.1);
    PropagateOptions lean;
    lean.with_frechet = false;
    const TrajectoryCache c = propagate(sys, model, gen.real_vector(model.num_params()), lean);
    for (const CVector& a : c.states) worst = std::max(worst, std::abs(a.norm() - 1.0));
  }
  return {worst < 1e-10, fmt("J=1000, max |norm-1| %.2e < 1e-10", worst)};
}

Verdict scaling(const std::optional<std::filesystem::path>& out) {
  workbench::ScalingOptions o;
  o.second_order_max_steps = 256;
  const workbench::ScalingResult r = workbench::bench_scaling(o);
  if (out) workbench::write_bench_csv(*out / "bench.csv", r.records);
  bool pass = true;
  std::string detail;
  for (const workbench::ScalingSlope& s : r.slopes) {
    const bool gated = s.algorithm == workbench::PassKind::kFirstOrder;
    if (gated) pass = pass && s.slope >= 0.8 && s.slope <= 1.2;
    if (!detail.empty()) detail += ", ";
    detail += std::string(workbench::to_string(s.algorithm)) + " N=" + std::to_string(s.dim) +
              fmt(" slope %.3f", s.slope) + (gated ? "" : " (reported, J<=256)");
  }
  return {pass, detail + "; gate [0.8, 1.2] on first_order"};
}

struct StudyVerdicts {
  Verdict optimizer;
  Verdict positivity;
};

StudyVerdicts optimizer_study(const std::optional<std::filesystem::path>& out) {
  workbench::RunConfig cfg;  // rho 1e6, dt 0.1, J 200, tolerances 1e-10, 1e4 iterations
  cfg.seed = 2024;
  workbench::StudyOptions o;
  o.num_trials = 20;
  o.workers = default_worker_count();
  o.on_trial = [](const workbench::TrialRecord& t) {
    std::printf("  trial %zu: newton %zu it, bfgs %zu it, costs %.6g / %.6g\n", t.trial,
                t.newton.iterations, t.bfgs.iterations, t.newton.final_cost, t.bfgs.final_cost);
    std::fflush(stdout);
  };
  const workbench::StudyResult r = workbench::study(std::nullopt, cfg, o);
  if (out) {
    workbench::write_trials_csv(*out / "trials.csv", r.trials);
    workbench::write_study_json(*out / "results.json", cfg, r);
  }
  const double n = static_cast<double>(r.trials.size());
  int before_cap = 0, fewer = 0, costs_agree = 0, small_grad = 0, convergent = 0, positive = 0;
  double min_eig = INFINITY;
  for (const workbench::TrialRecord& t : r.trials) {
    const bool newton_conv = t.newton.termination != TerminationReason::kMaxIters;
    if (newton_conv && t.bfgs.termination != TerminationReason::kMaxIters) ++before_cap;
    if (t.newton.iterations < t.bfgs.iterations) ++fewer;
    const double hi = std::max(t.newton.final_cost, t.bfgs.final_cost);
    const double lo = std::min(t.newton.final_cost, t.bfgs.final_cost);
    if (hi <= 1.5 * lo) ++costs_agree;
    if (t.newton.grad_norm < 1e-3) ++small_grad;
    if (newton_conv) {
      ++convergent;
      const double e = t.newton.hessian_min_eig.value_or(-INFINITY);
      min_eig = std::min(min_eig, e);
      if (e > -1e-8) ++positive;
    }
  }
  const bool a = before_cap >= 0.95 * n, b = fewer >= 0.8 * n;
  const bool c = costs_agree >= 0.9 * n, d = small_grad >= 0.9 * n;
  const double mean_ratio = r.ratios.front().mean;
  StudyVerdicts v;
  v.optimizer.pass = a && b && c && d && n == 20;
  v.optimizer.detail = "(a) both before cap " + std::to_string(before_cap) + "/20" +
                       ", (b) Newton fewer iterations " + std::to_string(fewer) + "/20" +
                       ", (c) costs within 1.5x " + std::to_string(costs_agree) + "/20" +
                       ", (d) Newton grad norm < 1e-3 " + std::to_string(small_grad) + "/20" +
                       fmt("; mean iteration ratio %.2f", mean_ratio);
  v.positivity.pass = convergent > 0 && positive == convergent;
  v.positivity.detail = std::to_string(positive) + "/" + std::to_string(convergent) +
                        " convergent Newton solutions" + fmt(", smallest eigenvalue %.3e", min_eig);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  std::optional<std::filesystem::path> out;
  if (argc > 1) {
    out = argv[1];
    std::filesystem::create_directories(*out);
  }
  run(1, "gradient agreement", gradient_agreement);
  run(2, "Hessian agreement", hessian_agreement);
  run(3, "exponential derivative kernels", frechet_kernels);
  run(4, "unitarity", unitarity);
  run(5, "first-order pass scaling", [&] { return scaling(out); });

  const auto t0 = std::chrono::steady_clock::now();
  StudyVerdicts sv;
  try {
    sv = optimizer_study(out);
  } catch (const std::exception& e) {
    sv.optimizer = {false, std::string("exception: ") + e.what()};
    sv.positivity = sv.optimizer;
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(6, "optimizer comparison", sv.optimizer, s);
  report(7, "converged Hessian positivity", sv.positivity, 0.0);

  emit(
      "criterion 8 NOTE: absolute molecular table values are not reproducible without the "
      "molecular H0/M matrices; supply them as a system file to attempt it");
  emit((failures == 0 ? "ALL PASS: " : "FAILURES: ") + std::to_string(failures) +
       " criteria failed");
  if (out) std::ofstream(*out / "summary.txt") << summary;
  return failures == 0 ? 0 : 1;
}
