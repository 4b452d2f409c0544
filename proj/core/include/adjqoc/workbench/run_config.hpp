#pragma once

// Run parameters as JSON. Missing keys take the defaults below; unknown keys
// are rejected so typos do not silently fall back to a default.
//
//   { "rho": 1e6, "dt": 0.1, "J": 200, "model": "maximal", "model_pulses": 8,
//     "optimizer": "newton", "seed": 0,
//     "criteria": { "step_tol": 1e-10, "grad_tol": 1e-10, "max_iters": 10000 },
//     "trust_region": { "initial_radius": 1.0, "subproblem": "exact" },
//     "batch_width": 0, "memory_budget": 4294967296, "workers": 1 }

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "adjqoc/adjoint.hpp"
#include "adjqoc/control_model.hpp"
#include "adjqoc/optimizer.hpp"

namespace adjqoc::workbench {

enum class OptimizerKind { kNewton, kBfgs };

std::string_view to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(std::string_view s);

std::string_view to_string(SubproblemSolver s);
SubproblemSolver subproblem_from_string(std::string_view s);

struct RunConfig {
  double rho = 1e6;
  double dt = 0.1;
  std::size_t steps = 200;  ///< J
  std::string model = "maximal";
  int model_pulses = 8;
  OptimizerKind optimizer = OptimizerKind::kNewton;
  std::uint64_t seed = 0;
  TerminationCriteria criteria;
  double initial_radius = 1.0;
  SubproblemSolver subproblem = SubproblemSolver::kExact;
  std::size_t batch_width = 0;
  std::uint64_t memory_budget = kDefaultMemoryBudget;
  std::size_t workers = 1;

  /// rho >= 0, dt > 0, J >= 1, known model, valid criteria and radius.
  /// Throws std::invalid_argument.
  void validate() const;

  AdjointOptions adjoint_options() const;
  TrustRegionConfig trust_region() const;
  ModelOptions model_options() const;

  bool operator==(const RunConfig& other) const;
};

std::string dump_config(const RunConfig& cfg);
RunConfig parse_config(std::string_view text);

void save_config(const RunConfig& cfg, const std::filesystem::path& path);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace adjqoc::workbench
