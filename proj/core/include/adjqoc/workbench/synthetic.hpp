#pragma once

#include <cstdint>

#include "adjqoc/control_model.hpp"
#include "adjqoc/workbench/system_file.hpp"

namespace adjqoc::workbench {

/// Random instance: diagonal H0 with sorted standard-normal entries, dipoles
/// (A + A^dagger)/2 with standard-normal complex A, alpha = e_1, beta = e_N.
/// Requires N >= 2 and K in 1..3.
SystemFile generate_synthetic(Eigen::Index dim, int channels,
                              std::uint64_t seed);

/// theta0 with independent standard-normal coordinates.
ParameterVector draw_initial_theta(Eigen::Index num_params,
                                   std::uint64_t seed);

/// Mixes a base seed with a stream index (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace adjqoc::workbench
