#pragma once

// Interchange format for a problem instance. A JSON document:
//
//   { "format_version": 1, "name": "...", "dim": N, "num_channels": K,
//     "h0": [[[re, im], ...], ...],        // N rows of N entries
//     "dipoles": [ <matrix>, ... ],        // K matrices
//     "alpha": [[re, im], ...], "beta": [[re, im], ...] }
//
// Doubles are written with enough digits to round-trip exactly.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "adjqoc/dynamics.hpp"
#include "adjqoc/types.hpp"

namespace adjqoc::workbench {

inline constexpr int kSystemFormatVersion = 1;

struct SystemFile {
  int format_version = kSystemFormatVersion;
  std::string name;
  Eigen::Index dim = 0;
  int num_channels = 0;
  CMatrix h0;
  std::vector<CMatrix> dipoles;
  CVector alpha;
  CVector beta;

  /// Checks shapes, Hermiticity (kHermitianTol) and unit norms (kNormTol).
  /// Throws std::invalid_argument.
  void validate() const;

  bool operator==(const SystemFile& other) const;
};

std::string dump_system(const SystemFile& sys);
/// Parses and validates. Throws std::invalid_argument on malformed input.
SystemFile parse_system(std::string_view text);

void save_system(const SystemFile& sys, const std::filesystem::path& path);
SystemFile load_system(const std::filesystem::path& path);

/// Combines the matrices with the run parameters into a QuantumSystem.
/// Identically zero dipoles are dropped, so K may be smaller than the file's.
QuantumSystem to_quantum_system(const SystemFile& file, double rho,
                                std::size_t steps, double dt);

}  // namespace adjqoc::workbench
