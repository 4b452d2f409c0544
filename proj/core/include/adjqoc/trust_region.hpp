#pragma once

#include "adjqoc/types.hpp"

namespace adjqoc {

enum class SubproblemSolver {
  kExact,     ///< eigendecomposition + secular equation (More-Sorensen)
  kSteihaug,  ///< truncated conjugate gradients
};

/// g^T s + 1/2 s^T H s.
double quadratic_model(const RMatrix& h, const RVector& g, const RVector& s);

/// Minimizer of the model along -g within the radius.
RVector cauchy_point(const RMatrix& h, const RVector& g, double radius);

/// Approximately minimizes g^T s + 1/2 s^T H s subject to |s| <= radius.
/// The exact solver returns the global minimizer (including the hard case of
/// an indefinite H with g orthogonal to the lowest eigenspace); Steihaug-CG
/// follows negative curvature to the boundary. Both return a step whose
/// model value is no worse than the Cauchy point's.
RVector trust_region_subproblem(const RMatrix& h, const RVector& g,
                                double radius,
                                SubproblemSolver solver = SubproblemSolver::kExact);

}  // namespace adjqoc
