#pragma once

#include <vector>

namespace adjqoc::workbench {

double mean(const std::vector<double>& x);

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
double stddev(const std::vector<double>& x);

/// Quantile with linear interpolation between order statistics
/// (position p*(n-1)). Requires a nonempty sample and p in [0, 1].
double quantile(std::vector<double> x, double p);

/// Least-squares slope of y against x. Requires at least two distinct x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace adjqoc::workbench
