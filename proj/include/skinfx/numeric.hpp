#pragma once

#include <span>
#include <vector>

namespace skinfx {

/// Pairwise (tree) summation; the order of additions depends only on the length.
double pairwise_sum(std::span<const double> values);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rSquared = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace skinfx
