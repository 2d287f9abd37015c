#pragma once

// Shared least-squares helpers for the power-law fits.

#include <cstddef>
#include <span>
#include <vector>

namespace ttscale::fitting {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rss = 0.0;  // residual sum of squares
    std::vector<double> residuals;
};

// Ordinary least squares y = slope * x + intercept. Requires >= 2 points with
// at least two distinct x values.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// Fit in log2-log2 space: y ~ a * x^slope. Inputs must be positive.
// per_doubling = 2^slope is the multiplicative growth per doubling of x.
struct PowerFit {
    double exponent = 0.0;
    double per_doubling = 1.0;
    double log2_intercept = 0.0;
    double rss = 0.0;  // in log2 space
    std::vector<double> residuals;
};
PowerFit power_fit(std::span<const double> x, std::span<const double> y);

// Pearson correlation coefficient. Requires >= 2 points and nonzero variance
// in both coordinates.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace ttscale::fitting
