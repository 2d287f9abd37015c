#include "ttscale/fitting.hpp"

#include <cmath>

#include "ttscale/error.hpp"

namespace ttscale::fitting {

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) fail("fitting", "x/y size mismatch");
    const std::size_t n = x.size();
    if (n < 2) fail("fitting", "need at least 2 points");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) fail("fitting", "degenerate fit: all x values identical");

    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.residuals.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        fit.residuals[i] = y[i] - (fit.slope * x[i] + fit.intercept);
        fit.rss += fit.residuals[i] * fit.residuals[i];
    }
    return fit;
}

PowerFit power_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) fail("fitting", "x/y size mismatch");
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) fail("fitting", "power fit needs positive samples");
        lx[i] = std::log2(x[i]);
        ly[i] = std::log2(y[i]);
    }
    const LinearFit lin = linear_fit(lx, ly);
    PowerFit fit;
    fit.exponent = lin.slope;
    fit.per_doubling = std::exp2(lin.slope);
    fit.log2_intercept = lin.intercept;
    fit.rss = lin.rss;
    fit.residuals = lin.residuals;
    return fit;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) fail("fitting", "x/y size mismatch");
    const std::size_t n = x.size();
    if (n < 2) fail("fitting", "pearson needs at least 2 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) fail("fitting", "pearson undefined: zero variance");
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace ttscale::fitting
