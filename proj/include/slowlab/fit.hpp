#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "slowlab/errors.hpp"

namespace slowlab {

struct FitResult {
    double exponent = 0;  // slope of log(metric) vs log(eps)
    double intercept = 0;
    double r_squared = 0;
};

/// Unweighted least-squares line through (ln eps, ln metric).
inline FitResult loglog_fit(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 3) throw InsufficientData("loglog_fit: need at least 3 pairs");
    std::vector<double> lx, ly;
    lx.reserve(pairs.size());
    ly.reserve(pairs.size());
    for (const auto& [eps, metric] : pairs) {
        if (!(eps > 0.0) || !(metric > 0.0))
            throw InvalidArgument("loglog_fit: values must be strictly positive");
        lx.push_back(std::log(eps));
        ly.push_back(std::log(metric));
    }
    const double n = static_cast<double>(lx.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) { mx += lx[i]; my += ly[i]; }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx == 0.0) throw InvalidArgument("loglog_fit: all abscissae equal");

    FitResult r;
    r.exponent = sxy / sxx;
    r.intercept = my - r.exponent * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double e = ly[i] - (r.intercept + r.exponent * lx[i]);
        ss_res += e * e;
    }
    // syy == 0 means the data are exactly constant; the fit is then exact.
    r.r_squared = (syy > 0.0) ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
    return r;
}

} // namespace slowlab
