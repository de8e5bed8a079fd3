#pragma once

// Central finite differences used for derivative cross-checks, frame and
// tetrad derivatives, Christoffel symbols and the slow-manifold oracle.

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "slowlab/linalg.hpp"

namespace slowlab {

/// Central-difference optimum: eps^(1/3) * max(1, |x|_inf).
inline double default_fd_step(double xscale = 0.0) {
    static const double base = std::cbrt(std::numeric_limits<double>::epsilon());
    return base * std::max(1.0, xscale);
}
inline double default_fd_step(const VecX& x) { return default_fd_step(norm_inf(x)); }

namespace detail {
inline std::string point_string(const VecX& x) {
    std::string s = "(";
    for (std::size_t i = 0; i < x.size(); ++i)
        s += (i ? "," : "") + std::to_string(x[i]);
    return s + ")";
}
} // namespace detail

/// Jacobian entry (i,j) = (f_i(x+h e_j) - f_i(x-h e_j)) / (2h).
inline MatX central_jacobian(const std::function<VecX(const VecX&)>& f,
                             const VecX& x, double h) {
    if (!(h > 0.0)) throw InvalidArgument("central_jacobian: step must be positive");
    const std::size_t n = x.size();
    MatX J;
    for (std::size_t j = 0; j < n; ++j) {
        VecX xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const double denom = xp[j] - xm[j]; // actual representable step
        const VecX fp = f(xp);
        const VecX fm = f(xm);
        if (!all_finite(fp))
            throw EvaluationError("central_jacobian: non-finite value", detail::point_string(xp));
        if (!all_finite(fm))
            throw EvaluationError("central_jacobian: non-finite value", detail::point_string(xm));
        if (j == 0) J = MatX(fp.size(), n);
        for (std::size_t i = 0; i < fp.size(); ++i) J(i, j) = (fp[i] - fm[i]) / denom;
    }
    return J;
}

inline VecX central_gradient(const std::function<double(const VecX&)>& f,
                             const VecX& x, double h) {
    MatX J = central_jacobian(
        [&](const VecX& y) { return VecX{f(y)}; }, x, h);
    VecX g(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) g[j] = J(0, j);
    return g;
}

/// d/ds W(x + s*dir) at s=0 by central differences.
inline MatX directional_matrix_derivative(const std::function<MatX(const VecX&)>& W,
                                          const VecX& x, const VecX& dir, double h) {
    const double scale = std::max(1.0, norm_inf(dir));
    const double s = h / scale;
    const MatX Wp = W(x + s * dir);
    const MatX Wm = W(x - s * dir);
    return (Wp - Wm) * (1.0 / (2.0 * s));
}

/// Symmetrized central-difference Hessian.
inline MatX central_hessian(const std::function<double(const VecX&)>& f,
                            const VecX& x, double h) {
    const std::size_t n = x.size();
    MatX H(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            VecX pp = x, pm = x, mp = x, mm = x;
            pp[i] += h; pp[j] += h;
            pm[i] += h; pm[j] -= h;
            mp[i] -= h; mp[j] += h;
            mm[i] -= h; mm[j] -= h;
            const double v = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
            H(i, j) = v;
            H(j, i) = v;
        }
    return H;
}

} // namespace slowlab
