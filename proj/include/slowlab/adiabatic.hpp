#pragma once

// Second-order adiabatic invariants mu2 for the three systems, the normal
// Hessian of mu2 in fast coordinates with its sign-definiteness check, and
// trajectory drift statistics.
//
//   classical:    mu2 = (m/2) |v x b|^2 / omega_c
//   relativistic: mu2 = zeta <Vperp, Vperp> / (2 omega0)
//   symplectic:   mu2 = g(V + J gradH, V + J gradH) / 2

#include <cmath>

#include "slowlab/errors.hpp"
#include "slowlab/integrate.hpp"
#include "slowlab/linalg.hpp"
#include "slowlab/numdiff.hpp"
#include "slowlab/slow_manifold.hpp"
#include "slowlab/systems.hpp"

namespace slowlab {

inline double mu2_classical(const PhaseState3D& s, const PauliParams& p,
                            const FieldModel3D& model) {
    model.require_in_domain(s.x);
    const Vec3 b = model.unit_b(s.x);
    const Vec3 vxb = cross(s.v, b);
    return 0.5 * p.m * dot(vxb, vxb) / model.omega_c(s.x);
}

inline double mu2_relativistic(const PhaseState4D& s, const PauliParams& p,
                               const FaradayModel& model) {
    model.require_in_domain(s.R);
    const Mat4 F0 = model.f0(s.R);
    const double w0 = model.omega0(s.R);
    const Mat4 Pperp = (F0 * F0) * (-1.0 / (w0 * w0));
    const Vec4 Vperp = Pperp * s.V;
    return p.zeta * mdot(Vperp, Vperp) / (2.0 * w0);
}

inline double mu2_symplectic(const PhaseState2N& s, const PauliParams&,
                             const SymplecticSetup& setup) {
    const CompatibleStructure cs = setup.structure(s.z);
    const VecX w = s.V + cs.J * solve(cs.g, setup.gradH(s.z));
    return 0.5 * dot(w, cs.g * w);
}

/// Central-difference Hessian of mu2 over the fast coordinates, evaluated
/// at fast = y0*(slow). Symmetrized before use.
inline MatX normal_hessian_classical(const VecX& slow, const PauliParams& p,
                                     const FieldModel3D& model, double h = 0.0) {
    const VecX y0 = y_star_classical(slow, p, model, 0);
    if (h <= 0) h = 1e-4 * (1.0 + norm_inf(y0));
    return central_hessian(
        [&](const VecX& y) {
            return mu2_classical(assemble_classical(slow, y, model), p, model);
        },
        y0, h);
}

inline MatX normal_hessian_relativistic(const VecX& slow, const PauliParams& p,
                                        const FaradayModel& model, double h = 0.0) {
    const VecX y0 = y_star_relativistic(slow, p, model, 0);
    if (h <= 0) h = 1e-4 * (1.0 + norm_inf(y0));
    return central_hessian(
        [&](const VecX& y) {
            return mu2_relativistic(assemble_relativistic(slow, y, model), p, model);
        },
        y0, h);
}

inline MatX normal_hessian_symplectic(const VecX& slow, const PauliParams& p,
                                      const SymplecticSetup& setup, double h = 0.0) {
    const VecX y0 = y_star_symplectic(slow, p, setup, 0);
    if (h <= 0) h = 1e-4 * (1.0 + norm_inf(y0));
    return central_hessian(
        [&](const VecX& y) { return mu2_symplectic({slow, y}, p, setup); }, y0, h);
}

struct EigenCheck {
    double min_eigenvalue = 0;
    bool definite = false;
};

inline EigenCheck min_eigen_check(MatX H) {
    H = (H + transpose(H)) * 0.5;
    const SymEig e = jacobi_eigensym(H);
    EigenCheck out;
    out.min_eigenvalue = e.eigenvalues[0];
    out.definite = out.min_eigenvalue > 1e-10 * frobenius(H);
    return out;
}

struct DriftStat {
    double mu2_initial = 0;
    double max_abs_drift = 0;
    double time_horizon = 0;
    std::size_t samples = 0;
};

/// Max over stored samples of |mu2(t) - mu2(0)|, from the record's mu2
/// observable column.
inline DriftStat drift_stat(const TrajectoryRecord& rec) {
    std::size_t col = rec.observable_names.size();
    for (std::size_t k = 0; k < rec.observable_names.size(); ++k)
        if (rec.observable_names[k] == "mu2") col = k;
    if (col == rec.observable_names.size())
        throw InsufficientData("drift_stat: record has no mu2 column");
    const std::vector<double>& mu = rec.observables[col];
    if (mu.size() < 2) throw InsufficientData("drift_stat: need at least 2 samples");
    DriftStat st;
    st.mu2_initial = mu.front();
    st.samples = mu.size();
    st.time_horizon = rec.times.back() - rec.times.front();
    for (double v : mu)
        st.max_abs_drift = std::max(st.max_abs_drift, std::abs(v - mu.front()));
    return st;
}

} // namespace slowlab
