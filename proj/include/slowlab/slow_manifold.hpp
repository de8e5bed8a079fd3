#pragma once

// Fast-slow decompositions for the three embeddings, closed-form slow
// manifold coefficients of orders 0 and 1, an iterative oracle for the
// invariance equation eps * Dy(x) g(x,y) = f(x,y), slow-manifold
// initialization and the normal-distance diagnostic.
//
// Fast coordinates: classical (v1,v2) in the (e1,e2) frame; relativistic
// (V1,V2) against the tetrad; symplectic the full velocity V. Distances are
// Euclidean in fast coordinates, which is frame-rotation invariant.

#include <functional>
#include <utility>

#include "slowlab/errors.hpp"
#include "slowlab/linalg.hpp"
#include "slowlab/numdiff.hpp"
#include "slowlab/systems.hpp"

namespace slowlab {

// ------------------------------------------------------------- splits

struct ClassicalSplit {
    VecX slow; // (x, u)
    VecX fast; // (v1, v2)
};

inline ClassicalSplit split_classical(const PhaseState3D& s, const FieldModel3D& model) {
    const Vec3 b = model.unit_b(s.x);
    const auto [e1, e2] = make_frame(b);
    return {{s.x.x, s.x.y, s.x.z, dot(s.v, b)}, {dot(s.v, e1), dot(s.v, e2)}};
}
inline PhaseState3D assemble_classical(const VecX& slow, const VecX& fast,
                                       const FieldModel3D& model) {
    const Vec3 x{slow[0], slow[1], slow[2]};
    const Vec3 b = model.unit_b(x);
    const auto [e1, e2] = make_frame(b);
    return {x, slow[3] * b + fast[0] * e1 + fast[1] * e2};
}

struct RelativisticSplit {
    VecX slow; // (R, V0, V3)
    VecX fast; // (V1, V2)
};

inline RelativisticSplit split_relativistic(const PhaseState4D& s, const FaradayModel& model) {
    const Tetrad t = build_tetrad(model.f0(s.R), model.omega0(s.R));
    return {{s.R[0], s.R[1], s.R[2], s.R[3], -mdot(t.e0, s.V), mdot(t.e3, s.V)},
            {mdot(t.e1, s.V), mdot(t.e2, s.V)}};
}
inline PhaseState4D assemble_relativistic(const VecX& slow, const VecX& fast,
                                          const FaradayModel& model) {
    const Vec4 R{slow[0], slow[1], slow[2], slow[3]};
    const Tetrad t = build_tetrad(model.f0(R), model.omega0(R));
    return {R, slow[4] * t.e0 + fast[0] * t.e1 + fast[1] * t.e2 + slow[5] * t.e3};
}

inline PhaseState2N assemble_symplectic(const VecX& slow, const VecX& fast) {
    return {slow, fast};
}

// ------------------------------------------------------ fast-slow forms

/// The split equations of motion: dy/dt = f(x,y), dx/dt = eps * g(x,y).
/// These are coordinate transforms of the vector right-hand sides; the
/// frame-transport terms enter through grad b and the gyrogauge vector.
inline std::pair<VecX, VecX> fast_slow_rhs_classical(const VecX& slow, const VecX& fast,
                                                     const PauliParams& p,
                                                     const FieldModel3D& model) {
    const Vec3 x{slow[0], slow[1], slow[2]};
    const double u = slow[3];
    const FieldPoint fp = model.eval(x);
    const Vec3 v = u * fp.b + fast[0] * fp.e1 + fast[1] * fp.e2;
    const Vec3 vxb = cross(v, fp.b);
    const Vec3 gbv = fp.gradb * v; // (v . grad) b
    const Vec3 c = p.M * fp.gradBmag + u * gbv;
    const double vR = dot(v, fp.gyrogauge);
    const double e = p.epsilon;

    VecX f(2);
    f[0] = fp.omega_c * dot(fp.e1, vxb) - e * dot(c, fp.e1) - e * fast[1] * vR;
    f[1] = fp.omega_c * dot(fp.e2, vxb) - e * dot(c, fp.e2) + e * fast[0] * vR;

    VecX g(4);
    g[0] = v.x;
    g[1] = v.y;
    g[2] = v.z;
    g[3] = dot(v, gbv) - p.M * dot(fp.b, fp.gradBmag);
    return {f, g};
}

inline std::pair<VecX, VecX> fast_slow_rhs_relativistic(const VecX& slow, const VecX& fast,
                                                        const PauliParams& p,
                                                        const FaradayModel& model) {
    const Vec4 R{slow[0], slow[1], slow[2], slow[3]};
    const FaradayPoint fp = model.eval(R);
    const Tetrad& t = fp.tetrad;
    const Vec4 V = slow[4] * t.e0 + fast[0] * t.e1 + fast[1] * t.e2 + slow[5] * t.e3;
    const Vec4 W = p.zeta * (fp.F1 * V) - p.M * fp.grad_omega0; // O(eps) force
    const auto de = model.tetrad_directional_derivative(R, V, default_fd_step());
    const double e = p.epsilon;

    VecX f(2);
    f[0] = p.zeta * mdot(t.e1, fp.F0 * V) + e * (mdot(t.e1, W) + mdot(de[1], V));
    f[1] = p.zeta * mdot(t.e2, fp.F0 * V) + e * (mdot(t.e2, W) + mdot(de[2], V));

    VecX g(6);
    for (int i = 0; i < 4; ++i) g[i] = V[i];
    g[4] = -(mdot(t.e0, W) + mdot(de[0], V)); // <e0, F0 V> vanishes on the kernel
    g[5] = mdot(t.e3, W) + mdot(de[3], V);
    return {f, g};
}

inline std::pair<VecX, VecX> fast_slow_rhs_symplectic(const VecX& slow, const VecX& fast,
                                                      const PauliParams& p,
                                                      const SymplecticSetup& setup) {
    const PhaseState2N d = rhs_symplectic_lorentz({slow, fast}, p, setup);
    return {d.V, fast};
}

// ------------------------------------------------------------- y_star

/// Slow-manifold fast coordinates through order N in eps.
/// Classical: y0* = 0, y1* from b x (M grad|B| + u^2 kappa) / omega_c.
inline VecX y_star_classical(const VecX& slow, const PauliParams& p,
                             const FieldModel3D& model, int N) {
    if (N == 0) return VecX(2);
    const Vec3 x{slow[0], slow[1], slow[2]};
    const double u = slow[3];
    const FieldPoint fp = model.eval(x);
    const Vec3 c = p.M * fp.gradBmag + (u * u) * fp.kappa;
    VecX y(2);
    y[0] = -(p.epsilon / fp.omega_c) * dot(c, fp.e2);
    y[1] = (p.epsilon / fp.omega_c) * dot(c, fp.e1);
    return y;
}

/// Relativistic: y0* = 0,
/// (Vperp)1* = (zeta F0/omega0^2)(zeta F1 Vpar + D_{Vpar}[F0^2/omega0^2] Vpar
///             - M grad omega0).
inline VecX y_star_relativistic(const VecX& slow, const PauliParams& p,
                                const FaradayModel& model, int N) {
    if (N == 0) return VecX(2);
    const Vec4 R{slow[0], slow[1], slow[2], slow[3]};
    const FaradayPoint fp = model.eval(R);
    const Vec4 Vpar = slow[4] * fp.tetrad.e0 + slow[5] * fp.tetrad.e3;

    const double w2 = fp.omega0 * fp.omega0;
    const auto proj_field = [&](const VecX& rv) {
        const Vec4 r = vec4_from(rv);
        const Mat4 F0 = model.f0(r);
        const double w = model.omega0(r);
        return matx_from((F0 * F0) * (1.0 / (w * w)));
    };
    const MatX dP = directional_matrix_derivative(proj_field, vecx_from(R),
                                                  vecx_from(Vpar), default_fd_step());
    Mat4 dP4;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) dP4(i, j) = dP(i, j);

    const Vec4 term = p.zeta * (fp.F1 * Vpar) + dP4 * Vpar - p.M * fp.grad_omega0;
    const Vec4 Vperp1 = (p.zeta / w2) * (fp.F0 * term);
    VecX y(2);
    y[0] = p.epsilon * mdot(fp.tetrad.e1, Vperp1);
    y[1] = p.epsilon * mdot(fp.tetrad.e2, Vperp1);
    return y;
}

/// Symplectic: V0* solves (V0)^i beta_ij = d_j H (i.e. beta V0 = -dH), and
/// g^{-1} beta V1* = -(V0 . d) V0 - g^{-1} Gamma(V0,V0).
inline VecX y_star_symplectic(const VecX& slow, const PauliParams& p,
                              const SymplecticSetup& setup, int N) {
    const MatX B = setup.beta(slow);
    const auto v0_at = [&](const VecX& z) {
        try {
            return solve(setup.beta(z), setup.gradH(z)) * -1.0;
        } catch (const SingularMatrix&) {
            throw InvalidSetup("y_star_symplectic: beta is singular");
        }
    };
    const VecX V0 = v0_at(slow);
    if (N == 0) return V0;

    const std::size_t n = slow.size();
    const MatX DV0 = central_jacobian(v0_at, slow, default_fd_step(norm_inf(slow)));
    const MatX g = setup.metric(slow);
    const std::vector<MatX> gamma =
        setup.christoffel_fd(slow, default_fd_step(norm_inf(slow)));
    VecX gammaV(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0;
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) acc += gamma[i](j, k) * V0[j] * V0[k];
        gammaV[i] = acc;
    }
    const VecX V1 = solve(B, g * (DV0 * V0) + gammaV) * -1.0;
    return V0 + p.epsilon * V1;
}

// ------------------------------------------------------------- oracle

struct OracleOptions {
    double epsilon = 0.1;
    double tol = 1e-12;
    int max_iter = 50;
    int outer_iters = 2;    // fixed-point iterations over maps
    double stencil = 1e-4;  // slow-coordinate step for the outer derivative
    double damping = 0.5;
};

struct OracleResult {
    VecX y;
    bool converged = false;
    double residual = 0;
    int iterations = 0;
};

using FastSlowFn = std::function<VecX(const VecX& slow, const VecX& fast)>;
using SlowMapFn = std::function<VecX(const VecX& slow)>;

namespace detail {

inline OracleResult oracle_pointwise_solve(const FastSlowFn& f, const FastSlowFn& g,
                                           const VecX& x, const MatX& Dy, VecX y,
                                           const OracleOptions& opt) {
    const auto residual = [&](const VecX& yy) {
        return f(x, yy) - opt.epsilon * (Dy * g(x, yy));
    };
    OracleResult out;
    VecX r = residual(y);
    double rn = norm(r);
    for (int it = 0; it < opt.max_iter; ++it) {
        out.iterations = it;
        if (rn < opt.tol) {
            out.converged = true;
            break;
        }
        const double hy = 1e-6 * (1.0 + norm_inf(y));
        const MatX Jr = central_jacobian([&](const VecX& yy) { return residual(yy); }, y, hy);
        VecX step;
        try {
            step = solve(Jr, r);
        } catch (const SingularMatrix&) {
            throw SingularJacobian("newton_refine: singular residual Jacobian");
        }
        double lambda = 1.0;
        VecX y_try = y - step;
        VecX r_try = residual(y_try);
        double rn_try = norm(r_try);
        while (rn_try > rn && lambda > 1.0 / 1024.0) {
            lambda *= opt.damping;
            y_try = y - lambda * step;
            r_try = residual(y_try);
            rn_try = norm(r_try);
        }
        y = y_try;
        r = r_try;
        rn = rn_try;
    }
    if (rn < opt.tol) out.converged = true;
    out.y = y;
    out.residual = rn;
    return out;
}

inline OracleResult oracle_map(const FastSlowFn& f, const FastSlowFn& g,
                               const SlowMapFn& y0map, const VecX& x, int level,
                               const OracleOptions& opt, bool& all_converged) {
    if (level == 0) {
        OracleResult r;
        r.y = y0map(x);
        r.converged = true;
        return r;
    }
    // stencil derivative of the previous map
    const std::size_t ns = x.size();
    const VecX y_prev = oracle_map(f, g, y0map, x, level - 1, opt, all_converged).y;
    MatX Dy(y_prev.size(), ns);
    for (std::size_t j = 0; j < ns; ++j) {
        VecX xp = x, xm = x;
        xp[j] += opt.stencil;
        xm[j] -= opt.stencil;
        const VecX yp = oracle_map(f, g, y0map, xp, level - 1, opt, all_converged).y;
        const VecX ym = oracle_map(f, g, y0map, xm, level - 1, opt, all_converged).y;
        for (std::size_t i = 0; i < y_prev.size(); ++i)
            Dy(i, j) = (yp[i] - ym[i]) / (2.0 * opt.stencil);
    }
    OracleResult r = oracle_pointwise_solve(f, g, x, Dy, y_prev, opt);
    if (!r.converged) all_converged = false;
    return r;
}

} // namespace detail

/// Brute-force solve of the invariance equation, iterating over maps: the
/// outer derivative Dy is taken by central differences of the previous
/// iterate's map over a slow-coordinate stencil, and each pointwise problem
/// is solved by damped Newton. Non-convergence is reported, not thrown.
inline OracleResult newton_refine(const FastSlowFn& f, const FastSlowFn& g,
                                  const SlowMapFn& y0map, const VecX& slow,
                                  const OracleOptions& opt) {
    bool all_converged = true;
    OracleResult r = detail::oracle_map(f, g, y0map, slow, opt.outer_iters, opt, all_converged);
    r.converged = r.converged && all_converged;
    return r;
}

// convenience wrappers per system

inline OracleResult newton_refine_classical(const VecX& slow, const PauliParams& p,
                                            const FieldModel3D& model, int N,
                                            OracleOptions opt) {
    opt.epsilon = p.epsilon;
    return newton_refine(
        [&](const VecX& x, const VecX& y) { return fast_slow_rhs_classical(x, y, p, model).first; },
        [&](const VecX& x, const VecX& y) { return fast_slow_rhs_classical(x, y, p, model).second; },
        [&](const VecX& x) { return y_star_classical(x, p, model, N); }, slow, opt);
}

inline OracleResult newton_refine_relativistic(const VecX& slow, const PauliParams& p,
                                               const FaradayModel& model, int N,
                                               OracleOptions opt) {
    opt.epsilon = p.epsilon;
    return newton_refine(
        [&](const VecX& x, const VecX& y) { return fast_slow_rhs_relativistic(x, y, p, model).first; },
        [&](const VecX& x, const VecX& y) { return fast_slow_rhs_relativistic(x, y, p, model).second; },
        [&](const VecX& x) { return y_star_relativistic(x, p, model, N); }, slow, opt);
}

inline OracleResult newton_refine_symplectic(const VecX& slow, const PauliParams& p,
                                             const SymplecticSetup& setup, int N,
                                             OracleOptions opt) {
    opt.epsilon = p.epsilon;
    return newton_refine(
        [&](const VecX& x, const VecX& y) { return fast_slow_rhs_symplectic(x, y, p, setup).first; },
        [&](const VecX& x, const VecX& y) { return fast_slow_rhs_symplectic(x, y, p, setup).second; },
        [&](const VecX& x) { return y_star_symplectic(x, p, setup, N); }, slow, opt);
}

// --------------------------------------- initialization and distance

inline PhaseState3D init_on_slow_manifold_classical(const VecX& slow, const PauliParams& p,
                                                    const FieldModel3D& model, int N) {
    return assemble_classical(slow, y_star_classical(slow, p, model, N), model);
}
inline PhaseState4D init_on_slow_manifold_relativistic(const VecX& slow, const PauliParams& p,
                                                       const FaradayModel& model, int N) {
    return assemble_relativistic(slow, y_star_relativistic(slow, p, model, N), model);
}
inline PhaseState2N init_on_slow_manifold_symplectic(const VecX& slow, const PauliParams& p,
                                                     const SymplecticSetup& setup, int N) {
    return assemble_symplectic(slow, y_star_symplectic(slow, p, setup, N));
}

/// Euclidean norm of (fast - y*_eps(slow)) in fast coordinates.
inline double normal_distance_classical(const PhaseState3D& s, const PauliParams& p,
                                        const FieldModel3D& model, int N) {
    const ClassicalSplit sp = split_classical(s, model);
    return norm(sp.fast - y_star_classical(sp.slow, p, model, N));
}
inline double normal_distance_relativistic(const PhaseState4D& s, const PauliParams& p,
                                           const FaradayModel& model, int N) {
    const RelativisticSplit sp = split_relativistic(s, model);
    return norm(sp.fast - y_star_relativistic(sp.slow, p, model, N));
}
inline double normal_distance_symplectic(const PhaseState2N& s, const PauliParams& p,
                                         const SymplecticSetup& setup, int N) {
    return norm(s.V - y_star_symplectic(s.z, p, setup, N));
}

} // namespace slowlab
