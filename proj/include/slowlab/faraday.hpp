#pragma once

// Faraday-tensor field models on flat Minkowski spacetime, split as
// F = F0 + eps*F1 with the leading part purely magnetic in some frame
// (E0.B0 = 0 and |B0|^2 - |E0|^2 > 0). Provides the rotation frequency
// omega0, the null-space projectors of F0 and a Minkowski-orthonormal
// tetrad (e0,e1,e2,e3) with (e0,e3) spanning ker F0.
//
// Conventions: eta = diag(-1,1,1,1); mixed tensor F with (F V)^0 = E.v,
// (F V)^i = E_i V^0 + (v x B)_i, so eta*F is antisymmetric.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "slowlab/errors.hpp"
#include "slowlab/linalg.hpp"
#include "slowlab/numdiff.hpp"

namespace slowlab {

struct Tetrad {
    Vec4 e0, e1, e2, e3;
    const Vec4& operator[](int a) const {
        switch (a) {
            case 0: return e0;
            case 1: return e1;
            case 2: return e2;
            default: return e3;
        }
    }
};

struct FaradayPoint {
    Vec4 R;
    Mat4 F0, F1;
    double omega0 = 0;
    Vec4 grad_omega0; // index raised with eta^{-1}
    Mat4 Pperp, Ppar;
    Tetrad tetrad;
};

/// Mixed Faraday tensor from electric and magnetic 3-vectors.
inline Mat4 faraday_from_EB(const Vec3& E, const Vec3& B) {
    Mat4 F;
    for (int i = 0; i < 3; ++i) {
        F(0, i + 1) = E[i];
        F(i + 1, 0) = E[i];
    }
    F(1, 2) = B.z;
    F(2, 1) = -B.z;
    F(2, 3) = B.x;
    F(3, 2) = -B.x;
    F(3, 1) = B.y;
    F(1, 3) = -B.y;
    return F;
}

inline double antisymmetry_defect(const Mat4& F) {
    const Mat4 A = eta_times(F);
    double s = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const double d = A(i, j) + A(j, i);
            s += d * d;
        }
    return std::sqrt(s);
}

/// (E.B, |B|^2 - |E|^2). The second comes from -tr(F^2)/2; the first from
/// det(eta F) = (E.B)^2 with the sign read off the components.
inline std::pair<double, double> lorentz_scalars(const Mat4& F) {
    if (antisymmetry_defect(F) > 1e-10 * std::max(frobenius(F), 1.0))
        throw InvalidArgument("lorentz_scalars: eta*F is not antisymmetric");
    const double s_bb_ee = -trace(F * F) / 2.0;
    const double det = determinant(eta_times(F));
    // component readoff: E_i = F(0,i+1); B_x = F(2,3), B_y = F(3,1), B_z = F(1,2)
    const double eb_direct = F(0, 1) * F(2, 3) + F(0, 2) * F(3, 1) + F(0, 3) * F(1, 2);
    const double sign = (eb_direct > 0) - (eb_direct < 0);
    const double s_eb = sign * std::sqrt(std::max(det, 0.0));
    return {s_eb, s_bb_ee};
}

/// Minkowski-orthonormal tetrad with (e0,e3) spanning ker F0 and (e1,e2)
/// spanning the perpendicular flat. Deterministic conventions: e0 has
/// positive time component, e2 satisfies <e2, F0 e1> < 0 and e3 makes the
/// tetrad positively oriented.
inline Tetrad build_tetrad(const Mat4& F0, double omega0) {
    const MatX Fx = matx_from(F0);
    const SymEig sv = jacobi_eigensym(transpose(Fx) * Fx);
    const double smax = std::sqrt(std::max(sv.eigenvalues[3], 0.0));
    // a 2-dimensional kernel needs exactly two vanishing singular values
    const double s1 = std::sqrt(std::max(sv.eigenvalues[1], 0.0));
    const double s2 = std::sqrt(std::max(sv.eigenvalues[2], 0.0));
    if (s1 > 1e-8 * std::max(smax, 1.0) || s2 <= 1e-8 * std::max(smax, 1.0))
        throw DegenerateKernel("build_tetrad: null space of F0 is not 2-dimensional");

    Vec4 w[2];
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 4; ++i) w[k][i] = sv.eigenvectors(i, k);

    // Minkowski Gram matrix inside the kernel has signature (-,+).
    MatX gram(2, 2);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) gram(a, b) = mdot(w[a], w[b]);
    const SymEig ge = jacobi_eigensym(gram);
    if (!(ge.eigenvalues[0] < 0.0 && ge.eigenvalues[1] > 0.0))
        throw DegenerateKernel("build_tetrad: kernel metric is not of signature (-,+)");

    Vec4 e0 = w[0] * ge.eigenvectors(0, 0) + w[1] * ge.eigenvectors(1, 0);
    Vec4 e3 = w[0] * ge.eigenvectors(0, 1) + w[1] * ge.eigenvectors(1, 1);
    e0 *= 1.0 / std::sqrt(-mdot(e0, e0));
    e3 *= 1.0 / std::sqrt(mdot(e3, e3));
    if (e0[0] < 0) e0 *= -1.0;

    // Perpendicular flat from the projector, Gram-Schmidt over fixed seeds.
    const Mat4 Pperp = (F0 * F0) * (-1.0 / (omega0 * omega0));
    const Vec4 seeds[4] = {{0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}};
    Vec4 e1;
    double best = -1;
    for (const Vec4& s : seeds) {
        const Vec4 u = Pperp * s;
        const double n = mdot(u, u); // space-like, so Minkowski norm is positive
        if (n > best) { best = n; e1 = u; }
    }
    if (best <= 1e-12) throw DegenerateKernel("build_tetrad: perpendicular flat collapsed");
    e1 *= 1.0 / std::sqrt(mdot(e1, e1));

    Vec4 e2;
    best = -1;
    for (const Vec4& s : seeds) {
        Vec4 u = Pperp * s;
        u -= e1 * mdot(e1, u);
        const double n = mdot(u, u);
        if (n > best) { best = n; e2 = u; }
    }
    if (best <= 1e-12) throw DegenerateKernel("build_tetrad: perpendicular flat collapsed");
    e2 *= 1.0 / std::sqrt(mdot(e2, e2));
    if (mdot(e2, F0 * e1) > 0) e2 *= -1.0;

    // positive orientation: det[e0 e1 e2 e3] > 0
    MatX M(4, 4);
    for (int i = 0; i < 4; ++i) {
        M(i, 0) = e0[i];
        M(i, 1) = e1[i];
        M(i, 2) = e2[i];
        M(i, 3) = e3[i];
    }
    if (determinant(M) < 0) e3 *= -1.0;

    return {e0, e1, e2, e3};
}

struct FaradayParams {
    double B0 = 1.0;     // leading magnetic field along z-hat
    double L = 1.0;      // gradient length scale
    Vec3 E0{0, 0, 0};    // leading electric field (crossed-fields variant)
    Vec3 E1{0, 0, 0};    // order-eps uniform electric part
    Vec3 B1{0, 0, 0};    // order-eps uniform magnetic part
    Vec4 domain_lo{-1e30, -1e30, -1e30, -1e30};
    Vec4 domain_hi{1e30, 1e30, 1e30, 1e30};
    bool fd_grad_omega0 = false; // override the analytic gradient
};

class FaradayModel {
public:
    enum class Kind { UniformMagnetic, CrossedFields, GradientMagnetic };
    using Params = FaradayParams;

    FaradayModel(Kind kind, Params p) : kind_(kind), p_(p) {}

    static FaradayModel uniform_magnetic(Params p = {}) { return {Kind::UniformMagnetic, p}; }
    static FaradayModel crossed_fields(Params p = {}) { return {Kind::CrossedFields, p}; }
    static FaradayModel gradient_magnetic(Params p = {}) { return {Kind::GradientMagnetic, p}; }

    Kind kind() const { return kind_; }
    const Params& params() const { return p_; }

    bool in_domain(const Vec4& R) const {
        for (int i = 0; i < 4; ++i)
            if (R[i] < p_.domain_lo[i] || R[i] > p_.domain_hi[i]) return false;
        return true;
    }
    void require_in_domain(const Vec4& R) const {
        if (!in_domain(R))
            throw DomainExit("spacetime evaluation outside declared domain",
                             R[1], R[2], R[3]);
    }

    Mat4 f0(const Vec4& R) const {
        switch (kind_) {
            case Kind::UniformMagnetic:
                return faraday_from_EB({0, 0, 0}, {0, 0, p_.B0});
            case Kind::CrossedFields:
                return faraday_from_EB(p_.E0, {0, 0, p_.B0});
            case Kind::GradientMagnetic:
                return faraday_from_EB({0, 0, 0}, {0, 0, p_.B0 * (1.0 + R[1] / p_.L)});
        }
        return {};
    }

    Mat4 f1(const Vec4&) const { return faraday_from_EB(p_.E1, p_.B1); }

    double omega0(const Vec4& R) const {
        const Mat4 F0 = f0(R);
        const double w2 = -trace(F0 * F0) / 2.0;
        if (w2 <= 0) {
            const auto [eb, bbee] = lorentz_scalars(F0);
            throw MagnetizationViolation("omega0: |B0|^2 - |E0|^2 <= 0", eb, bbee);
        }
        return std::sqrt(w2);
    }

    /// Minkowski gradient of omega0 (index raised with eta^{-1}).
    Vec4 grad_omega0(const Vec4& R) const {
        if (!p_.fd_grad_omega0 && kind_ == Kind::GradientMagnetic) {
            const double s = (p_.B0 * (1.0 + R[1] / p_.L) >= 0) ? 1.0 : -1.0;
            return {0, s * p_.B0 / p_.L, 0, 0};
        }
        if (!p_.fd_grad_omega0 && kind_ != Kind::GradientMagnetic) return {0, 0, 0, 0};
        Vec4 g;
        const double h = default_fd_step(norm_inf(vecx_from(R)));
        for (int j = 0; j < 4; ++j) {
            Vec4 Rp = R, Rm = R;
            Rp[j] += h;
            Rm[j] -= h;
            g[j] = (omega0(Rp) - omega0(Rm)) / (2.0 * h);
        }
        g[0] = -g[0]; // raise the index
        return g;
    }

    FaradayPoint eval(const Vec4& R) const {
        require_in_domain(R);
        FaradayPoint fp;
        fp.R = R;
        fp.F0 = f0(R);
        fp.F1 = f1(R);
        const auto [eb, bbee] = lorentz_scalars(fp.F0);
        if (std::abs(eb) > 1e-10 || bbee <= 0)
            throw MagnetizationViolation("eval: magnetization assumption violated", eb, bbee);
        fp.omega0 = std::sqrt(bbee);
        fp.grad_omega0 = grad_omega0(R);
        fp.Pperp = (fp.F0 * fp.F0) * (-1.0 / (fp.omega0 * fp.omega0));
        fp.Ppar = Mat4::identity() - fp.Pperp;
        fp.tetrad = build_tetrad(fp.F0, fp.omega0);
        return fp;
    }

    /// d/ds of the tetrad field along dir at R, by central differences.
    std::array<Vec4, 4> tetrad_directional_derivative(const Vec4& R, const Vec4& dir,
                                                      double h) const {
        const double scale = std::max(1.0, norm_inf(vecx_from(dir)));
        const double s = h / scale;
        const Vec4 Rp = R + dir * s;
        const Vec4 Rm = R - dir * s;
        const Tetrad tp = build_tetrad(f0(Rp), omega0(Rp));
        const Tetrad tm = build_tetrad(f0(Rm), omega0(Rm));
        std::array<Vec4, 4> d;
        for (int a = 0; a < 4; ++a) d[a] = (tp[a] - tm[a]) * (1.0 / (2.0 * s));
        return d;
    }

private:
    Kind kind_;
    Params p_;
};

} // namespace slowlab
