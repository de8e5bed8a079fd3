#pragma once

// Analytic 3D magnetic field models with exact derived geometry: unit vector
// b, grad|B|, grad b, field-line curvature, a smooth orthonormal frame
// (e1,e2,b), the frame-gauge vector R = grad(e2).e1 and the gyrofrequency.
//
// Units are dimensionless with m = 1, q = +/-1 by default.

#include <cmath>
#include <functional>
#include <string>

#include "slowlab/errors.hpp"
#include "slowlab/linalg.hpp"
#include "slowlab/numdiff.hpp"

namespace slowlab {

struct FieldPoint {
    Vec3 x;
    Vec3 B;
    double Bmag = 0;
    Vec3 b;           // B/|B|
    Vec3 gradBmag;    // grad |B|
    Mat3 gradb;       // entry (i,j) = d_j b_i
    Vec3 kappa;       // (grad b) . b, the field-line curvature
    Vec3 e1, e2;      // (e1,e2,b) orthonormal right-handed
    Vec3 gyrogauge;   // R_j = e1 . d_j e2
    double omega_c = 0; // q |B| / m
};

/// Deterministic smooth frame: project a fixed reference axis out of b.
/// Reference is z-hat; when b is nearly parallel to it (|b x zhat| < 0.1)
/// fall back to x-hat. The arbitrariness of this choice is exactly what the
/// gyrogauge vector tracks.
inline std::pair<Vec3, Vec3> make_frame(const Vec3& b) {
    if (std::abs(norm(b) - 1.0) > 1e-9)
        throw InvalidArgument("make_frame: b must be a unit vector");
    const Vec3 zhat{0, 0, 1};
    const Vec3 xhat{1, 0, 0};
    const Vec3 a = (norm(cross(b, zhat)) < 0.1) ? xhat : zhat;
    const Vec3 e1 = normalized(a - b * dot(a, b));
    const Vec3 e2 = cross(b, e1);
    return {e1, e2};
}

struct Field3DParams {
    double B0 = 1.0;
    double L = 1.0;     // length scale (gradient / mirror)
    double pinch = 0.5; // azimuthal field gradient (screw pinch)
    double q = 1.0;     // particle charge
    double m = 1.0;     // particle mass
    Vec3 domain_lo{-2, -2, -2};
    Vec3 domain_hi{2, 2, 2};
};

class FieldModel3D {
public:
    enum class Kind { Uniform, LinearGradient, MagneticMirror, ScrewPinch };
    using Params = Field3DParams;

    FieldModel3D(Kind kind, Params p) : kind_(kind), p_(p) {
        if (p_.m <= 0) throw InvalidArgument("FieldModel3D: mass must be positive");
        if (p_.B0 == 0) throw InvalidArgument("FieldModel3D: B0 must be nonzero");
    }

    static FieldModel3D uniform(Params p = {}) { return {Kind::Uniform, p}; }
    static FieldModel3D linear_gradient(Params p = {}) { return {Kind::LinearGradient, p}; }
    static FieldModel3D magnetic_mirror(Params p = {}) { return {Kind::MagneticMirror, p}; }
    static FieldModel3D screw_pinch(Params p = {}) { return {Kind::ScrewPinch, p}; }

    Kind kind() const { return kind_; }
    const Params& params() const { return p_; }
    double charge() const { return p_.q; }
    double mass() const { return p_.m; }

    bool in_domain(const Vec3& x) const {
        for (int i = 0; i < 3; ++i)
            if (x[i] < p_.domain_lo[i] || x[i] > p_.domain_hi[i]) return false;
        return true;
    }
    void require_in_domain(const Vec3& x) const {
        if (!in_domain(x))
            throw DomainExit("field evaluation outside declared domain", x.x, x.y, x.z);
    }

    Vec3 field(const Vec3& x) const {
        const double B0 = p_.B0, L = p_.L;
        switch (kind_) {
            case Kind::Uniform:
                return {0, 0, B0};
            case Kind::LinearGradient:
                return {0, 0, B0 * (1.0 + x.x / L)};
            case Kind::MagneticMirror:
                return {-B0 * x.x * x.z / (L * L), -B0 * x.y * x.z / (L * L),
                        B0 * (1.0 + x.z * x.z / (L * L))};
            case Kind::ScrewPinch:
                return {-p_.pinch * x.y, p_.pinch * x.x, B0};
        }
        return {};
    }

    /// Closed-form Jacobian, entry (i,j) = d_j B_i.
    Mat3 field_jacobian(const Vec3& x) const {
        Mat3 J;
        const double B0 = p_.B0, L2 = p_.L * p_.L;
        switch (kind_) {
            case Kind::Uniform:
                break;
            case Kind::LinearGradient:
                J(2, 0) = B0 / p_.L;
                break;
            case Kind::MagneticMirror:
                J(0, 0) = -B0 * x.z / L2;
                J(0, 2) = -B0 * x.x / L2;
                J(1, 1) = -B0 * x.z / L2;
                J(1, 2) = -B0 * x.y / L2;
                J(2, 2) = 2.0 * B0 * x.z / L2;
                break;
            case Kind::ScrewPinch:
                J(0, 1) = -p_.pinch;
                J(1, 0) = p_.pinch;
                break;
        }
        return J;
    }

    double field_magnitude(const Vec3& x) const { return norm(field(x)); }

    double omega_c(const Vec3& x) const { return p_.q * field_magnitude(x) / p_.m; }

    Vec3 unit_b(const Vec3& x) const {
        const Vec3 B = field(x);
        const double Bm = norm(B);
        if (Bm < 1e-12) throw DegenerateField("unit_b: |B| below 1e-12");
        return B * (1.0 / Bm);
    }

    Vec3 grad_Bmag(const Vec3& x) const {
        const Vec3 B = field(x);
        const Mat3 J = field_jacobian(x);
        const double Bm = norm(B);
        if (Bm < 1e-12) throw DegenerateField("grad_Bmag: |B| below 1e-12");
        Vec3 g;
        for (int j = 0; j < 3; ++j)
            g[j] = (B.x * J(0, j) + B.y * J(1, j) + B.z * J(2, j)) / Bm;
        return g;
    }

    /// Entry (i,j) = d_j b_i, from the closed-form field Jacobian.
    Mat3 grad_b(const Vec3& x) const {
        const Vec3 B = field(x);
        const double Bm = norm(B);
        if (Bm < 1e-12) throw DegenerateField("grad_b: |B| below 1e-12");
        const Mat3 J = field_jacobian(x);
        const Vec3 gBm = grad_Bmag(x);
        Mat3 G;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                G(i, j) = J(i, j) / Bm - B[i] * gBm[j] / (Bm * Bm);
        return G;
    }

    /// d_j of the frame vectors by central differences of make_frame(b(x)).
    /// The frame is defined through the smooth field formula, so the stencil
    /// may poke slightly past the domain box.
    std::pair<Mat3, Mat3> frame_jacobians(const Vec3& x, double h) const {
        Mat3 de1, de2;
        for (int j = 0; j < 3; ++j) {
            Vec3 xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            const auto [e1p, e2p] = make_frame(unit_b(xp));
            const auto [e1m, e2m] = make_frame(unit_b(xm));
            for (int i = 0; i < 3; ++i) {
                de1(i, j) = (e1p[i] - e1m[i]) / (2.0 * h);
                de2(i, j) = (e2p[i] - e2m[i]) / (2.0 * h);
            }
        }
        return {de1, de2};
    }

    Vec3 gyrogauge(const Vec3& x, double h) const {
        const auto [de1, de2] = frame_jacobians(x, h);
        const auto [e1, e2] = make_frame(unit_b(x));
        (void)e2;
        Vec3 R;
        for (int j = 0; j < 3; ++j)
            R[j] = e1.x * de2(0, j) + e1.y * de2(1, j) + e1.z * de2(2, j);
        return R;
    }

    FieldPoint eval(const Vec3& x) const {
        require_in_domain(x);
        FieldPoint fp;
        fp.x = x;
        fp.B = field(x);
        fp.Bmag = norm(fp.B);
        if (fp.Bmag < 1e-12) throw DegenerateField("eval: |B| below 1e-12");
        fp.b = fp.B * (1.0 / fp.Bmag);
        fp.gradBmag = grad_Bmag(x);
        fp.gradb = grad_b(x);
        fp.kappa = fp.gradb * fp.b;
        const auto [e1, e2] = make_frame(fp.b);
        fp.e1 = e1;
        fp.e2 = e2;
        fp.gyrogauge = gyrogauge(x, default_fd_step(norm_inf(x)));
        fp.omega_c = p_.q * fp.Bmag / p_.m;
        return fp;
    }

    double divergence_fd(const Vec3& x, double h) const {
        double div = 0;
        for (int j = 0; j < 3; ++j) {
            Vec3 xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            div += (field(xp)[j] - field(xm)[j]) / (2.0 * h);
        }
        return div;
    }

    /// Max relative deviation of the analytic gradBmag/gradb (and the
    /// default-step gyrogauge) from central differences at step h.
    double check_gradients(const std::vector<Vec3>& points, double h) const {
        double worst = 0;
        for (const Vec3& x : points) {
            require_in_domain(x);
            const double scale = std::max(field_magnitude(x), 1.0);

            Vec3 g_fd;
            Mat3 gb_fd;
            for (int j = 0; j < 3; ++j) {
                Vec3 xp = x, xm = x;
                xp[j] += h;
                xm[j] -= h;
                g_fd[j] = (field_magnitude(xp) - field_magnitude(xm)) / (2.0 * h);
                const Vec3 bp = unit_b(xp), bm = unit_b(xm);
                for (int i = 0; i < 3; ++i) gb_fd(i, j) = (bp[i] - bm[i]) / (2.0 * h);
            }
            worst = std::max(worst, norm(grad_Bmag(x) - g_fd) / scale);
            worst = std::max(worst, frobenius(grad_b(x) - gb_fd) / std::max(frobenius(grad_b(x)), 1.0));

            const Vec3 Rfd = gyrogauge(x, h);
            const Vec3 Rdef = gyrogauge(x, default_fd_step(norm_inf(x)));
            worst = std::max(worst, norm(Rdef - Rfd) / std::max(norm(Rdef), 1.0));
        }
        return worst;
    }

private:
    Kind kind_;
    Params p_;
};

} // namespace slowlab
