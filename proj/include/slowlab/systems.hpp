#pragma once

// Right-hand sides, Hamiltonians and exact circle actions for the three
// embeddings (classical Pauli, relativistic Pauli, symplectic Lorentz) and
// the guiding-center reference dynamics.

#include <cmath>
#include <utility>

#include "slowlab/errors.hpp"
#include "slowlab/faraday.hpp"
#include "slowlab/field3d.hpp"
#include "slowlab/linalg.hpp"
#include "slowlab/symplectic.hpp"

namespace slowlab {

struct PauliParams {
    double m = 1.0;       // mass
    double q = 1.0;       // charge
    double M = 0.0;       // Pauli moment per unit mass
    double zeta = 1.0;    // sign of the charge (relativistic systems)
    double epsilon = 0.1; // ordering parameter

    void validate() const {
        if (!(m > 0)) throw InvalidArgument("PauliParams: m must be positive");
        if (!(epsilon > 0)) throw InvalidArgument("PauliParams: epsilon must be positive");
        if (zeta != 1.0 && zeta != -1.0)
            throw InvalidArgument("PauliParams: zeta must be +1 or -1");
    }
};

struct PhaseState3D {
    Vec3 x, v;
};
struct PhaseState4D {
    Vec4 R, V;
};
struct PhaseState2N {
    VecX z, V;
};

// ------------------------------------------------------------- packing

inline VecX pack(const PhaseState3D& s) {
    return {s.x.x, s.x.y, s.x.z, s.v.x, s.v.y, s.v.z};
}
inline PhaseState3D unpack3d(const VecX& y) {
    return {{y[0], y[1], y[2]}, {y[3], y[4], y[5]}};
}
inline VecX pack(const PhaseState4D& s) {
    return {s.R[0], s.R[1], s.R[2], s.R[3], s.V[0], s.V[1], s.V[2], s.V[3]};
}
inline PhaseState4D unpack4d(const VecX& y) {
    return {{y[0], y[1], y[2], y[3]}, {y[4], y[5], y[6], y[7]}};
}
inline VecX pack(const PhaseState2N& s) {
    VecX y(2 * s.z.size());
    for (std::size_t i = 0; i < s.z.size(); ++i) {
        y[i] = s.z[i];
        y[s.z.size() + i] = s.V[i];
    }
    return y;
}
inline PhaseState2N unpack2n(const VecX& y) {
    const std::size_t n = y.size() / 2;
    PhaseState2N s{VecX(n), VecX(n)};
    for (std::size_t i = 0; i < n; ++i) {
        s.z[i] = y[i];
        s.V[i] = y[n + i];
    }
    return s;
}

// ------------------------------------------------- classical Pauli (3D)

/// dx/dt = eps v,  dv/dt = omega_c v x b - eps M grad|B|.
inline PhaseState3D rhs_classical_pauli(const PhaseState3D& s, const PauliParams& p,
                                        const FieldModel3D& model) {
    model.require_in_domain(s.x);
    const Vec3 b = model.unit_b(s.x);
    const double wc = model.omega_c(s.x);
    const Vec3 gB = model.grad_Bmag(s.x);
    PhaseState3D d;
    d.x = p.epsilon * s.v;
    d.v = wc * cross(s.v, b) - p.epsilon * p.M * gB;
    return d;
}

/// H = eps^2 m (|v|^2/2 + M |B|).
inline double hamiltonian_classical(const PhaseState3D& s, const PauliParams& p,
                                    const FieldModel3D& model) {
    model.require_in_domain(s.x);
    return p.epsilon * p.epsilon * p.m *
           (0.5 * dot(s.v, s.v) + p.M * model.field_magnitude(s.x));
}

/// Guiding-center reference:
///   dx/dt = eps u b + eps^2 wc^{-1} b x (M grad|B| + u^2 kappa)
///   du/dt = -eps (b + eps u wc^{-1} b x kappa) . M grad|B|
inline std::pair<Vec3, double> rhs_guiding_center(const Vec3& x, double u,
                                                  const PauliParams& p,
                                                  const FieldModel3D& model) {
    model.require_in_domain(x);
    const Vec3 b = model.unit_b(x);
    const double wc = model.omega_c(x);
    const Vec3 gB = model.grad_Bmag(x);
    const Vec3 kappa = model.grad_b(x) * b;
    const double e = p.epsilon;
    const Vec3 dx = e * u * b + (e * e / wc) * cross(b, p.M * gB + u * u * kappa);
    const double du = -e * dot(b + (e * u / wc) * cross(b, kappa), p.M * gB);
    return {dx, du};
}

/// Exact gyration: Phi_theta(x,v) = (x, (v.b)b + sin(theta) v x b
///                                      + cos(theta) b x (v x b)).
inline PhaseState3D u1_classical(double theta, const PhaseState3D& s,
                                 const FieldModel3D& model) {
    model.require_in_domain(s.x);
    const Vec3 b = model.unit_b(s.x);
    const Vec3 vxb = cross(s.v, b);
    return {s.x, dot(s.v, b) * b + std::sin(theta) * vxb + std::cos(theta) * cross(b, vxb)};
}

// --------------------------------------------- relativistic Pauli (4D)

/// dR/dtau = eps V,  dV/dtau = zeta (F0 + eps F1) V - eps M grad(omega0).
inline PhaseState4D rhs_relativistic_pauli(const PhaseState4D& s, const PauliParams& p,
                                           const FaradayModel& model) {
    model.require_in_domain(s.R);
    const Mat4 F0 = model.f0(s.R);
    const Mat4 F1 = model.f1(s.R);
    const Vec4 gw = model.grad_omega0(s.R);
    PhaseState4D d;
    d.R = p.epsilon * s.V;
    d.V = p.zeta * (F0 * s.V + p.epsilon * (F1 * s.V)) - (p.epsilon * p.M) * gw;
    return d;
}

/// H = eps^2 (<V,V>/2 + M omega0).
inline double hamiltonian_relativistic(const PhaseState4D& s, const PauliParams& p,
                                       const FaradayModel& model) {
    model.require_in_domain(s.R);
    return p.epsilon * p.epsilon * (0.5 * mdot(s.V, s.V) + p.M * model.omega0(s.R));
}

/// Phi_theta(R,V) = (R, Ppar V + [cos(theta) I + sin(theta) zeta F0/omega0] Pperp V).
inline PhaseState4D u1_relativistic(double theta, const PhaseState4D& s,
                                    const PauliParams& p, const FaradayModel& model) {
    model.require_in_domain(s.R);
    const Mat4 F0 = model.f0(s.R);
    const double w0 = model.omega0(s.R);
    const Mat4 Pperp = (F0 * F0) * (-1.0 / (w0 * w0));
    const Vec4 Vperp = Pperp * s.V;
    const Vec4 Vpar = s.V - Vperp;
    const Vec4 rot = std::cos(theta) * Vperp + (std::sin(theta) * p.zeta / w0) * (F0 * Vperp);
    return {s.R, Vpar + rot};
}

// --------------------------------------------- symplectic Lorentz (2N)

/// g_ij dV^j/dt = -beta_ij V^j - d_i H - eps V^j V^k Gamma_ijk,
/// dz/dt = eps V. The Christoffel term drops for flat setups.
inline PhaseState2N rhs_symplectic_lorentz(const PhaseState2N& s, const PauliParams& p,
                                           const SymplecticSetup& setup,
                                           double christoffel_step = 0.0) {
    const std::size_t n = s.z.size();
    const MatX B = setup.beta(s.z);
    const VecX dH = setup.gradH(s.z);
    const MatX g = setup.metric(s.z);
    if (!is_spd(g)) throw NotPositiveDefinite("rhs_symplectic_lorentz: metric not SPD");

    VecX rhs = (B * s.V) * -1.0 - dH;
    if (!setup.flat) {
        const double h = (christoffel_step > 0) ? christoffel_step
                                                : default_fd_step(norm_inf(s.z));
        const std::vector<MatX> gamma = setup.christoffel_fd(s.z, h);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0;
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k)
                    acc += s.V[j] * s.V[k] * gamma[i](j, k);
            rhs[i] -= p.epsilon * acc;
        }
    }
    PhaseState2N d;
    d.z = p.epsilon * s.V;
    d.V = solve(g, rhs);
    return d;
}

/// H = eps H(z) + eps^2 g(V,V)/2.
inline double hamiltonian_symplectic(const PhaseState2N& s, const PauliParams& p,
                                     const SymplecticSetup& setup) {
    const MatX g = setup.metric(s.z);
    return p.epsilon * setup.H(s.z) +
           0.5 * p.epsilon * p.epsilon * dot(s.V, g * s.V);
}

/// Phi_theta(z,V) = (z, -J gradH + exp(theta J)[V + J gradH]) with the
/// g-gradient gradH = g^{-1} dH and exp(theta J) = cos(theta) I + sin(theta) J.
inline PhaseState2N u1_symplectic(double theta, const PhaseState2N& s,
                                  const SymplecticSetup& setup) {
    const CompatibleStructure cs = setup.structure(s.z);
    const VecX gradH = solve(cs.g, setup.gradH(s.z));
    const VecX JgradH = cs.J * gradH;
    const VecX w = s.V + JgradH;
    const VecX rot = std::cos(theta) * w + std::sin(theta) * (cs.J * w);
    return {s.z, rot - JgradH};
}

} // namespace slowlab
