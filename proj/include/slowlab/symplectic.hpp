#pragma once

// Exact symplectic problem data for the symplectic Lorentz embedding:
// a 2-form matrix field beta, a Hamiltonian H with analytic gradient, a
// reference metric G, the derived compatible pair (g, J) with
// g(V,W) = beta(V, J W), and Christoffel symbols of the first kind by
// central differences of g.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "slowlab/errors.hpp"
#include "slowlab/linalg.hpp"
#include "slowlab/numdiff.hpp"
#include "slowlab/rng.hpp"

namespace slowlab {

struct CompatibleStructure {
    MatX J; // almost complex, J*J = -I
    MatX g; // Riemannian, g = beta * J as matrices
};

/// From a reference SPD metric G and an antisymmetric invertible beta:
/// beta_G = G^{-1} B, S_G = -beta_G^2, J = beta_G^{-1} sqrt(S_G),
/// g(V,W) = beta(V, JW), equivalently g = G*sqrt(S_G).
inline CompatibleStructure compatible_structure(const MatX& G, const MatX& B) {
    const std::size_t n = B.rows();
    if (G.rows() != n || G.cols() != n || B.cols() != n)
        throw InvalidArgument("compatible_structure: dimension mismatch");
    if (frobenius(B + transpose(B)) > 1e-10 * std::max(frobenius(B), 1.0))
        throw InvalidArgument("compatible_structure: beta must be antisymmetric");
    if (std::abs(determinant(B)) <= 1e-12)
        throw InvalidArgument("compatible_structure: beta must be invertible");
    if (!is_spd(G)) throw NotPositiveDefinite("compatible_structure: G must be SPD");

    const MatX betaG = inverse(G) * B;
    const MatX S = (betaG * betaG) * -1.0;
    // S is G-symmetric but not symmetric in the Euclidean sense for general
    // G; symmetrize through the G-inner product: sqrt(S) = G^{-1/2} sqrt(
    // G^{1/2} S G^{-1/2}) G^{1/2}.
    const MatX Gh = spd_sqrt(G);
    const MatX Ghi = inverse(Gh);
    MatX Ssym = Gh * S * Ghi;
    Ssym = (Ssym + transpose(Ssym)) * 0.5;
    const MatX sqrtS = Ghi * spd_sqrt(Ssym) * Gh;

    CompatibleStructure out;
    out.J = inverse(betaG) * sqrtS;
    out.g = B * out.J;
    out.g = (out.g + transpose(out.g)) * 0.5;
    return out;
}

class SymplecticSetup {
public:
    int dim = 2;
    std::string name;
    std::function<MatX(const VecX&)> beta_fn;   // 2-form matrix B_ij
    std::function<double(const VecX&)> H_fn;
    std::function<VecX(const VecX&)> dH_fn;     // coordinate partials of H
    std::function<MatX(const VecX&)> G_fn;      // reference metric
    bool flat = true; // G and beta constant => Christoffels vanish

    MatX beta(const VecX& z) const { return beta_fn(z); }
    double H(const VecX& z) const { return H_fn(z); }
    VecX gradH(const VecX& z) const { return dH_fn(z); }
    MatX refmetric(const VecX& z) const { return G_fn(z); }

    CompatibleStructure structure(const VecX& z) const {
        return compatible_structure(G_fn(z), beta_fn(z));
    }
    MatX metric(const VecX& z) const { return structure(z).g; }

    /// Gamma_ijk = (d_k g_ij + d_j g_ki - d_i g_jk)/2; result[i](j,k).
    std::vector<MatX> christoffel_fd(const VecX& z, double h) const {
        if (!(h > 0)) throw InvalidArgument("christoffel_fd: step must be positive");
        const std::size_t n = static_cast<std::size_t>(dim);
        std::vector<MatX> dg(n, MatX(n, n)); // dg[k](i,j) = d_k g_ij
        if (!flat) {
            for (std::size_t k = 0; k < n; ++k) {
                VecX zp = z, zm = z;
                zp[k] += h;
                zm[k] -= h;
                dg[k] = (metric(zp) - metric(zm)) * (1.0 / (2.0 * h));
            }
        }
        std::vector<MatX> gamma(n, MatX(n, n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k)
                    gamma[i](j, k) = 0.5 * (dg[k](i, j) + dg[j](k, i) - dg[i](j, k));
        return gamma;
    }
};

/// Canonical 2n x 2n block form: pairs (z_{2k+1}, z_{2k+2}) with
/// beta(e_{2k+1}, e_{2k+2}) = 1.
inline MatX canonical_beta(int dim) {
    MatX B(dim, dim);
    for (int k = 0; k + 1 < dim; k += 2) {
        B(k, k + 1) = 1.0;
        B(k + 1, k) = -1.0;
    }
    return B;
}

/// (a) planar oscillator: H = (z1^2 + z2^2)/2, canonical beta, G = I.
inline SymplecticSetup setup_oscillator() {
    SymplecticSetup s;
    s.dim = 2;
    s.name = "oscillator";
    s.beta_fn = [](const VecX&) { return canonical_beta(2); };
    s.H_fn = [](const VecX& z) { return 0.5 * (z[0] * z[0] + z[1] * z[1]); };
    s.dH_fn = [](const VecX& z) { return VecX{z[0], z[1]}; };
    s.G_fn = [](const VecX&) { return MatX::identity(2); };
    s.flat = true;
    return s;
}

/// (b) planar pendulum: H = z2^2/2 - cos z1.
inline SymplecticSetup setup_pendulum() {
    SymplecticSetup s;
    s.dim = 2;
    s.name = "pendulum";
    s.beta_fn = [](const VecX&) { return canonical_beta(2); };
    s.H_fn = [](const VecX& z) { return 0.5 * z[1] * z[1] - std::cos(z[0]); };
    s.dH_fn = [](const VecX& z) { return VecX{std::sin(z[0]), z[1]}; };
    s.G_fn = [](const VecX&) { return MatX::identity(2); };
    s.flat = true;
    return s;
}

/// (c) two coupled oscillators with a constant, seeded, non-identity SPD
/// reference metric; exercises the compatible-metric path while the
/// Christoffels still vanish.
inline SymplecticSetup setup_coupled(std::uint64_t seed = 20240915) {
    SymplecticSetup s;
    s.dim = 4;
    s.name = "coupled";
    Rng rng(seed);
    MatX A(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) A(i, j) = rng.uniform(-0.3, 0.3);
    MatX G = transpose(A) * A + MatX::identity(4);
    s.beta_fn = [](const VecX&) { return canonical_beta(4); };
    s.H_fn = [](const VecX& z) {
        return 0.5 * (z[0] * z[0] + z[1] * z[1] + z[2] * z[2] + z[3] * z[3]) +
               0.2 * z[0] * z[2];
    };
    s.dH_fn = [](const VecX& z) {
        return VecX{z[0] + 0.2 * z[2], z[1], z[2] + 0.2 * z[0], z[3]};
    };
    s.G_fn = [G](const VecX&) { return G; };
    s.flat = true;
    return s;
}

/// (d) z-dependent reference metric G(z) = I + 0.1 diag(sin z_i); the
/// induced g varies with z, so the Christoffel path is nontrivial.
inline SymplecticSetup setup_curved() {
    SymplecticSetup s;
    s.dim = 4;
    s.name = "curved";
    s.beta_fn = [](const VecX&) { return canonical_beta(4); };
    s.H_fn = [](const VecX& z) {
        return 0.5 * (z[0] * z[0] + z[1] * z[1] + z[2] * z[2] + z[3] * z[3]);
    };
    s.dH_fn = [](const VecX& z) { return VecX{z[0], z[1], z[2], z[3]}; };
    s.G_fn = [](const VecX& z) {
        MatX G = MatX::identity(4);
        for (std::size_t i = 0; i < 4; ++i) G(i, i) += 0.1 * std::sin(z[i]);
        return G;
    };
    s.flat = false;
    return s;
}

inline SymplecticSetup make_setup(const std::string& name) {
    if (name == "oscillator") return setup_oscillator();
    if (name == "pendulum") return setup_pendulum();
    if (name == "coupled") return setup_coupled();
    if (name == "curved") return setup_curved();
    throw InvalidSetup("make_setup: unknown setup '" + name + "'");
}

} // namespace slowlab
