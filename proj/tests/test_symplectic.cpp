#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "slowlab/rng.hpp"
#include "slowlab/symplectic.hpp"

using namespace slowlab;

TEST_CASE("compatible structure for the planar identity case") {
    const MatX B = canonical_beta(2);
    const CompatibleStructure cs = compatible_structure(MatX::identity(2), B);
    // J = [[0,-1],[1,0]], g = I
    CHECK(cs.J(0, 0) == Catch::Approx(0.0).margin(1e-12));
    CHECK(cs.J(0, 1) == Catch::Approx(-1.0).margin(1e-12));
    CHECK(cs.J(1, 0) == Catch::Approx(1.0).margin(1e-12));
    CHECK(frobenius(cs.g - MatX::identity(2)) < 1e-12);
}

TEST_CASE("compatible structure for the canonical 4d case") {
    const MatX B = canonical_beta(4);
    const CompatibleStructure cs = compatible_structure(MatX::identity(4), B);
    CHECK(frobenius(cs.g - MatX::identity(4)) < 1e-12);
    CHECK(frobenius(cs.J * cs.J + MatX::identity(4)) < 1e-12);
}

TEST_CASE("compatible structure identities for seeded SPD G") {
    Rng rng(71);
    MatX A(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) A(i, j) = rng.uniform(-1, 1);
    const MatX G = transpose(A) * A + MatX::identity(4);
    const MatX B = canonical_beta(4);
    const CompatibleStructure cs = compatible_structure(G, B);

    CHECK(frobenius(cs.J * cs.J + MatX::identity(4)) < 1e-10);
    CHECK(is_spd(cs.g));

    // g(V,W) = beta(V, J W) for random vectors
    for (int rep = 0; rep < 20; ++rep) {
        const VecX V = rng.vecx(4, -1, 1), W = rng.vecx(4, -1, 1);
        CHECK(dot(V, cs.g * W) == Catch::Approx(dot(V, B * (cs.J * W))).margin(1e-10));
        // symmetry of g through beta and J
        CHECK(dot(V, B * (cs.J * W)) == Catch::Approx(dot(W, B * (cs.J * V))).margin(1e-10));
    }

    // closed form g = G sqrt(S_G)
    const MatX betaG = inverse(G) * B;
    const MatX Gh = spd_sqrt(G);
    const MatX Ghi = inverse(Gh);
    MatX Ssym = Gh * ((betaG * betaG) * -1.0) * Ghi;
    Ssym = (Ssym + transpose(Ssym)) * 0.5;
    const MatX sqrtS = Ghi * spd_sqrt(Ssym) * Gh;
    CHECK(frobenius(cs.g - G * sqrtS) < 1e-10 * frobenius(cs.g));
}

TEST_CASE("compatible structure input validation") {
    CHECK_THROWS_AS(compatible_structure(MatX::identity(2), MatX(2, 2)), InvalidArgument);
    MatX notanti = MatX::identity(2);
    CHECK_THROWS_AS(compatible_structure(MatX::identity(2), notanti), InvalidArgument);
    MatX notspd(2, 2);
    notspd(0, 0) = -1.0;
    notspd(1, 1) = 1.0;
    CHECK_THROWS_AS(compatible_structure(notspd, canonical_beta(2)), NotPositiveDefinite);
}

TEST_CASE("christoffel vanishes for constant metric") {
    for (const auto& s : {setup_oscillator(), setup_pendulum(), setup_coupled()}) {
        const VecX z = (s.dim == 2) ? VecX{0.4, -0.3} : VecX{0.4, -0.3, 0.2, 0.1};
        const auto gamma = s.christoffel_fd(z, 1e-5);
        for (const MatX& gi : gamma) CHECK(frobenius(gi) == 0.0);
    }
}

TEST_CASE("christoffel of a diagonal quadratic metric") {
    // g = diag(1+z1^2, 1, 1, 1): Gamma_111 = z1, only g11 derivatives enter
    SymplecticSetup s = setup_curved();
    s.G_fn = [](const VecX& z) {
        MatX G = MatX::identity(4);
        G(0, 0) = 1.0 + z[0] * z[0];
        return G;
    };
    // for beta canonical and G diagonal-in-this-form, g == G here: S_G is
    // diagonal so the compatible metric reproduces G up to pair averaging
    const VecX z{1.0, 0, 0, 0};
    const MatX g = s.metric(z);
    const auto gamma = s.christoffel_fd(z, 1e-5);
    // Gamma_111 = d_1 g_11 / 2
    const double dg11 = (s.metric(VecX{1.0 + 1e-5, 0, 0, 0})(0, 0) -
                         s.metric(VecX{1.0 - 1e-5, 0, 0, 0})(0, 0)) /
                        2e-5;
    CHECK(gamma[0](0, 0) == Catch::Approx(0.5 * dg11).margin(1e-8));
    // symmetry in the last two indices
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k)
                CHECK(gamma[i](j, k) == Catch::Approx(gamma[i](k, j)).margin(1e-10));
    (void)g;
}

TEST_CASE("christoffel Richardson consistency on the curved setup") {
    const SymplecticSetup s = setup_curved();
    const VecX z{0.3, -0.2, 0.5, 0.1};
    const auto g1 = s.christoffel_fd(z, 1e-5);
    const auto g2 = s.christoffel_fd(z, 5e-6);
    for (int i = 0; i < 4; ++i) CHECK(frobenius(g1[i] - g2[i]) < 1e-5);
}

TEST_CASE("metric positive definite at seeded points and vectors") {
    const SymplecticSetup s = setup_curved();
    Rng rng(83);
    for (int pt = 0; pt < 20; ++pt) {
        const VecX z = rng.vecx(4, -1.5, 1.5);
        const MatX g = s.metric(z);
        for (int rep = 0; rep < 5; ++rep) {
            const VecX V = rng.vecx(4, -1, 1);
            if (norm(V) > 1e-3) CHECK(dot(V, g * V) > 0.0);
        }
        CHECK(frobenius(s.structure(z).J * s.structure(z).J + MatX::identity(4)) < 1e-10);
    }
}

TEST_CASE("make_setup factory") {
    CHECK(make_setup("oscillator").dim == 2);
    CHECK(make_setup("pendulum").name == "pendulum");
    CHECK(make_setup("coupled").dim == 4);
    CHECK(make_setup("curved").flat == false);
    CHECK_THROWS_AS(make_setup("nope"), InvalidSetup);
}
