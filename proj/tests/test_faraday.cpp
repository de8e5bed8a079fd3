#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "slowlab/faraday.hpp"
#include "slowlab/rng.hpp"

using namespace slowlab;

namespace {

void check_tetrad(const Tetrad& t, const Mat4& F0) {
    CHECK(mdot(t.e0, t.e0) == Catch::Approx(-1.0).margin(1e-10));
    CHECK(mdot(t.e1, t.e1) == Catch::Approx(1.0).margin(1e-10));
    CHECK(mdot(t.e2, t.e2) == Catch::Approx(1.0).margin(1e-10));
    CHECK(mdot(t.e3, t.e3) == Catch::Approx(1.0).margin(1e-10));
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            CHECK(std::abs(mdot(t[a], t[b])) < 1e-10);
    CHECK(enorm(F0 * t.e0) < 1e-10);
    CHECK(enorm(F0 * t.e3) < 1e-10);
}

} // namespace

TEST_CASE("lorentz scalars known cases") {
    {
        const Mat4 F = faraday_from_EB({0, 0, 0}, {0, 0, 1});
        const auto [eb, bbee] = lorentz_scalars(F);
        CHECK(eb == Catch::Approx(0.0).margin(1e-14));
        CHECK(bbee == Catch::Approx(1.0).margin(1e-14));
    }
    {
        const Mat4 F = faraday_from_EB({0.5, 0, 0}, {0, 0, 1});
        const auto [eb, bbee] = lorentz_scalars(F);
        CHECK(eb == Catch::Approx(0.0).margin(1e-14));
        CHECK(bbee == Catch::Approx(0.75).margin(1e-14));
    }
    {
        const Mat4 F = faraday_from_EB({0, 0, 0.3}, {0, 0, 1});
        const auto [eb, bbee] = lorentz_scalars(F);
        CHECK(eb == Catch::Approx(0.3).margin(1e-12));
        CHECK(bbee == Catch::Approx(0.91).margin(1e-12));
    }
    Mat4 bad;
    bad(1, 1) = 1.0; // eta*F not antisymmetric
    CHECK_THROWS_AS(lorentz_scalars(bad), InvalidArgument);
}

TEST_CASE("eta F antisymmetry identity <V, F V> = 0") {
    Rng rng(31);
    const Mat4 F = faraday_from_EB({0.2, -0.1, 0.05}, {0.4, 0.3, 1.0});
    for (int i = 0; i < 50; ++i) {
        const Vec4 V = rng.vec4(-2, 2);
        CHECK(std::abs(mdot(V, F * V)) < 1e-12 * (1.0 + edot(V, V)));
    }
}

TEST_CASE("uniform magnetic faraday point") {
    const auto model = FaradayModel::uniform_magnetic();
    const FaradayPoint fp = model.eval({0, 0.1, -0.2, 0.3});
    CHECK(fp.omega0 == Catch::Approx(1.0));
    // Pperp projects onto span{x,y}
    Mat4 expect;
    expect(1, 1) = 1.0;
    expect(2, 2) = 1.0;
    CHECK(frobenius(fp.Pperp - expect) < 1e-12);
    // tetrad: e0 = that, e3 = zhat, (e1,e2) = (xhat,yhat)
    CHECK(enorm(fp.tetrad.e0 - Vec4{1, 0, 0, 0}) < 1e-10);
    CHECK(enorm(fp.tetrad.e1 - Vec4{0, 1, 0, 0}) < 1e-10);
    CHECK(enorm(fp.tetrad.e2 - Vec4{0, 0, 1, 0}) < 1e-10);
    CHECK(enorm(fp.tetrad.e3 - Vec4{0, 0, 0, 1}) < 1e-10);
}

TEST_CASE("crossed fields omega0 and drift frame") {
    FaradayParams prm;
    prm.B0 = 1.0;
    prm.E0 = {0.6, 0, 0};
    const auto model = FaradayModel::crossed_fields(prm);
    const Vec4 R{0, 0, 0, 0};
    CHECK(model.omega0(R) == Catch::Approx(0.8));
    const FaradayPoint fp = model.eval(R);
    // e0 is the unit timelike kernel direction (the E x B drift 4-velocity)
    CHECK(enorm(fp.F0 * fp.tetrad.e0) < 1e-10);
    CHECK(mdot(fp.tetrad.e0, fp.tetrad.e0) == Catch::Approx(-1.0).margin(1e-10));
    CHECK(fp.tetrad.e0[0] > 0);
    check_tetrad(fp.tetrad, fp.F0);
}

TEST_CASE("gradient magnetic projector identities") {
    const auto model = FaradayModel::gradient_magnetic();
    const FaradayPoint fp = model.eval({0.3, 0.2, -0.4, 0.1});
    CHECK(frobenius(fp.Pperp * fp.Pperp - fp.Pperp) < 1e-10);
    CHECK(frobenius(fp.Pperp + fp.Ppar - Mat4::identity()) < 1e-10);
    CHECK(frobenius(fp.F0 * fp.Ppar) < 1e-10 * frobenius(fp.F0));
    CHECK(antisymmetry_defect(fp.F0) < 1e-12 * frobenius(fp.F0));
}

TEST_CASE("tetrad property sweep over seeded points") {
    FaradayParams prm;
    prm.B0 = 1.2;
    prm.L = 2.0;
    const auto model = FaradayModel::gradient_magnetic(prm);
    Rng rng(41);
    for (int i = 0; i < 50; ++i) {
        const Vec4 R = rng.vec4(-0.5, 0.5);
        const FaradayPoint fp = model.eval(R);
        check_tetrad(fp.tetrad, fp.F0);
    }
}

TEST_CASE("F0/omega0 is a complex structure on the perpendicular flat") {
    FaradayParams prm;
    prm.B0 = 1.0;
    prm.E0 = {0.3, 0, 0};
    const auto model = FaradayModel::crossed_fields(prm);
    const FaradayPoint fp = model.eval({0, 0, 0, 0});
    const Mat4 C = fp.F0 * (1.0 / fp.omega0);
    CHECK(frobenius(C * C * fp.Pperp + fp.Pperp) < 1e-10);
}

TEST_CASE("magnetization violation is reported with both scalars") {
    FaradayParams prm;
    prm.B0 = 0.5;
    prm.E0 = {1.0, 0, 0}; // |E| > |B|
    const auto model = FaradayModel::crossed_fields(prm);
    try {
        model.eval({0, 0, 0, 0});
        FAIL("expected MagnetizationViolation");
    } catch (const MagnetizationViolation& e) {
        CHECK(e.s_bb_ee == Catch::Approx(0.25 - 1.0).margin(1e-12));
        CHECK(e.s_eb == Catch::Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("grad omega0 analytic vs finite differences") {
    FaradayParams prm;
    prm.B0 = 1.3;
    prm.L = 1.7;
    const auto model = FaradayModel::gradient_magnetic(prm);
    FaradayParams prm_fd = prm;
    prm_fd.fd_grad_omega0 = true;
    const auto model_fd = FaradayModel::gradient_magnetic(prm_fd);
    Rng rng(59);
    for (int i = 0; i < 10; ++i) {
        const Vec4 R = rng.vec4(-0.4, 0.4);
        const Vec4 a = model.grad_omega0(R);
        const Vec4 b = model_fd.grad_omega0(R);
        CHECK(enorm(a - b) < 1e-8 * (1.0 + enorm(a)));
    }
}

TEST_CASE("degenerate kernel is detected") {
    // E.B != 0 gives an invertible Faraday tensor: no 2d kernel
    const Mat4 F = faraday_from_EB({0, 0, 0.4}, {0, 0, 1});
    CHECK_THROWS_AS(build_tetrad(F, 1.0), DegenerateKernel);
}

TEST_CASE("build_tetrad is deterministic") {
    const auto model = FaradayModel::gradient_magnetic();
    const Vec4 R{0.1, 0.2, 0.3, -0.1};
    const Tetrad a = build_tetrad(model.f0(R), model.omega0(R));
    const Tetrad b = build_tetrad(model.f0(R), model.omega0(R));
    for (int k = 0; k < 4; ++k) CHECK(enorm(a[k] - b[k]) == 0.0);
}

TEST_CASE("domain exit in spacetime") {
    FaradayParams prm;
    prm.domain_lo = {-1, -1, -1, -1};
    prm.domain_hi = {1, 1, 1, 1};
    const auto model = FaradayModel::uniform_magnetic(prm);
    CHECK_THROWS_AS(model.eval({0, 2, 0, 0}), DomainExit);
}
