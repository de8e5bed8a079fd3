#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "slowlab/fit.hpp"
#include "slowlab/integrate.hpp"
#include "slowlab/rng.hpp"
#include "slowlab/slow_manifold.hpp"

using namespace slowlab;

namespace {
PauliParams params(double eps, double M = 1.0) {
    PauliParams p;
    p.epsilon = eps;
    p.M = M;
    return p;
}
} // namespace

TEST_CASE("splits reassemble to the identity") {
    Rng rng(211);
    const auto model3 = FieldModel3D::magnetic_mirror();
    for (int i = 0; i < 20; ++i) {
        const PhaseState3D s{rng.vec3(-0.6, 0.6), rng.vec3(-1, 1)};
        const ClassicalSplit sp = split_classical(s, model3);
        const PhaseState3D back = assemble_classical(sp.slow, sp.fast, model3);
        CHECK(norm(back.x - s.x) < 1e-12);
        CHECK(norm(back.v - s.v) < 1e-12);
        const ClassicalSplit sp2 = split_classical(back, model3);
        CHECK(norm(sp2.slow - sp.slow) < 1e-12);
        CHECK(norm(sp2.fast - sp.fast) < 1e-12);
    }

    const auto model4 = FaradayModel::gradient_magnetic();
    for (int i = 0; i < 20; ++i) {
        const PhaseState4D s{rng.vec4(-0.4, 0.4), rng.vec4(-1, 1)};
        const RelativisticSplit sp = split_relativistic(s, model4);
        const PhaseState4D back = assemble_relativistic(sp.slow, sp.fast, model4);
        CHECK(enorm(back.V - s.V) < 1e-12);
        const RelativisticSplit sp2 = split_relativistic(back, model4);
        CHECK(norm(sp2.slow - sp.slow) < 1e-12);
        CHECK(norm(sp2.fast - sp.fast) < 1e-12);
    }
}

TEST_CASE("classical y* in a uniform field vanishes") {
    const auto model = FieldModel3D::uniform();
    const VecX y = y_star_classical({0.3, 0.1, -0.2, 0.7}, params(0.1), model, 1);
    CHECK(norm(y) == 0.0);
}

TEST_CASE("classical y* reproduces the grad-B drift on the gradient model") {
    FieldModel3D::Params prm;
    prm.B0 = 1.0;
    prm.L = 2.0;
    const auto model = FieldModel3D::linear_gradient(prm);
    const PauliParams p = params(0.1, 1.0);
    const VecX slow{0, 0, 0, 0}; // u = 0
    const VecX y = y_star_classical(slow, p, model, 1);
    const PhaseState3D s = assemble_classical(slow, y, model);
    // v_perp* = eps wc^{-1} b x (M grad|B|) = 0.1 * zhat x (0.5,0,0) = (0,0.05,0)
    CHECK(norm(s.v - Vec3{0, 0.05, 0}) < 1e-14);
}

TEST_CASE("classical y1* matches the drift formula componentwise") {
    const auto model = FieldModel3D::magnetic_mirror();
    const PauliParams p = params(0.05, 1.3);
    Rng rng(223);
    for (int i = 0; i < 10; ++i) {
        VecX slow(4);
        const Vec3 x = rng.vec3(-0.5, 0.5);
        slow[0] = x.x;
        slow[1] = x.y;
        slow[2] = x.z;
        slow[3] = rng.uniform(-0.8, 0.8);
        const VecX y = y_star_classical(slow, p, model, 1);
        const FieldPoint fp = model.eval(x);
        const Vec3 c = p.M * fp.gradBmag + slow[3] * slow[3] * fp.kappa;
        const Vec3 vperp = (p.epsilon / fp.omega_c) * cross(fp.b, c);
        CHECK(std::abs(y[0] - dot(vperp, fp.e1)) < 1e-13);
        CHECK(std::abs(y[1] - dot(vperp, fp.e2)) < 1e-13);
    }
}

TEST_CASE("symplectic V0* solves the linear system and equals -J gradH") {
    const SymplecticSetup setup = setup_oscillator();
    const VecX z{1.0, 0.0};
    const VecX V0 = y_star_symplectic(z, params(0.1), setup, 0);
    // beta V0 = -dH and the sign convention of the canonical pairing
    CHECK(norm(setup.beta(z) * V0 + setup.gradH(z)) < 1e-14);
    CHECK(V0[0] == Catch::Approx(0.0).margin(1e-14));
    CHECK(V0[1] == Catch::Approx(-1.0).margin(1e-14));
    const CompatibleStructure cs = setup.structure(z);
    const VecX mJgradH = (cs.J * solve(cs.g, setup.gradH(z))) * -1.0;
    CHECK(norm(V0 - mJgradH) < 1e-13);
}

TEST_CASE("oracle finds the exact equilibrium in a uniform field") {
    const auto model = FieldModel3D::uniform();
    const PauliParams p = params(0.1, 1.0);
    OracleOptions opt;
    const OracleResult r = newton_refine_classical({0.2, -0.1, 0.4, 0.6}, p, model, 0, opt);
    CHECK(r.converged);
    CHECK(r.iterations <= 2);
    CHECK(norm(r.y) < 1e-13);
}

TEST_CASE("order-1 series is exactly invariant on the linear-gradient model") {
    // with b constant and grad|B| perpendicular to b, the drift velocity has
    // no component along the gradient, so the order-1 series already solves
    // the invariance equation exactly: the oracle refines it by nothing
    FieldModel3D::Params prm;
    prm.B0 = 1.0;
    prm.L = 2.0;
    const auto model = FieldModel3D::linear_gradient(prm);
    const VecX slow{0.1, 0.0, 0.0, 0.4};
    for (double eps : {0.05, 0.025}) {
        const PauliParams p = params(eps, 1.0);
        OracleOptions opt;
        const OracleResult r = newton_refine_classical(slow, p, model, 1, opt);
        REQUIRE(r.converged);
        CHECK(norm(r.y - y_star_classical(slow, p, model, 1)) < 1e-12);
    }
}

TEST_CASE("oracle gap scales like eps^2 against the order-1 series (classical)") {
    FieldModel3D::Params prm;
    prm.B0 = 1.0;
    prm.L = 2.0;
    const auto model = FieldModel3D::magnetic_mirror(prm);
    const VecX slow{0.2, 0.1, 0.25, 0.3};
    const auto gap = [&](double eps, int N) {
        const PauliParams p = params(eps, 1.0);
        OracleOptions opt;
        const OracleResult r = newton_refine_classical(slow, p, model, N, opt);
        REQUIRE(r.converged);
        return norm(r.y - y_star_classical(slow, p, model, N));
    };
    const double g1 = gap(0.05, 1), g2 = gap(0.025, 1);
    CHECK(g1 / g2 > 3.0);
    CHECK(g1 / g2 < 5.2);
    const double h1 = gap(0.05, 0), h2 = gap(0.025, 0);
    CHECK(h1 / h2 > 1.7);
    CHECK(h1 / h2 < 2.4);
}

TEST_CASE("oracle order-consistency exponents (classical mirror)") {
    FieldModel3D::Params prm;
    prm.B0 = 1.0;
    prm.L = 2.0;
    const auto model = FieldModel3D::magnetic_mirror(prm);
    const VecX slow{0.2, 0.1, 0.25, 0.3};
    std::vector<std::pair<double, double>> g0, g1;
    for (double eps : {0.2, 0.1, 0.05, 0.025}) {
        const PauliParams p = params(eps, 1.0);
        OracleOptions opt;
        const OracleResult r = newton_refine_classical(slow, p, model, 1, opt);
        REQUIRE(r.converged);
        g0.emplace_back(eps, norm(r.y - y_star_classical(slow, p, model, 0)));
        g1.emplace_back(eps, norm(r.y - y_star_classical(slow, p, model, 1)));
    }
    const FitResult f0 = loglog_fit(g0);
    const FitResult f1 = loglog_fit(g1);
    CHECK(std::abs(f0.exponent - 1.0) < 0.3);
    CHECK(std::abs(f1.exponent - 2.0) < 0.3);
    CHECK(f0.r_squared > 0.98);
    CHECK(f1.r_squared > 0.98);
}

TEST_CASE("oracle order-consistency exponents (symplectic pendulum)") {
    const SymplecticSetup setup = setup_pendulum();
    const VecX slow{1.0, 0.3};
    std::vector<std::pair<double, double>> g0, g1;
    for (double eps : {0.2, 0.1, 0.05, 0.025}) {
        const PauliParams p = params(eps);
        OracleOptions opt;
        const OracleResult r = newton_refine_symplectic(slow, p, setup, 1, opt);
        REQUIRE(r.converged);
        g0.emplace_back(eps, norm(r.y - y_star_symplectic(slow, p, setup, 0)));
        g1.emplace_back(eps, norm(r.y - y_star_symplectic(slow, p, setup, 1)));
    }
    const FitResult f0 = loglog_fit(g0);
    const FitResult f1 = loglog_fit(g1);
    CHECK(std::abs(f0.exponent - 1.0) < 0.3);
    CHECK(std::abs(f1.exponent - 2.0) < 0.3);
}

TEST_CASE("oracle agrees with the relativistic order-1 series") {
    // B1 along x breaks the symmetry that otherwise keeps the manifold's
    // velocity off the gradient direction (and the series exact)
    FaradayParams fprm;
    fprm.E1 = {0.05, 0.08, 0};
    fprm.B1 = {0.2, 0, 0};
    const auto model = FaradayModel::gradient_magnetic(fprm);
    const VecX slow{0, 0.05, 0, 0, 1.1, 0.3}; // (R; V0; V3)
    const auto gap = [&](double eps, int N) {
        PauliParams p = params(eps, 0.5);
        OracleOptions opt;
        const OracleResult r = newton_refine_relativistic(slow, p, model, N, opt);
        REQUIRE(r.converged);
        return norm(r.y - y_star_relativistic(slow, p, model, N));
    };
    // dropping the order-1 coefficient leaves an O(eps) gap...
    const double h1 = gap(0.05, 0), h2 = gap(0.025, 0);
    CHECK(h1 / h2 > 1.8);
    CHECK(h1 / h2 < 2.3);
    // ...and including it the gap decays at least quadratically
    const double g1 = gap(0.05, 1), g2 = gap(0.025, 1);
    CHECK(g1 / g2 > 3.0);
    CHECK(g1 / g2 < 20.0);
    CHECK(g1 < 10.0 * 0.05 * 0.05);
}

TEST_CASE("oracle reports non-convergence instead of throwing") {
    // with the iteration budget cut short the result is flagged, not fatal
    const auto model = FieldModel3D::magnetic_mirror();
    PauliParams p = params(20.0, 1.0); // far outside the asymptotic regime
    OracleOptions opt;
    opt.max_iter = 2;
    opt.tol = 1e-15;
    const OracleResult r = newton_refine_classical({0.2, 0.1, 0.25, 0.3}, p, model, 0, opt);
    CHECK_FALSE(r.converged);
    CHECK(r.residual > 0.0);
}

TEST_CASE("non-SPD reference metric surfaces as not-positive-definite") {
    SymplecticSetup s = setup_oscillator();
    MatX bad(2, 2);
    bad(0, 0) = -1.0;
    bad(1, 1) = 1.0;
    s.G_fn = [bad](const VecX&) { return bad; };
    const PhaseState2N st{{0.5, 0.1}, {0.0, 0.0}};
    CHECK_THROWS_AS(rhs_symplectic_lorentz(st, params(0.1), s), NotPositiveDefinite);
}

TEST_CASE("relativistic y1* agrees with its componentwise form") {
    // prefactor (zeta <e2, F0 e1> / omega0^2) times (a2, -a1) with
    // a_k = <zeta F1 e_k, Vpar> + <Vpar, D_Vpar[F0^2/w0^2] e_k> + M <e_k, grad w0>
    FaradayParams prm;
    prm.E1 = {0.05, 0.08, 0};
    prm.B1 = {0.2, 0, 0};
    const auto model = FaradayModel::gradient_magnetic(prm);
    PauliParams p;
    p.epsilon = 0.07;
    p.M = 0.6;
    const VecX slow{0, 0.1, -0.05, 0.2, 1.15, 0.35};
    const VecX y = y_star_relativistic(slow, p, model, 1);

    const Vec4 R = vec4_from(slow);
    const FaradayPoint fp = model.eval(R);
    const Vec4 Vpar = slow[4] * fp.tetrad.e0 + slow[5] * fp.tetrad.e3;
    const auto proj_field = [&](const VecX& rv) {
        const Vec4 r = vec4_from(rv);
        const Mat4 F0 = model.f0(r);
        const double w = model.omega0(r);
        return matx_from((F0 * F0) * (1.0 / (w * w)));
    };
    const MatX dP =
        directional_matrix_derivative(proj_field, vecx_from(R), vecx_from(Vpar), default_fd_step());
    Mat4 dP4;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) dP4(i, j) = dP(i, j);

    const double pref = p.zeta * mdot(fp.tetrad.e2, fp.F0 * fp.tetrad.e1) /
                        (fp.omega0 * fp.omega0);
    const auto a = [&](const Vec4& ek) {
        return p.zeta * mdot(fp.F1 * ek, Vpar) + mdot(Vpar, dP4 * ek) +
               p.M * mdot(ek, fp.grad_omega0);
    };
    const double a1 = a(fp.tetrad.e1), a2 = a(fp.tetrad.e2);
    CHECK(y[0] == Catch::Approx(p.epsilon * pref * a2).margin(1e-12));
    CHECK(y[1] == Catch::Approx(-p.epsilon * pref * a1).margin(1e-12));
}

TEST_CASE("init on slow manifold and normal distance") {
    const auto model = FieldModel3D::uniform();
    const PauliParams p = params(0.1, 1.0);
    {
        const PhaseState3D s = init_on_slow_manifold_classical({0, 0, 0, 0.5}, p, model, 1);
        CHECK(norm(s.v - 0.5 * model.unit_b({0, 0, 0})) < 1e-14); // v = u b exactly
        CHECK(normal_distance_classical(s, p, model, 1) < 1e-14);
    }
    {
        const auto mirror = FieldModel3D::magnetic_mirror();
        const VecX slow{0.2, 0.1, 0.3, 0.4};
        const PhaseState3D s = init_on_slow_manifold_classical(slow, p, mirror, 1);
        CHECK(normal_distance_classical(s, p, mirror, 1) < 1e-14);
        // distance equals the independent recomputation
        const ClassicalSplit sp = split_classical(s, mirror);
        const VecX ys = y_star_classical(sp.slow, p, mirror, 1);
        CHECK(normal_distance_classical(s, p, mirror, 1) ==
              Catch::Approx(norm(sp.fast - ys)).margin(1e-15));
    }
    {
        const auto fmodel = FaradayModel::uniform_magnetic();
        const PhaseState4D s =
            init_on_slow_manifold_relativistic({0, 0, 0, 0, 1.2, 0.4}, p, fmodel, 1);
        // uniform field: Vperp* = 0, so V lies in the kernel span
        CHECK(std::abs(mdot(s.V, fmodel.eval({0, 0, 0, 0}).tetrad.e1)) < 1e-12);
        CHECK(normal_distance_relativistic(s, p, fmodel, 1) < 1e-13);
    }
}

TEST_CASE("normal distance measures perpendicular amplitude in a uniform field") {
    const auto model = FieldModel3D::uniform();
    const PauliParams p = params(0.1, 0.0);
    const double r = 0.37;
    const PhaseState3D s{{0, 0, 0}, {r, 0, 0.8}};
    CHECK(normal_distance_classical(s, p, model, 1) == Catch::Approx(r).margin(1e-13));
}

TEST_CASE("fast-slow forms reconstruct the vector right-hand side") {
    // classical: udot b + v1dot e1 + v2dot e2 plus frame transport must
    // reproduce dv/dt; transport uses the same stencil data as the forms
    const auto model = FieldModel3D::magnetic_mirror();
    const PauliParams p = params(0.07, 0.8);
    Rng rng(307);
    for (int rep = 0; rep < 5; ++rep) {
        const PhaseState3D s{rng.vec3(-0.5, 0.5), rng.vec3(-1, 1)};
        const ClassicalSplit sp = split_classical(s, model);
        const auto [f, g] = fast_slow_rhs_classical(sp.slow, sp.fast, p, model);
        const FieldPoint fp = model.eval(s.x);
        const auto [de1, de2] = model.frame_jacobians(s.x, default_fd_step(norm_inf(vecx_from(s.x))));

        // d(e_a)/dt = eps (v . grad) e_a with the same finite differences
        const Vec3 v = s.v;
        const Vec3 dbdt = p.epsilon * (fp.gradb * v);
        const Vec3 de1dt = p.epsilon * (de1 * v);
        const Vec3 de2dt = p.epsilon * (de2 * v);
        const Vec3 v_re = (p.epsilon * g[3]) * fp.b + f[0] * fp.e1 + f[1] * fp.e2 +
                          sp.slow[3] * dbdt + sp.fast[0] * de1dt + sp.fast[1] * de2dt;
        const PhaseState3D d = rhs_classical_pauli(s, p, model);
        CHECK(norm(v_re - d.v) < 1e-10 * std::max(1.0, norm(d.v)));

        const Vec3 x_re{p.epsilon * g[0], p.epsilon * g[1], p.epsilon * g[2]};
        CHECK(norm(x_re - d.x) < 1e-14);
    }
}

TEST_CASE("relativistic fast-slow forms reconstruct the vector rhs") {
    const auto model = FaradayModel::gradient_magnetic();
    const PauliParams p = params(0.06, 0.4);
    Rng rng(311);
    for (int rep = 0; rep < 5; ++rep) {
        const PhaseState4D s{rng.vec4(-0.3, 0.3), rng.vec4(-0.8, 0.8)};
        const RelativisticSplit sp = split_relativistic(s, model);
        const auto [f, g] = fast_slow_rhs_relativistic(sp.slow, sp.fast, p, model);
        const FaradayPoint fp = model.eval(s.R);
        const auto de = model.tetrad_directional_derivative(s.R, s.V, default_fd_step());

        const double coeff[4] = {sp.slow[4], sp.fast[0], sp.fast[1], sp.slow[5]};
        const double dcoeff[4] = {p.epsilon * g[4], f[0], f[1], p.epsilon * g[5]};
        Vec4 V_re{0, 0, 0, 0};
        for (int a = 0; a < 4; ++a)
            V_re += dcoeff[a] * fp.tetrad[a] + (p.epsilon * coeff[a]) * de[a];
        const PhaseState4D d = rhs_relativistic_pauli(s, p, model);
        CHECK(enorm(V_re - d.V) < 1e-10 * std::max(1.0, enorm(d.V)));
    }
}

TEST_CASE("embedded slow dynamics recover the hamiltonian flow (order 0)") {
    // integrating zdot = eps y0*(z) reproduces the canonical flow of H
    const SymplecticSetup setup = setup_oscillator();
    const PauliParams p = params(0.1);
    const RhsFn slow_field = [&](double, const VecX& z) {
        return p.epsilon * y_star_symplectic(z, p, setup, 0);
    };
    const RhsFn direct = [&](double, const VecX& z) {
        const CompatibleStructure cs = setup.structure(z);
        return (cs.J * solve(cs.g, setup.gradH(z))) * (-p.epsilon);
    };
    IntegrateOptions opt;
    opt.dt = 0.05;
    opt.t_end = 10.0;
    const TrajectoryRecord a = integrate(slow_field, {1.0, 0.0}, opt);
    const TrajectoryRecord b = integrate(direct, {1.0, 0.0}, opt);
    CHECK(norm(a.states.back() - b.states.back()) < 1e-12);
}
