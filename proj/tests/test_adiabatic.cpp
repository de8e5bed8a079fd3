#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "slowlab/adiabatic.hpp"
#include "slowlab/rng.hpp"

using namespace slowlab;

namespace {
PauliParams params(double eps, double M = 1.0) {
    PauliParams p;
    p.epsilon = eps;
    p.M = M;
    return p;
}
} // namespace

TEST_CASE("mu2 classical substitution cases") {
    const auto model = FieldModel3D::uniform();
    const PauliParams p = params(0.1);
    CHECK(mu2_classical({{0, 0, 0}, {1, 0, 0}}, p, model) == Catch::Approx(0.5).margin(1e-14));
    CHECK(mu2_classical({{0, 0, 0}, {0, 0, 0.8}}, p, model) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("mu2 classical equals the loop action of the gyro-circle") {
    // quadrature of (m / 4 pi eps) * contour_integral(v_perp . dx) over one
    // closed-form gyro-orbit in a uniform field
    const auto model = FieldModel3D::uniform();
    const PauliParams p = params(0.1);
    const Vec3 v0{0.7, -0.3, 0.5};
    const double wc = 1.0;
    const int nq = 256;
    const double T = 2.0 * M_PI / wc;
    double loop = 0;
    for (int i = 0; i < nq; ++i) {
        // trapezoid in t of v_perp(t) . dx/dt, smooth and periodic
        const double t = T * i / nq;
        const double c = std::cos(wc * t), s = std::sin(wc * t);
        const Vec3 vperp{v0.x * c + v0.y * s, -v0.x * s + v0.y * c, 0};
        const Vec3 xdot = p.epsilon * (vperp + Vec3{0, 0, v0.z});
        loop += dot(vperp, xdot) * (T / nq);
    }
    const double mu_oracle = p.m * loop / (4.0 * M_PI * p.epsilon);
    CHECK(mu2_classical({{0, 0, 0}, v0}, p, model) ==
          Catch::Approx(mu_oracle).margin(1e-10));
}

TEST_CASE("mu2 relativistic perpendicular amplitude") {
    const auto model = FaradayModel::uniform_magnetic();
    PauliParams p = params(0.1);
    const PhaseState4D s{{0, 0, 0, 0}, {1.3, 0.6, 0, 0.2}};
    // Vperp = 0.6 xhat, omega0 = 1: mu2 = 0.36/2
    CHECK(mu2_relativistic(s, p, model) == Catch::Approx(0.18).margin(1e-13));
}

TEST_CASE("mu2 symplectic vanishes on the order-0 slow manifold") {
    for (const auto& setup : {setup_oscillator(), setup_pendulum()}) {
        const PauliParams p = params(0.1);
        const VecX z{0.9, -0.2};
        const VecX V0 = y_star_symplectic(z, p, setup, 0);
        CHECK(mu2_symplectic({z, V0}, p, setup) < 1e-13);
        // and is positive off it
        VecX V = V0;
        V[0] += 0.3;
        CHECK(mu2_symplectic({z, V}, p, setup) > 0.0);
    }
}

TEST_CASE("mu2 vanishes on the order-0 manifold for all systems") {
    const auto model3 = FieldModel3D::magnetic_mirror();
    const auto model4 = FaradayModel::gradient_magnetic();
    const PauliParams p = params(0.1);
    const PhaseState3D s3 = init_on_slow_manifold_classical({0.2, 0.1, 0.3, 0.4}, p, model3, 0);
    CHECK(mu2_classical(s3, p, model3) < 1e-13);
    const PhaseState4D s4 =
        init_on_slow_manifold_relativistic({0, 0.1, 0, 0, 1.1, 0.3}, p, model4, 0);
    CHECK(std::abs(mu2_relativistic(s4, p, model4)) < 1e-13);
}

TEST_CASE("mu2 is invariant under the circle actions") {
    Rng rng(401);
    const auto model3 = FieldModel3D::magnetic_mirror();
    const auto model4 = FaradayModel::gradient_magnetic();
    const SymplecticSetup setup = setup_pendulum();
    const PauliParams p = params(0.1, 0.7);
    for (int rep = 0; rep < 20; ++rep) {
        const double theta = rng.uniform(0, 2 * M_PI);

        const PhaseState3D s3{rng.vec3(-0.5, 0.5), rng.vec3(-1, 1)};
        CHECK(std::abs(mu2_classical(u1_classical(theta, s3, model3), p, model3) -
                       mu2_classical(s3, p, model3)) < 1e-10);

        const PhaseState4D s4{rng.vec4(-0.3, 0.3), rng.vec4(-1, 1)};
        CHECK(std::abs(mu2_relativistic(u1_relativistic(theta, s4, p, model4), p, model4) -
                       mu2_relativistic(s4, p, model4)) < 1e-10);

        const PhaseState2N s2{rng.vecx(2, -1, 1), rng.vecx(2, -1, 1)};
        CHECK(std::abs(mu2_symplectic(u1_symplectic(theta, s2, setup), p, setup) -
                       mu2_symplectic(s2, p, setup)) < 1e-10);
    }
}

TEST_CASE("normal hessian of mu2: classical uniform") {
    const auto model = FieldModel3D::uniform();
    const MatX H = normal_hessian_classical({0.1, 0, 0, 0.5}, params(0.1), model);
    CHECK(H(0, 0) == Catch::Approx(1.0).margin(1e-6)); // m/omega_c = 1
    CHECK(H(1, 1) == Catch::Approx(1.0).margin(1e-6));
    CHECK(std::abs(H(0, 1)) < 1e-6);
}

TEST_CASE("normal hessian of mu2: classical mirror sweep is definite") {
    const auto model = FieldModel3D::magnetic_mirror();
    const PauliParams p = params(0.1);
    Rng rng(419);
    for (int i = 0; i < 50; ++i) {
        VecX slow(4);
        const Vec3 x = rng.vec3(-0.6, 0.6);
        slow[0] = x.x;
        slow[1] = x.y;
        slow[2] = x.z;
        slow[3] = rng.uniform(-0.8, 0.8);
        const MatX H = normal_hessian_classical(slow, p, model);
        const double expect = p.m / model.omega_c(x);
        CHECK(std::abs(H(0, 0) - expect) < 1e-6);
        CHECK(std::abs(H(1, 1) - expect) < 1e-6);
        CHECK(std::abs(H(0, 1)) < 1e-6);
        CHECK(min_eigen_check(H).definite);
    }
}

TEST_CASE("normal hessian of mu2: symplectic equals the metric") {
    {
        const SymplecticSetup setup = setup_oscillator();
        const MatX H = normal_hessian_symplectic({1.0, 0.0}, params(0.1), setup);
        CHECK(frobenius(H - MatX::identity(2)) < 1e-6);
    }
    {
        const SymplecticSetup setup = setup_curved();
        const VecX z{0.4, -0.3, 0.2, 0.6};
        const MatX H = normal_hessian_symplectic(z, params(0.1), setup);
        CHECK(frobenius(H - setup.metric(z)) < 1e-6);
        CHECK(min_eigen_check(H).definite);
    }
}

TEST_CASE("normal hessian of mu2: relativistic uniform") {
    const auto model = FaradayModel::uniform_magnetic();
    const MatX H = normal_hessian_relativistic({0, 0, 0, 0, 1.1, 0.2}, params(0.1), model);
    CHECK(H(0, 0) == Catch::Approx(1.0).margin(1e-6)); // 1/omega0 with omega0 = 1
    CHECK(H(1, 1) == Catch::Approx(1.0).margin(1e-6));
    CHECK(min_eigen_check(H).definite);
}

TEST_CASE("min_eigen_check basics") {
    CHECK(min_eigen_check(MatX::identity(3)).min_eigenvalue == Catch::Approx(1.0));
    CHECK(min_eigen_check(MatX::identity(3)).definite);
    MatX D(2, 2);
    D(0, 0) = 1.0;
    D(1, 1) = -1.0;
    const EigenCheck c = min_eigen_check(D);
    CHECK(c.min_eigenvalue == Catch::Approx(-1.0));
    CHECK_FALSE(c.definite);
}

TEST_CASE("drift_stat from an integrated record") {
    const auto model = FieldModel3D::uniform();
    const PauliParams p = params(0.1);
    const PhaseState3D s0{{0, 0, 0}, {1, 0, 0.5}};
    const RhsFn rhs = [&](double, const VecX& y) {
        return pack(rhs_classical_pauli(unpack3d(y), p, model));
    };
    IntegrateOptions opt;
    opt.dt = 2.0 * M_PI / 64.0;
    opt.t_end = 10 * 2.0 * M_PI;
    opt.observer_stride = 8;
    opt.error_control = true;
    opt.step_tolerance = 1e-12;
    const std::vector<Observer> obs = {
        {"mu2", [&](double, const VecX& y) { return mu2_classical(unpack3d(y), p, model); }}};
    const TrajectoryRecord rec = integrate(rhs, pack(s0), opt, obs);
    const DriftStat st = drift_stat(rec);
    CHECK(st.mu2_initial == Catch::Approx(0.5).margin(1e-12));
    CHECK(st.max_abs_drift < 1e-9); // exactly conserved analytically
    CHECK(st.samples >= 2);

    TrajectoryRecord empty;
    CHECK_THROWS_AS(drift_stat(empty), InsufficientData);
}
