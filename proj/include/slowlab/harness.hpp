#pragma once

// Run assembly and the four commands: check (structure identities),
// simulate (single trajectory with observers), sweep (epsilon scaling with
// fitted exponents against predictions), compare-gc (full orbit vs the
// guiding-center reference).

#include <cmath>
#include <future>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "slowlab/adiabatic.hpp"
#include "slowlab/config.hpp"
#include "slowlab/fit.hpp"
#include "slowlab/integrate.hpp"
#include "slowlab/report.hpp"
#include "slowlab/rng.hpp"
#include "slowlab/slow_manifold.hpp"

namespace slowlab {

// ------------------------------------------------------------ bundles

/// Everything needed to integrate and observe one configured run at one
/// value of epsilon.
struct SystemBundle {
    std::size_t state_dim = 0;
    double omega_fast0 = 1.0;
    VecX initial_state;
    std::vector<std::string> state_names;
    RhsFn rhs;
    std::function<double(const VecX&)> energy;
    std::function<double(const VecX&)> mu2;
    std::function<double(const VecX&)> ndist;
    std::function<VecX(const VecX&)> slow_of; // classical only
};

inline SystemBundle make_bundle(const RunConfig& cfg, double eps) {
    PauliParams p = cfg.params;
    p.epsilon = eps;
    p.validate();
    const int N = cfg.order;
    SystemBundle b;

    if (cfg.system == "classical") {
        auto model = std::make_shared<FieldModel3D>(build_field_model(cfg.model, cfg.params));
        if (cfg.initial_slow.size() != 4)
            throw ConfigError("classical initial_slow needs 4 entries (x, u)");
        VecX y = y_star_classical(cfg.initial_slow, p, *model, N);
        if (cfg.fast_offset.size() == 2) y += cfg.fast_offset;
        else if (cfg.fast_offset.size() != 0)
            throw ConfigError("classical fast_offset needs 2 entries");
        const PhaseState3D s0 = assemble_classical(cfg.initial_slow, y, *model);

        b.state_dim = 6;
        b.omega_fast0 = model->omega_c(s0.x);
        b.initial_state = pack(s0);
        b.state_names = {"x1", "x2", "x3", "v1", "v2", "v3"};
        b.rhs = [model, p](double, const VecX& yv) {
            return pack(rhs_classical_pauli(unpack3d(yv), p, *model));
        };
        b.energy = [model, p](const VecX& yv) {
            return hamiltonian_classical(unpack3d(yv), p, *model);
        };
        b.mu2 = [model, p](const VecX& yv) { return mu2_classical(unpack3d(yv), p, *model); };
        b.ndist = [model, p, N](const VecX& yv) {
            return normal_distance_classical(unpack3d(yv), p, *model, N);
        };
        b.slow_of = [model](const VecX& yv) {
            return split_classical(unpack3d(yv), *model).slow;
        };
        return b;
    }

    if (cfg.system == "relativistic") {
        auto model = std::make_shared<FaradayModel>(build_faraday_model(cfg.model));
        if (cfg.initial_slow.size() != 6)
            throw ConfigError("relativistic initial_slow needs 6 entries (R, V0, V3)");
        VecX y = y_star_relativistic(cfg.initial_slow, p, *model, N);
        if (cfg.fast_offset.size() == 2) y += cfg.fast_offset;
        else if (cfg.fast_offset.size() != 0)
            throw ConfigError("relativistic fast_offset needs 2 entries");
        const PhaseState4D s0 = assemble_relativistic(cfg.initial_slow, y, *model);

        b.state_dim = 8;
        b.omega_fast0 = model->omega0(s0.R);
        b.initial_state = pack(s0);
        b.state_names = {"R0", "R1", "R2", "R3", "V0", "V1", "V2", "V3"};
        b.rhs = [model, p](double, const VecX& yv) {
            return pack(rhs_relativistic_pauli(unpack4d(yv), p, *model));
        };
        b.energy = [model, p](const VecX& yv) {
            return hamiltonian_relativistic(unpack4d(yv), p, *model);
        };
        b.mu2 = [model, p](const VecX& yv) {
            return mu2_relativistic(unpack4d(yv), p, *model);
        };
        b.ndist = [model, p, N](const VecX& yv) {
            return normal_distance_relativistic(unpack4d(yv), p, *model, N);
        };
        return b;
    }

    // symplectic
    auto setup = std::make_shared<SymplecticSetup>(build_setup(cfg.model));
    const std::size_t n = static_cast<std::size_t>(setup->dim);
    if (cfg.initial_slow.size() != n)
        throw ConfigError("symplectic initial_slow needs dim entries (z)");
    VecX y = y_star_symplectic(cfg.initial_slow, p, *setup, N);
    if (cfg.fast_offset.size() == n) y += cfg.fast_offset;
    else if (cfg.fast_offset.size() != 0)
        throw ConfigError("symplectic fast_offset needs dim entries");
    const PhaseState2N s0 = assemble_symplectic(cfg.initial_slow, y);

    b.state_dim = 2 * n;
    b.omega_fast0 = 1.0; // the limiting gyration has unit angular frequency
    b.initial_state = pack(s0);
    for (std::size_t i = 0; i < n; ++i) b.state_names.push_back("z" + std::to_string(i + 1));
    for (std::size_t i = 0; i < n; ++i) b.state_names.push_back("V" + std::to_string(i + 1));
    b.rhs = [setup, p](double, const VecX& yv) {
        return pack(rhs_symplectic_lorentz(unpack2n(yv), p, *setup));
    };
    b.energy = [setup, p](const VecX& yv) {
        return hamiltonian_symplectic(unpack2n(yv), p, *setup);
    };
    b.mu2 = [setup, p](const VecX& yv) { return mu2_symplectic(unpack2n(yv), p, *setup); };
    b.ndist = [setup, p, N](const VecX& yv) {
        return normal_distance_symplectic(unpack2n(yv), p, *setup, N);
    };
    return b;
}

inline std::optional<DomainBox> make_state_box(const RunConfig& cfg, std::size_t dim) {
    if (!cfg.state_box) return std::nullopt;
    DomainBox box = DomainBox::unbounded(dim);
    const VecX lo = detail::vecx_field(*cfg.state_box, "lo");
    const VecX hi = detail::vecx_field(*cfg.state_box, "hi");
    if (lo.size() != dim || hi.size() != dim)
        throw ConfigError("state_box lo/hi must have state dimension " + std::to_string(dim));
    box.lo = lo;
    box.hi = hi;
    return box;
}

inline IntegrateOptions make_integrator_options(const RunConfig& cfg, double eps,
                                                double omega_fast) {
    IntegrateOptions opt;
    opt.dt = (2.0 * M_PI / std::abs(omega_fast)) / cfg.integrator.steps_per_period;
    opt.t_end = cfg.t_end_override ? *cfg.t_end_override : std::pow(eps, -cfg.horizon_k);
    opt.observer_stride = cfg.integrator.observer_stride;
    opt.step_tolerance = cfg.integrator.tolerance;
    opt.error_control = cfg.integrator.error_control;
    return opt;
}

// ------------------------------------------------------------- check

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct CheckReport {
    std::vector<CheckResult> checks;
    bool all_pass = true;

    void add(const std::string& name, bool pass, const std::string& detail) {
        checks.push_back({name, pass, detail});
        all_pass = all_pass && pass;
    }
    /// Run `fn` returning the worst defect; pass when below `tol`.
    template <typename Fn>
    void run(const std::string& name, double tol, Fn&& fn) {
        try {
            const double worst = fn();
            add(name, worst < tol, "worst " + std::to_string(worst) + " vs " + std::to_string(tol));
        } catch (const Error& e) {
            add(name, false, e.what());
        }
    }
};

namespace detail {

inline VecX check_sample(Rng& rng, const RunConfig& cfg, std::size_t dim) {
    VecX lo(dim), hi(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        lo[i] = -0.5;
        hi[i] = 0.5;
    }
    if (cfg.model.contains("check_box")) {
        lo = vecx_field(cfg.model.at("check_box"), "lo");
        hi = vecx_field(cfg.model.at("check_box"), "hi");
    }
    VecX x(dim);
    for (std::size_t i = 0; i < dim; ++i) x[i] = rng.uniform(lo[i], hi[i]);
    return x;
}

inline void check_classical(const RunConfig& cfg, CheckReport& rep) {
    const auto model = build_field_model(cfg.model, cfg.params);
    PauliParams p = cfg.params;
    p.epsilon = cfg.epsilon.front();
    Rng rng(cfg.seed);
    std::vector<Vec3> pts;
    for (int i = 0; i < cfg.check_points; ++i)
        pts.push_back(vec3_from(check_sample(rng, cfg, 3)));

    rep.run("field-gradients", 1e-6, [&] { return model.check_gradients(pts, 1e-5); });
    rep.run("field-point-identities", 1e-10, [&] {
        double worst = 0;
        for (const Vec3& x : pts) {
            const FieldPoint fp = model.eval(x);
            worst = std::max(worst, std::abs(norm(fp.b) - 1.0));
            for (int j = 0; j < 3; ++j) {
                double s = 0;
                for (int i = 0; i < 3; ++i) s += fp.b[i] * fp.gradb(i, j);
                worst = std::max(worst, std::abs(s));
            }
            worst = std::max(worst, std::abs(dot(fp.b, fp.kappa)));
            worst = std::max(worst, norm(cross(fp.e1, fp.e2) - fp.b));
            worst = std::max(worst, std::abs(dot(fp.e1, fp.e2)));
            worst = std::max(worst, std::abs(fp.omega_c - model.charge() * fp.Bmag / model.mass()));
        }
        return worst;
    });
    if (model.kind() == FieldModel3D::Kind::MagneticMirror ||
        model.kind() == FieldModel3D::Kind::ScrewPinch) {
        rep.run("divergence-free", 1e-6, [&] {
            double worst = 0;
            for (const Vec3& x : pts)
                worst = std::max(worst, std::abs(model.divergence_fd(x, 1e-5)));
            return worst;
        });
    }
    rep.run("u1-classical", 1e-10, [&] {
        double worst = 0;
        for (int i = 0; i < 10; ++i) {
            const PhaseState3D s{pts[i % pts.size()], rng.vec3(-1, 1)};
            const double t1 = rng.uniform(0, 2 * M_PI), t2 = rng.uniform(0, 2 * M_PI);
            worst = std::max(worst, norm(u1_classical(2 * M_PI, s, model).v - s.v));
            const PhaseState3D a = u1_classical(t1, u1_classical(t2, s, model), model);
            const PhaseState3D bb = u1_classical(t1 + t2, s, model);
            worst = std::max(worst, norm(a.v - bb.v));
        }
        return worst;
    });
    rep.run("mu2-hessian-definite", 1.0, [&] {
        for (const Vec3& x : pts) {
            VecX slow{x.x, x.y, x.z, rng.uniform(-0.8, 0.8)};
            if (!min_eigen_check(normal_hessian_classical(slow, p, model)).definite)
                return 1.0;
        }
        return 0.0;
    });
}

inline void check_relativistic(const RunConfig& cfg, CheckReport& rep) {
    const auto model = build_faraday_model(cfg.model);
    PauliParams p = cfg.params;
    p.epsilon = cfg.epsilon.front();
    Rng rng(cfg.seed + 1);
    std::vector<Vec4> pts;
    for (int i = 0; i < cfg.check_points; ++i)
        pts.push_back(vec4_from(check_sample(rng, cfg, 4)));

    rep.run("projector-and-tetrad", 1e-10, [&] {
        double worst = 0;
        for (const Vec4& R : pts) {
            const FaradayPoint fp = model.eval(R);
            worst = std::max(worst, antisymmetry_defect(fp.F0) / std::max(frobenius(fp.F0), 1.0));
            worst = std::max(worst, frobenius(fp.Pperp * fp.Pperp - fp.Pperp));
            worst = std::max(worst, frobenius(fp.Pperp + fp.Ppar - Mat4::identity()));
            worst = std::max(worst, frobenius(fp.F0 * fp.Ppar) / std::max(frobenius(fp.F0), 1.0));
            worst = std::max(worst, std::abs(mdot(fp.tetrad.e0, fp.tetrad.e0) + 1.0));
            for (int a = 1; a < 4; ++a)
                worst = std::max(worst, std::abs(mdot(fp.tetrad[a], fp.tetrad[a]) - 1.0));
            for (int a = 0; a < 4; ++a)
                for (int c = a + 1; c < 4; ++c)
                    worst = std::max(worst, std::abs(mdot(fp.tetrad[a], fp.tetrad[c])));
            worst = std::max(worst, enorm(fp.F0 * fp.tetrad.e0));
            worst = std::max(worst, enorm(fp.F0 * fp.tetrad.e3));
            const Mat4 C = fp.F0 * (1.0 / fp.omega0);
            worst = std::max(worst, frobenius(C * C * fp.Pperp + fp.Pperp));
        }
        return worst;
    });
    rep.run("u1-relativistic", 1e-10, [&] {
        double worst = 0;
        for (int i = 0; i < 10; ++i) {
            const PhaseState4D s{pts[i % pts.size()], rng.vec4(-1, 1)};
            const double t1 = rng.uniform(0, 2 * M_PI), t2 = rng.uniform(0, 2 * M_PI);
            worst = std::max(worst, enorm(u1_relativistic(2 * M_PI, s, p, model).V - s.V));
            const PhaseState4D a =
                u1_relativistic(t1, u1_relativistic(t2, s, p, model), p, model);
            const PhaseState4D bb = u1_relativistic(t1 + t2, s, p, model);
            worst = std::max(worst, enorm(a.V - bb.V));
        }
        return worst;
    });
    rep.run("mu2-hessian-definite", 1.0, [&] {
        // sign-definite with the sign of the charge: flip for zeta = -1
        for (const Vec4& R : pts) {
            VecX slow{R[0], R[1], R[2], R[3], rng.uniform(1.0, 1.5), rng.uniform(-0.5, 0.5)};
            const MatX H = normal_hessian_relativistic(slow, p, model) * p.zeta;
            if (!min_eigen_check(H).definite) return 1.0;
        }
        return 0.0;
    });
}

inline void check_symplectic(const RunConfig& cfg, CheckReport& rep) {
    const SymplecticSetup setup = build_setup(cfg.model);
    PauliParams p = cfg.params;
    p.epsilon = cfg.epsilon.front();
    Rng rng(cfg.seed + 2);
    const std::size_t n = static_cast<std::size_t>(setup.dim);

    rep.run("compatible-structure", 1e-10, [&] {
        double worst = 0;
        for (int i = 0; i < cfg.check_points; ++i) {
            const VecX z = check_sample(rng, cfg, n);
            const CompatibleStructure cs = setup.structure(z);
            worst = std::max(worst, frobenius(cs.J * cs.J + MatX::identity(n)));
            if (!is_spd(cs.g)) return 1.0;
            const MatX B = setup.beta(z);
            for (int rep2 = 0; rep2 < 5; ++rep2) {
                const VecX V = rng.vecx(n, -1, 1), W = rng.vecx(n, -1, 1);
                worst = std::max(worst,
                                 std::abs(dot(V, cs.g * W) - dot(V, B * (cs.J * W))));
            }
        }
        return worst;
    });
    rep.run("christoffel-symmetry", 1e-10, [&] {
        double worst = 0;
        const VecX z = check_sample(rng, cfg, n);
        const auto gamma = setup.christoffel_fd(z, 1e-5);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k)
                    worst = std::max(worst, std::abs(gamma[i](j, k) - gamma[i](k, j)));
        return worst;
    });
    rep.run("u1-symplectic", 1e-10, [&] {
        double worst = 0;
        for (int i = 0; i < 10; ++i) {
            const PhaseState2N s{check_sample(rng, cfg, n), rng.vecx(n, -1, 1)};
            const double t1 = rng.uniform(0, 2 * M_PI), t2 = rng.uniform(0, 2 * M_PI);
            worst = std::max(worst, norm(u1_symplectic(2 * M_PI, s, setup).V - s.V));
            const PhaseState2N a = u1_symplectic(t1, u1_symplectic(t2, s, setup), setup);
            const PhaseState2N bb = u1_symplectic(t1 + t2, s, setup);
            worst = std::max(worst, norm(a.V - bb.V));
        }
        return worst;
    });
    rep.run("mu2-hessian-equals-metric", 1e-6, [&] {
        double worst = 0;
        for (int i = 0; i < 5; ++i) {
            const VecX z = check_sample(rng, cfg, n);
            worst = std::max(worst,
                             frobenius(normal_hessian_symplectic(z, p, setup) - setup.metric(z)));
        }
        return worst;
    });
}

} // namespace detail

inline CheckReport run_check(const RunConfig& cfg) {
    CheckReport rep;
    if (cfg.system == "classical") detail::check_classical(cfg, rep);
    else if (cfg.system == "relativistic") detail::check_relativistic(cfg, rep);
    else detail::check_symplectic(cfg, rep);
    return rep;
}

// ---------------------------------------------------------- simulate

struct SimulateResult {
    TrajectoryRecord record;
    std::vector<std::string> state_names;
    json summary;
};

inline SimulateResult run_simulate(const RunConfig& cfg, double eps) {
    const SystemBundle b = make_bundle(cfg, eps);
    const IntegrateOptions opt = make_integrator_options(cfg, eps, b.omega_fast0);
    const std::optional<DomainBox> box = make_state_box(cfg, b.state_dim);

    const std::vector<Observer> obs = {
        {"energy", [&](double, const VecX& y) { return b.energy(y); }},
        {"mu2", [&](double, const VecX& y) { return b.mu2(y); }},
        {"normal_distance", [&](double, const VecX& y) { return b.ndist(y); }}};

    SimulateResult out;
    out.record = integrate(b.rhs, b.initial_state, opt, obs, box ? &*box : nullptr);
    out.state_names = b.state_names;

    const TrajectoryRecord& rec = out.record;
    const std::vector<double>& E = rec.observables[0];
    double e_drift = 0;
    for (double e : E)
        e_drift = std::max(e_drift, std::abs(e - E.front()) /
                                        std::max(std::abs(E.front()), 1e-300));
    double nd_max = 0;
    for (double d : rec.observables[2]) nd_max = std::max(nd_max, d);
    const DriftStat mu = drift_stat(rec);

    json summary;
    summary["system"] = cfg.system;
    summary["epsilon"] = eps;
    summary["order"] = cfg.order;
    summary["t_end"] = opt.t_end;
    summary["steps"] = rec.steps_taken;
    summary["seed"] = cfg.seed;
    summary["exit_event"] =
        rec.exit_event ? json{{"time", rec.exit_event->time}, {"reason", rec.exit_event->reason}}
                       : json(nullptr);
    summary["error"] = rec.error ? json(*rec.error) : json(nullptr);
    summary["energy"] = {{"initial", E.front()}, {"max_rel_drift", e_drift}};
    summary["mu2"] = {{"initial", mu.mu2_initial},
                      {"max_abs_drift", mu.max_abs_drift},
                      {"samples", mu.samples}};
    summary["normal_distance_max"] = nd_max;
    summary["step_doubling"] = {{"max_step", rec.max_step_error},
                                {"accumulated", rec.accumulated_step_error},
                                {"flagged", rec.flagged}};
    out.summary = summary;
    return out;
}

// ------------------------------------------------------------- sweep

struct MetricRow {
    double epsilon = 0;
    double value = 0;
    bool usable = true;
    std::string annotation;
};

struct MetricReport {
    std::string name;
    double predicted_exponent = 1.0;
    bool one_sided = false;
    std::vector<MetricRow> rows;
    std::optional<FitResult> fit;
    std::string status = "ok"; // ok | degenerate | insufficient-data
    bool pass = false;
};

namespace detail {

inline void fit_metric(MetricReport& m) {
    std::vector<std::pair<double, double>> pts;
    std::size_t at_floor = 0;
    for (const MetricRow& r : m.rows) {
        if (r.usable && r.value > 0) pts.emplace_back(r.epsilon, r.value);
        else if (r.annotation.rfind("unusable", 0) == 0) ++at_floor;
    }
    if (at_floor == m.rows.size()) {
        m.status = "degenerate: exact invariance";
        m.pass = true; // nothing to fit, nothing violated
        return;
    }
    if (pts.size() < 3) {
        m.status = "insufficient-data";
        m.pass = false;
        return;
    }
    m.fit = loglog_fit(pts);
    const bool slope_ok = m.one_sided
                              ? (m.fit->exponent >= m.predicted_exponent - 0.3)
                              : (std::abs(m.fit->exponent - m.predicted_exponent) <= 0.3);
    m.pass = slope_ok && m.fit->r_squared >= 0.98;
}

inline json metric_json(const MetricReport& m) {
    json rows = json::array();
    for (const MetricRow& r : m.rows)
        rows.push_back({{"epsilon", r.epsilon},
                        {"value", r.value},
                        {"usable", r.usable},
                        {"annotation", r.annotation}});
    json fit = nullptr;
    if (m.fit)
        fit = {{"exponent", m.fit->exponent},
               {"intercept", m.fit->intercept},
               {"r_squared", m.fit->r_squared}};
    return {{"name", m.name},
            {"predicted_exponent", m.predicted_exponent},
            {"one_sided", m.one_sided},
            {"rows", rows},
            {"fit", fit},
            {"status", m.status},
            {"pass", m.pass}};
}

struct SweepRow {
    double epsilon = 0;
    double normal_distance = 0;
    double mu2_drift = 0;
    double gc_error = -1; // classical only
    double noise_floor = 0;
    bool exited = false;
    std::string annotation;
};

inline SweepRow sweep_row(const RunConfig& cfg, double eps) {
    SweepRow row;
    row.epsilon = eps;
    const SimulateResult sim = run_simulate(cfg, eps);
    const TrajectoryRecord& rec = sim.record;
    row.noise_floor = rec.max_step_error;
    if (rec.exit_event) {
        row.exited = true;
        row.annotation = "exit: " + rec.exit_event->reason;
    }
    if (rec.error) {
        row.exited = true;
        row.annotation = "error: " + *rec.error;
    }
    for (double d : rec.observables[2]) row.normal_distance = std::max(row.normal_distance, d);
    if (rec.times.size() >= 2) row.mu2_drift = drift_stat(rec).max_abs_drift;

    if (cfg.system == "classical" && !row.exited) {
        // guiding-center reference from the same slow start on the same grid
        const SystemBundle b = make_bundle(cfg, eps);
        PauliParams p = cfg.params;
        p.epsilon = eps;
        const auto model = std::make_shared<FieldModel3D>(build_field_model(cfg.model, cfg.params));
        const RhsFn gc_rhs = [model, p](double, const VecX& y) {
            const auto [dx, du] = rhs_guiding_center({y[0], y[1], y[2]}, y[3], p, *model);
            return VecX{dx.x, dx.y, dx.z, du};
        };
        const IntegrateOptions opt = make_integrator_options(cfg, eps, b.omega_fast0);
        TrajectoryRecord gc;
        try {
            gc = integrate(gc_rhs, cfg.initial_slow, opt);
        } catch (const Error&) {
            row.gc_error = -1;
            return row;
        }
        if (!gc.exit_event && !gc.error && gc.times.size() == rec.times.size()) {
            double sup = 0;
            for (std::size_t i = 0; i < gc.times.size(); ++i) {
                const VecX slow = b.slow_of(rec.states[i]);
                const Vec3 dx{slow[0] - gc.states[i][0], slow[1] - gc.states[i][1],
                              slow[2] - gc.states[i][2]};
                sup = std::max(sup, norm(dx) + std::abs(slow[3] - gc.states[i][3]));
            }
            row.gc_error = sup;
        }
    }
    return row;
}

} // namespace detail

struct SweepReport {
    std::vector<detail::SweepRow> rows;
    std::vector<MetricReport> metrics;
    bool all_pass = true;
    json to_json(const RunConfig& cfg) const {
        json jm = json::array();
        for (const MetricReport& m : metrics) jm.push_back(detail::metric_json(m));
        return {{"system", cfg.system}, {"order", cfg.order},
                {"horizon_k", cfg.horizon_k}, {"seed", cfg.seed},
                {"metrics", jm},           {"pass", all_pass}};
    }
};

/// One worker per epsilon; the report assembly is a single-threaded
/// reduction over the ordered rows.
inline SweepReport run_sweep(const RunConfig& cfg) {
    if (cfg.epsilon.size() < 3)
        throw ConfigError("sweep needs at least 3 epsilon values");

    std::vector<std::future<detail::SweepRow>> futures;
    for (double eps : cfg.epsilon)
        futures.push_back(std::async(std::launch::async,
                                     [&cfg, eps] { return detail::sweep_row(cfg, eps); }));
    SweepReport rep;
    for (auto& f : futures) rep.rows.push_back(f.get());

    const auto build = [&](const std::string& name, double predicted, bool one_sided,
                           auto&& value_of) {
        MetricReport m;
        m.name = name;
        m.predicted_exponent = predicted;
        m.one_sided = one_sided;
        for (const detail::SweepRow& r : rep.rows) {
            MetricRow mr;
            mr.epsilon = r.epsilon;
            mr.value = value_of(r);
            mr.annotation = r.annotation;
            if (r.exited) {
                mr.usable = false;
                if (mr.annotation.empty()) mr.annotation = "excluded: trajectory exit";
            } else if (!(mr.value > 100.0 * r.noise_floor)) {
                mr.usable = false;
                mr.annotation = "unusable: below 100x integrator noise floor";
            }
            m.rows.push_back(mr);
        }
        detail::fit_metric(m);
        return m;
    };

    // normal deviation bound exponent (N+1)/2 is one-sided; the adiabatic
    // drift of the order-0 truncation scales like the first power
    rep.metrics.push_back(build("normal_distance", 0.5 * (cfg.order + 1), true,
                                [](const detail::SweepRow& r) { return r.normal_distance; }));
    rep.metrics.push_back(build("mu2_drift", 1.0, false,
                                [](const detail::SweepRow& r) { return r.mu2_drift; }));
    if (cfg.system == "classical")
        rep.metrics.push_back(build("gc_error", 1.0, true, [](const detail::SweepRow& r) {
            return r.gc_error >= 0 ? r.gc_error : 0.0;
        }));

    for (const MetricReport& m : rep.metrics) {
        const bool asserted = cfg.assert_metrics.empty() ||
                              std::find(cfg.assert_metrics.begin(), cfg.assert_metrics.end(),
                                        m.name) != cfg.assert_metrics.end();
        if (asserted) rep.all_pass = rep.all_pass && m.pass;
    }
    return rep;
}

// -------------------------------------------------------- compare-gc

struct CompareGcRow {
    double epsilon = 0;
    double sup_x_err = 0;
    double sup_u_err = 0;
    double drift_speed_measured = 0;
    double drift_speed_predicted = 0;
    bool usable = true;
    std::string annotation;
};

struct CompareGcReport {
    std::vector<CompareGcRow> rows;
    std::optional<FitResult> fit; // of sup_x_err + sup_u_err vs epsilon
    json to_json(const RunConfig& cfg) const {
        json jr = json::array();
        for (const CompareGcRow& r : rows)
            jr.push_back({{"epsilon", r.epsilon},
                          {"sup_x_err", r.sup_x_err},
                          {"sup_u_err", r.sup_u_err},
                          {"drift_speed_measured", r.drift_speed_measured},
                          {"drift_speed_predicted", r.drift_speed_predicted},
                          {"usable", r.usable},
                          {"annotation", r.annotation}});
        json jf = nullptr;
        if (fit)
            jf = {{"exponent", fit->exponent},
                  {"intercept", fit->intercept},
                  {"r_squared", fit->r_squared}};
        return {{"system", cfg.system}, {"order", cfg.order}, {"seed", cfg.seed},
                {"rows", jr},           {"fit", jf}};
    }
};

inline CompareGcReport run_compare_gc(const RunConfig& cfg) {
    if (cfg.system != "classical")
        throw ConfigError("compare-gc applies to the classical system only");

    const auto model = std::make_shared<FieldModel3D>(build_field_model(cfg.model, cfg.params));
    CompareGcReport rep;
    for (double eps : cfg.epsilon) {
        CompareGcRow row;
        row.epsilon = eps;
        PauliParams p = cfg.params;
        p.epsilon = eps;
        const SystemBundle b = make_bundle(cfg, eps);
        const IntegrateOptions opt = make_integrator_options(cfg, eps, b.omega_fast0);
        const std::optional<DomainBox> box = make_state_box(cfg, b.state_dim);

        const TrajectoryRecord full =
            integrate(b.rhs, b.initial_state, opt, {}, box ? &*box : nullptr);
        const RhsFn gc_rhs = [&](double, const VecX& y) {
            const auto [dx, du] = rhs_guiding_center({y[0], y[1], y[2]}, y[3], p, *model);
            return VecX{dx.x, dx.y, dx.z, du};
        };
        const TrajectoryRecord gc = integrate(gc_rhs, cfg.initial_slow, opt);

        if (full.exit_event || full.error || gc.exit_event || gc.error ||
            full.times.size() != gc.times.size()) {
            row.usable = false;
            row.annotation = "trajectory exit or failure";
            rep.rows.push_back(row);
            continue;
        }
        for (std::size_t i = 0; i < full.times.size(); ++i) {
            const VecX slow = b.slow_of(full.states[i]);
            const Vec3 dx{slow[0] - gc.states[i][0], slow[1] - gc.states[i][1],
                          slow[2] - gc.states[i][2]};
            row.sup_x_err = std::max(row.sup_x_err, norm(dx));
            row.sup_u_err = std::max(row.sup_u_err, std::abs(slow[3] - gc.states[i][3]));
        }
        // mean slow drift speed over the run vs the grad-B prediction
        const VecX s0 = b.slow_of(full.states.front());
        const VecX s1 = b.slow_of(full.states.back());
        const Vec3 disp{s1[0] - s0[0], s1[1] - s0[1], s1[2] - s0[2]};
        row.drift_speed_measured = norm(disp) / (full.times.back() - full.times.front());
        const Vec3 x0{cfg.initial_slow[0], cfg.initial_slow[1], cfg.initial_slow[2]};
        row.drift_speed_predicted =
            eps * eps * p.M * norm(model->grad_Bmag(x0)) / model->omega_c(x0);
        rep.rows.push_back(row);
    }

    std::vector<std::pair<double, double>> pts;
    for (const CompareGcRow& r : rep.rows)
        if (r.usable && r.sup_x_err + r.sup_u_err > 0)
            pts.emplace_back(r.epsilon, r.sup_x_err + r.sup_u_err);
    if (pts.size() >= 3) rep.fit = loglog_fit(pts);
    return rep;
}

} // namespace slowlab
