#pragma once

// Run configuration: one JSON document selects the system, the field model
// or symplectic setup, particle parameters, the epsilon grid, horizons and
// integrator settings.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "slowlab/errors.hpp"
#include "slowlab/faraday.hpp"
#include "slowlab/field3d.hpp"
#include "slowlab/symplectic.hpp"
#include "slowlab/systems.hpp"

namespace slowlab {

using nlohmann::json;

struct IntegratorConfig {
    int steps_per_period = 64;
    int observer_stride = 64;
    double tolerance = 1e-6;
    bool error_control = false;
};

struct RunConfig {
    std::string system; // classical | relativistic | symplectic
    json model;         // model or setup selection and parameters
    PauliParams params;
    std::vector<double> epsilon;
    int order = 1;     // slow-manifold order N
    int horizon_k = 1; // t_end = eps^{-k}
    VecX initial_slow;
    VecX fast_offset; // optional, empty means zero
    IntegratorConfig integrator;
    std::optional<double> t_end_override; // fixed horizon instead of eps^{-k}
    std::optional<json> state_box;        // optional {lo:[], hi:[]} over the state
    std::vector<std::string> assert_metrics; // empty = assert all
    std::uint64_t seed = 20240915;
    int check_points = 50;
};

namespace detail {

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config field '" + key + "': " + e.what());
    }
}

inline VecX vecx_field(const json& j, const std::string& key) {
    if (!j.contains(key)) return {};
    const json& a = j.at(key);
    if (!a.is_array()) throw ConfigError("config field '" + key + "' must be an array");
    VecX v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
    return v;
}

inline Vec3 vec3_field(const json& j, const std::string& key, Vec3 fallback) {
    if (!j.contains(key)) return fallback;
    const json& a = j.at(key);
    if (!a.is_array() || a.size() != 3)
        throw ConfigError("config field '" + key + "' must be a 3-array");
    return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

inline Vec4 vec4_field(const json& j, const std::string& key, Vec4 fallback) {
    if (!j.contains(key)) return fallback;
    const json& a = j.at(key);
    if (!a.is_array() || a.size() != 4)
        throw ConfigError("config field '" + key + "' must be a 4-array");
    return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>(), a[3].get<double>()};
}

} // namespace detail

inline RunConfig parse_config(const json& j) {
    RunConfig c;
    try {
        if (!j.contains("system")) throw ConfigError("config: missing 'system'");
        c.system = j.at("system").get<std::string>();
        if (c.system != "classical" && c.system != "relativistic" && c.system != "symplectic")
            throw ConfigError("config: unknown system '" + c.system + "'");

        c.model = j.contains("model") ? j.at("model") : json::object();

        const json p = j.contains("params") ? j.at("params") : json::object();
        c.params.m = detail::get_or(p, "m", 1.0);
        c.params.q = detail::get_or(p, "q", 1.0);
        c.params.M = detail::get_or(p, "M", 0.0);
        c.params.zeta = detail::get_or(p, "zeta", c.params.q >= 0 ? 1.0 : -1.0);

        if (j.contains("epsilon")) {
            if (j.at("epsilon").is_array())
                c.epsilon = j.at("epsilon").get<std::vector<double>>();
            else
                c.epsilon = {j.at("epsilon").get<double>()};
        } else {
            c.epsilon = {0.1};
        }
        for (double e : c.epsilon)
            if (!(e > 0)) throw ConfigError("config: epsilon entries must be positive");

        c.order = detail::get_or(j, "order", 1);
        if (c.order != 0 && c.order != 1) throw ConfigError("config: order must be 0 or 1");
        c.horizon_k = detail::get_or(j, "horizon_k", 1);
        if (c.horizon_k < 0 || c.horizon_k > 2)
            throw ConfigError("config: horizon_k must be 0, 1 or 2");

        c.initial_slow = detail::vecx_field(j, "initial_slow");
        c.fast_offset = detail::vecx_field(j, "fast_offset");

        const json ij = j.contains("integrator") ? j.at("integrator") : json::object();
        c.integrator.steps_per_period = detail::get_or(ij, "steps_per_period", 64);
        c.integrator.observer_stride = detail::get_or(ij, "observer_stride", 64);
        c.integrator.tolerance = detail::get_or(ij, "tolerance", 1e-6);
        c.integrator.error_control = detail::get_or(ij, "error_control", false);
        if (c.integrator.steps_per_period < 4)
            throw ConfigError("config: steps_per_period must be at least 4");

        if (j.contains("t_end")) c.t_end_override = j.at("t_end").get<double>();
        if (j.contains("state_box")) c.state_box = j.at("state_box");
        c.assert_metrics =
            detail::get_or(j, "assert_metrics", std::vector<std::string>{});
        c.seed = detail::get_or<std::uint64_t>(j, "seed", 20240915u);
        c.check_points = detail::get_or(j, "check_points", 50);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

// ------------------------------------------------------- model factories

/// Particle charge and mass come from the params block so that the field's
/// gyrofrequency and the Hamiltonian agree on them.
inline FieldModel3D build_field_model(const json& m, const PauliParams& p = {}) {
    const std::string type = detail::get_or<std::string>(m, "type", "magnetic-mirror");
    Field3DParams prm;
    prm.B0 = detail::get_or(m, "B0", 1.0);
    prm.L = detail::get_or(m, "L", 1.0);
    prm.pinch = detail::get_or(m, "pinch", 0.5);
    prm.q = p.q;
    prm.m = p.m;
    if (m.contains("domain")) {
        prm.domain_lo = detail::vec3_field(m.at("domain"), "lo", prm.domain_lo);
        prm.domain_hi = detail::vec3_field(m.at("domain"), "hi", prm.domain_hi);
    }
    if (type == "uniform") return FieldModel3D::uniform(prm);
    if (type == "linear-gradient") return FieldModel3D::linear_gradient(prm);
    if (type == "magnetic-mirror") return FieldModel3D::magnetic_mirror(prm);
    if (type == "screw-pinch") return FieldModel3D::screw_pinch(prm);
    throw ConfigError("config: unknown 3d field model '" + type + "'");
}

inline FaradayModel build_faraday_model(const json& m) {
    const std::string type = detail::get_or<std::string>(m, "type", "gradient-magnetic");
    FaradayParams prm;
    prm.B0 = detail::get_or(m, "B0", 1.0);
    prm.L = detail::get_or(m, "L", 1.0);
    prm.E0 = detail::vec3_field(m, "E0", prm.E0);
    prm.E1 = detail::vec3_field(m, "E1", prm.E1);
    prm.B1 = detail::vec3_field(m, "B1", prm.B1);
    prm.fd_grad_omega0 = detail::get_or(m, "fd_grad_omega0", false);
    if (m.contains("domain")) {
        prm.domain_lo = detail::vec4_field(m.at("domain"), "lo", prm.domain_lo);
        prm.domain_hi = detail::vec4_field(m.at("domain"), "hi", prm.domain_hi);
    }
    if (type == "uniform-magnetic") return FaradayModel::uniform_magnetic(prm);
    if (type == "crossed-fields") return FaradayModel::crossed_fields(prm);
    if (type == "gradient-magnetic") return FaradayModel::gradient_magnetic(prm);
    throw ConfigError("config: unknown faraday model '" + type + "'");
}

inline SymplecticSetup build_setup(const json& m) {
    const std::string type = detail::get_or<std::string>(m, "type", "pendulum");
    SymplecticSetup s = make_setup(type);
    if (m.contains("G")) {
        // constant reference-metric override, row-major nested arrays
        const json& G = m.at("G");
        if (!G.is_array() || G.size() != static_cast<std::size_t>(s.dim))
            throw ConfigError("config: G must be a dim x dim matrix");
        MatX Gm(s.dim, s.dim);
        for (int i = 0; i < s.dim; ++i)
            for (int j2 = 0; j2 < s.dim; ++j2) Gm(i, j2) = G[i][j2].get<double>();
        s.G_fn = [Gm](const VecX&) { return Gm; };
        s.flat = true;
    }
    return s;
}

} // namespace slowlab
