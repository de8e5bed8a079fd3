#pragma once

// Fixed-step RK4 with an optional error-controlled mode. Every outer step
// carries a step-doubling estimate (one dt step vs two dt/2 steps, max
// component difference); with error control on, steps whose estimate
// exceeds the tolerance are recursively halved. The halved result is the
// one advanced in either mode.

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slowlab/errors.hpp"
#include "slowlab/linalg.hpp"

namespace slowlab {

using RhsFn = std::function<VecX(double t, const VecX& y)>;

inline VecX rk4_step(const RhsFn& rhs, double t, const VecX& y, double dt) {
    if (!(dt != 0.0)) throw InvalidArgument("rk4_step: dt must be nonzero");
    const VecX k1 = rhs(t, y);
    const VecX k2 = rhs(t + 0.5 * dt, y + (0.5 * dt) * k1);
    const VecX k3 = rhs(t + 0.5 * dt, y + (0.5 * dt) * k2);
    const VecX k4 = rhs(t + dt, y + dt * k3);
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct ExitEvent {
    double time = 0;
    std::string reason;
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<VecX> states;
    std::vector<std::string> observable_names;
    std::vector<std::vector<double>> observables; // observables[k][sample]
    std::optional<ExitEvent> exit_event;
    std::optional<std::string> error;     // rhs failure annotation
    double max_step_error = 0;            // largest single-step estimate
    double accumulated_step_error = 0;    // sum of per-step estimates
    bool flagged = false;                 // an estimate exceeded the tolerance
    std::size_t steps_taken = 0;
};

struct Observer {
    std::string name;
    std::function<double(double t, const VecX& y)> fn;
};

struct DomainBox {
    VecX lo, hi; // same length as the state; use +/-inf to leave a
                 // component unbounded
    bool contains(const VecX& y) const {
        if (lo.size() != y.size()) return true;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] < lo[i] || y[i] > hi[i]) return false;
        return true;
    }
    static DomainBox unbounded(std::size_t n) {
        const double inf = std::numeric_limits<double>::infinity();
        DomainBox b{VecX(n), VecX(n)};
        for (std::size_t i = 0; i < n; ++i) {
            b.lo[i] = -inf;
            b.hi[i] = inf;
        }
        return b;
    }
};

struct IntegrateOptions {
    double dt = 0.1;
    double t_end = 1.0;
    int observer_stride = 64;      // store every this many outer steps
    double step_tolerance = 1e-6;  // flag threshold / error-control target
    bool error_control = false;
    int max_halvings = 16;
};

namespace detail {

struct StepOutcome {
    VecX y;
    double max_est = 0;
    double sum_est = 0;
};

inline StepOutcome controlled_step(const RhsFn& rhs, double t, const VecX& y, double dt,
                                   const IntegrateOptions& opt, int depth) {
    const VecX full = rk4_step(rhs, t, y, dt);
    const VecX h1 = rk4_step(rhs, t, y, 0.5 * dt);
    const VecX h2 = rk4_step(rhs, t + 0.5 * dt, h1, 0.5 * dt);
    double est = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        est = std::max(est, std::abs(full[i] - h2[i]));
    if (opt.error_control && est > opt.step_tolerance && depth < opt.max_halvings) {
        const StepOutcome a = controlled_step(rhs, t, y, 0.5 * dt, opt, depth + 1);
        const StepOutcome b = controlled_step(rhs, t + 0.5 * dt, a.y, 0.5 * dt, opt, depth + 1);
        return {b.y, std::max(a.max_est, b.max_est), a.sum_est + b.sum_est};
    }
    return {h2, est, est};
}

} // namespace detail

/// Integrate to t_end or until the state leaves the domain box. The record
/// always samples the initial and final states; observers are sampled every
/// `observer_stride` outer steps.
inline TrajectoryRecord integrate(const RhsFn& rhs, const VecX& y0,
                                  const IntegrateOptions& opt,
                                  const std::vector<Observer>& observers = {},
                                  const DomainBox* box = nullptr) {
    if (!(opt.dt > 0)) throw InvalidArgument("integrate: dt must be positive");
    if (!(opt.t_end > 0)) throw InvalidArgument("integrate: t_end must be positive");

    TrajectoryRecord rec;
    for (const Observer& o : observers) {
        rec.observable_names.push_back(o.name);
        rec.observables.emplace_back();
    }

    const auto sample = [&](double t, const VecX& y) {
        rec.times.push_back(t);
        rec.states.push_back(y);
        for (std::size_t k = 0; k < observers.size(); ++k)
            rec.observables[k].push_back(observers[k].fn(t, y));
    };

    VecX y = y0;
    double t = 0;
    if (box && !box->contains(y)) {
        sample(t, y);
        rec.exit_event = ExitEvent{0.0, "initial state outside domain box"};
        return rec;
    }
    sample(t, y);

    const std::size_t nsteps = static_cast<std::size_t>(std::ceil(opt.t_end / opt.dt - 1e-12));
    for (std::size_t step = 0; step < nsteps; ++step) {
        const double dt = std::min(opt.dt, opt.t_end - t);
        detail::StepOutcome out;
        try {
            out = detail::controlled_step(rhs, t, y, dt, opt, 0);
        } catch (const Error& e) {
            rec.error = std::string("rhs failure at t=") + std::to_string(t) + ": " + e.what();
            break;
        }
        y = out.y;
        t += dt;
        rec.max_step_error = std::max(rec.max_step_error, out.max_est);
        rec.accumulated_step_error += out.sum_est;
        if (out.max_est > opt.step_tolerance) rec.flagged = true;
        rec.steps_taken++;

        if (box && !box->contains(y)) {
            sample(t, y);
            rec.exit_event = ExitEvent{t, "state left domain box"};
            return rec;
        }
        if ((step + 1) % static_cast<std::size_t>(std::max(1, opt.observer_stride)) == 0 ||
            step + 1 == nsteps)
            sample(t, y);
    }
    return rec;
}

} // namespace slowlab
