#pragma once

// Adaptive integration of the two-pathogen model with output at caller-chosen
// sample times (served from the dense interpolant).

#include <algorithm>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "spillover/dopri5.hpp"
#include "spillover/model.hpp"

namespace spillover {

struct IntegrationConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double t_start = 0.0;
    double t_end = 365.0;
    std::vector<double> sample_times; ///< strictly increasing, within [t_start, t_end]
    double max_step = 0.0;            ///< 0 = unlimited

    std::string validate_message() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) return "tolerances must be > 0";
        if (!(t_end > t_start)) return "t_end must exceed t_start";
        if (sample_times.empty()) return "sample_times must be nonempty";
        double prev = -std::numeric_limits<double>::infinity();
        for (double t : sample_times) {
            if (t < t_start || t > t_end) return "sample time outside [t_start, t_end]";
            if (!(t > prev)) return "sample_times must be strictly increasing";
            prev = t;
        }
        return {};
    }

    void validate() const {
        if (auto msg = validate_message(); !msg.empty())
            throw std::invalid_argument("IntegrationConfig: " + msg);
    }
};

/// n equally spaced times from t0 to t1 inclusive (n >= 2).
inline std::vector<double> linspace(double t0, double t1, std::size_t n) {
    if (n < 2) throw std::invalid_argument("linspace: need at least 2 points");
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
    v.back() = t1;
    return v;
}

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    std::vector<Observables> obs;

    const State& back_state() const { return states.back(); }
};

/// Integrates the model from x0 and returns the state and observables at
/// exactly cfg.sample_times.
inline Trajectory integrate(const Params& p, const State& x0, const IntegrationConfig& cfg) {
    p.validate();
    cfg.validate();
    if (auto msg = x0.validate_message(); !msg.empty())
        throw std::invalid_argument("integrate: invalid initial state: " + msg);

    Trajectory traj;
    traj.times.reserve(cfg.sample_times.size());
    traj.states.reserve(cfg.sample_times.size());
    traj.obs.reserve(cfg.sample_times.size());

    std::size_t next = 0;
    auto emit = [&](double t, const State& x) {
        traj.times.push_back(t);
        traj.states.push_back(x);
        traj.obs.push_back(observables(p, x));
    };
    while (next < cfg.sample_times.size() && cfg.sample_times[next] <= cfg.t_start) {
        emit(cfg.sample_times[next], x0);
        ++next;
    }

    auto f = [&p](double, const std::array<double, 8>& y) {
        return rhs(p, State::from_array(y)).to_array();
    };
    dopri5_integrate<8>(f, cfg.t_start, cfg.t_end, x0.to_array(), cfg.rel_tol, cfg.abs_tol,
                        cfg.max_step,
                        [&](const DenseStep<8>& dense, double t, const std::array<double, 8>&) {
                            while (next < cfg.sample_times.size() &&
                                   cfg.sample_times[next] <= t) {
                                const double theta = (cfg.sample_times[next] - dense.t0) / dense.h;
                                emit(cfg.sample_times[next], State::from_array(dense.eval(theta)));
                                ++next;
                            }
                        });
    if (next != cfg.sample_times.size())
        throw std::logic_error("integrate: sample times not exhausted");
    return traj;
}

/// Convenience wrapper: state at a single time t_end starting from x0 at t=0.
inline State integrate_to(const Params& p, const State& x0, double t_end, double rel_tol = 1e-8,
                          double abs_tol = 1e-10) {
    IntegrationConfig cfg;
    cfg.rel_tol = rel_tol;
    cfg.abs_tol = abs_tol;
    cfg.t_end = t_end;
    cfg.sample_times = {t_end};
    return integrate(p, x0, cfg).back_state();
}

} // namespace spillover
