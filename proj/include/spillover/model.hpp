#pragma once

// Two-pathogen SIRS model with waning immunity and a lagged behavioral
// response that couples the diseases through risk-driven transmission
// reduction ("behavioral spillover"). All functions here are pure.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace spillover {

/// Model parameters. Infectivities are derived from the basic reproduction
/// numbers (beta_0i = R0i / tau_i) so the two never get out of sync.
struct Params {
    double r0_a = 3.0;    ///< basic reproduction number of disease A
    double r0_b = 2.0;    ///< basic reproduction number of disease B
    double tau_i = 7.0;   ///< infectious period [days]
    double tau_r = 100.0; ///< immunity period [days]
    double tau_p = 30.0;  ///< risk-perception adjustment delay [days]
    double k = 100.0;     ///< sensitivity to perceived risk
    double s = 0.0;       ///< spillover fraction, 0 = independent, 1 = perfect

    double beta0_a() const { return r0_a / tau_i; }
    double beta0_b() const { return r0_b / tau_i; }

    /// Returns an empty string when valid, otherwise the first violation.
    std::string validate_message() const {
        if (!(r0_a > 0.0)) return "r0_a must be > 0";
        if (!(r0_b > 0.0)) return "r0_b must be > 0";
        if (!(tau_i > 0.0)) return "tau_i must be > 0";
        if (!(tau_r > 0.0)) return "tau_r must be > 0";
        if (!(tau_p > 0.0)) return "tau_p must be > 0";
        if (!(k >= 0.0)) return "k must be >= 0";
        if (!(s >= 0.0 && s <= 1.0)) return "s must be in [0, 1]";
        return {};
    }

    void validate() const {
        if (auto msg = validate_message(); !msg.empty())
            throw std::invalid_argument("Params: " + msg);
    }
};

/// The eight compartments of the coupled system, as population fractions.
/// it_a / it_b are the lagged (perceived) prevalences.
struct State {
    double s_a = 0.0, i_a = 0.0, r_a = 0.0, it_a = 0.0;
    double s_b = 0.0, i_b = 0.0, r_b = 0.0, it_b = 0.0;

    std::array<double, 8> to_array() const {
        return {s_a, i_a, r_a, it_a, s_b, i_b, r_b, it_b};
    }
    static State from_array(const std::array<double, 8>& v) {
        return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
    }

    /// Per-disease conservation defects S + I + R - 1.
    double mass_defect_a() const { return s_a + i_a + r_a - 1.0; }
    double mass_defect_b() const { return s_b + i_b + r_b - 1.0; }

    std::string validate_message(double tol = 1e-9) const {
        const auto v = to_array();
        for (double x : v)
            if (!(x >= -tol && x <= 1.0 + tol)) return "component outside [0, 1]";
        if (std::abs(mass_defect_a()) > tol) return "S_A + I_A + R_A != 1";
        if (std::abs(mass_defect_b()) > tol) return "S_B + I_B + R_B != 1";
        return {};
    }
};

/// Standard outbreak initial condition: one in 10^4 infectious for each
/// disease, nobody recovered, no perceived prevalence yet.
inline State initial_state() {
    return {0.9999, 0.0001, 0.0, 0.0, 0.9999, 0.0001, 0.0, 0.0};
}

/// Risk-response multiplier m = exp(-k * It), in (0, 1]. Negative perceived
/// prevalence (integrator overshoot) is clamped to zero first; the multiplier
/// must never amplify transmission.
inline double behavioral_multiplier(double k, double it) {
    return std::exp(-k * (it > 0.0 ? it : 0.0));
}

struct TransmissionRates {
    double beta_a = 0.0; ///< 1/day
    double beta_b = 0.0; ///< 1/day
};

/// Effective transmission rates under spillover:
///   beta_A = m_A * (1 - s(1 - m_B)) * beta0_A
///   beta_B = (1 - s(1 - m_A)) * m_B * beta0_B
/// s = 0 decouples the diseases; s = 1 makes both respond to both.
inline TransmissionRates transmission_rates(const Params& p, double it_a, double it_b) {
    const double m_a = behavioral_multiplier(p.k, it_a);
    const double m_b = behavioral_multiplier(p.k, it_b);
    return {m_a * (1.0 - p.s * (1.0 - m_b)) * p.beta0_a(),
            (1.0 - p.s * (1.0 - m_a)) * m_b * p.beta0_b()};
}

/// Derived per-state observables.
struct Observables {
    double beta_a = 0.0, beta_b = 0.0; ///< transmission rates [1/day]
    double re_a = 0.0, re_b = 0.0;     ///< effective reproduction numbers
    double m_a = 1.0, m_b = 1.0;       ///< behavioral multipliers
};

inline Observables observables(const Params& p, const State& x) {
    Observables o;
    o.m_a = behavioral_multiplier(p.k, x.it_a);
    o.m_b = behavioral_multiplier(p.k, x.it_b);
    const auto tr = transmission_rates(p, x.it_a, x.it_b);
    o.beta_a = tr.beta_a;
    o.beta_b = tr.beta_b;
    o.re_a = tr.beta_a * x.s_a * p.tau_i;
    o.re_b = tr.beta_b * x.s_b * p.tau_i;
    return o;
}

/// R_e,i = m_i (1 - s(1 - m_j)) S_i R_0,i; equals 1 at any endemic fixed point.
inline std::pair<double, double> effective_r(const Params& p, const State& x) {
    const auto o = observables(p, x);
    return {o.re_a, o.re_b};
}

/// Time derivative of the full 8-compartment state [1/day]. The S/I/R flows
/// share subexpressions so each disease's derivatives sum to zero exactly.
inline State rhs(const Params& p, const State& x) {
    const auto tr = transmission_rates(p, x.it_a, x.it_b);

    const double inf_a = tr.beta_a * x.s_a * x.i_a;
    const double rec_a = x.i_a / p.tau_i;
    const double wan_a = x.r_a / p.tau_r;

    const double inf_b = tr.beta_b * x.s_b * x.i_b;
    const double rec_b = x.i_b / p.tau_i;
    const double wan_b = x.r_b / p.tau_r;

    State d;
    d.s_a = wan_a - inf_a;
    d.i_a = inf_a - rec_a;
    d.r_a = rec_a - wan_a;
    d.it_a = (x.i_a - x.it_a) / p.tau_p;
    d.s_b = wan_b - inf_b;
    d.i_b = inf_b - rec_b;
    d.r_b = rec_b - wan_b;
    d.it_b = (x.i_b - x.it_b) / p.tau_p;
    return d;
}

} // namespace spillover
