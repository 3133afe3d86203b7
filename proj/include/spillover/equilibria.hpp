#pragma once

// Fixed points of the coupled system: the disease-free equilibrium, the two
// boundary equilibria (one disease endemic, the other absent) and the fully
// endemic equilibrium, together with existence conditions and margins.
//
// Every equilibrium reduces to scalar fixed-point equations of the form
//   exp(k*I) * (coupling) = R0 - R0*(tau_i + tau_r)/tau_i * I,
// with a monotone increasing left side and a decreasing right side, so each
// solve has a guaranteed bracket and bisection is exact enough and robust.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "spillover/model.hpp"
#include "spillover/rootfind.hpp"

namespace spillover {

struct OrderingError : std::invalid_argument {
    explicit OrderingError(const std::string& what) : std::invalid_argument(what) {}
};

struct ConvergenceFailure : std::runtime_error {
    explicit ConvergenceFailure(const std::string& what) : std::runtime_error(what) {}
};

enum class Disease { A, B };

enum class EquilibriumKind { DiseaseFree, BoundaryA, BoundaryB, Endemic };

inline const char* to_string(EquilibriumKind k) {
    switch (k) {
        case EquilibriumKind::DiseaseFree: return "disease_free";
        case EquilibriumKind::BoundaryA: return "boundary_a";
        case EquilibriumKind::BoundaryB: return "boundary_b";
        case EquilibriumKind::Endemic: return "endemic";
    }
    return "?";
}

/// Infectious level of the single-disease boundary equilibrium: the unique
/// I > 0 with exp(k I) = r0 - (r0/tau_i)(tau_i + tau_r) I, or nullopt when
/// r0 <= 1 (the curves only meet at I = 0). Independent of the spillover
/// fraction. Solved to |I - I*| <= xtol.
inline std::optional<double> boundary_infectious_level(double r0, double k, double tau_i,
                                                       double tau_r, double xtol = 1e-13) {
    if (!(r0 > 0.0) || !(tau_i > 0.0) || !(tau_r > 0.0) || !(k >= 0.0))
        throw std::invalid_argument("boundary_infectious_level: parameters must be positive");
    if (r0 <= 1.0) return std::nullopt;
    const double slope = (r0 / tau_i) * (tau_i + tau_r);
    // exp(k I) >= 1 pins I* below the point where the linear side crosses 1.
    const double hi = (r0 - 1.0) * tau_i / (r0 * (tau_i + tau_r));
    if (k == 0.0) return hi; // linear case is exact
    auto f = [&](double i) { return std::exp(k * i) - (r0 - slope * i); };
    return bisect(f, 0.0, hi, xtol);
}

/// Threshold the invader's R0 must exceed to grow against a resident disease
/// held at infectious level `i_resident`:
///   1 / (1 - s(1 - exp(-k i)))  >= 1,
/// increasing in i and s, equal to 1 when either is zero.
inline double invasion_threshold(double k, double s, double i_resident) {
    return 1.0 / (1.0 - s * (1.0 - std::exp(-k * i_resident)));
}

/// Where the endemic curve of the named disease meets the opposite axis:
/// for Disease::A returns I^1_B = (1/k) ln(s R0A / (1 - R0A(1-s))), defined
/// only when R0A (1-s) < 1; otherwise the curve approaches an asymptote and
/// there is no real solution. Requires s > 0.
inline std::optional<double> closed_form_axis_intercept(const Params& p, Disease which) {
    if (p.s == 0.0)
        throw std::domain_error("closed_form_axis_intercept: undefined for s = 0");
    const double r0 = which == Disease::A ? p.r0_a : p.r0_b;
    const double denom = 1.0 - r0 * (1.0 - p.s);
    if (denom <= 0.0) return std::nullopt;
    return std::log(p.s * r0 / denom) / p.k;
}

/// Smallest spillover fraction that excludes the weaker disease B,
/// (1 - 1/r0_b) / (1 - 1/r0_a), valid for r0_a > r0_b > 1.
inline double spillover_threshold(double r0_a, double r0_b) {
    if (!(r0_b > 1.0)) throw OrderingError("spillover_threshold: requires r0_b > 1");
    if (!(r0_a > r0_b)) throw OrderingError("spillover_threshold: requires r0_a > r0_b");
    return (1.0 - 1.0 / r0_b) / (1.0 - 1.0 / r0_a);
}

namespace detail {

// Solves the disease-A endemic equation for I_A at fixed I_B:
//   exp(k I_A) * phi_s(I_B) = r0_a - slope_a * I_A.
// The bracket (0, Ibar_A] is valid whenever r0_a > phi_s(I_B).
inline double endemic_inner_level(const Params& p, double i_b, double ibar_a, double xtol) {
    const double phi = invasion_threshold(p.k, p.s, i_b);
    const double slope = (p.r0_a / p.tau_i) * (p.tau_i + p.tau_r);
    auto f = [&](double i_a) { return std::exp(p.k * i_a) * phi - (p.r0_a - slope * i_a); };
    return bisect(f, 0.0, ibar_a, xtol);
}

} // namespace detail

/// Infectious levels (I_A, I_B) of the fully endemic equilibrium, or nullopt
/// when the existence conditions
///   r0_a > phi_s(Ibar_B)  and  r0_b > phi_s(Ibar_A)
/// fail (the projected curves do not cross). At s = 0 the coupled system
/// decouples and the levels equal the boundary pair.
inline std::optional<std::pair<double, double>> endemic_levels(const Params& p,
                                                               double xtol = 1e-13) {
    p.validate();
    const auto ibar_a = boundary_infectious_level(p.r0_a, p.k, p.tau_i, p.tau_r, xtol);
    const auto ibar_b = boundary_infectious_level(p.r0_b, p.k, p.tau_i, p.tau_r, xtol);
    if (!ibar_a || !ibar_b) return std::nullopt;
    if (p.s == 0.0) return std::make_pair(*ibar_a, *ibar_b);

    if (p.r0_a <= invasion_threshold(p.k, p.s, *ibar_b)) return std::nullopt;
    if (p.r0_b <= invasion_threshold(p.k, p.s, *ibar_a)) return std::nullopt;

    // Outer equation in I_B, with I_A eliminated through the inner solve.
    const double slope_b = (p.r0_b / p.tau_i) * (p.tau_i + p.tau_r);
    auto outer = [&](double i_b) {
        const double i_a = detail::endemic_inner_level(p, i_b, *ibar_a, xtol);
        return std::exp(p.k * i_b) * invasion_threshold(p.k, p.s, i_a) -
               (p.r0_b - slope_b * i_b);
    };
    double lo = 0.0, hi = *ibar_b;
    double flo = outer(lo), fhi = outer(hi);
    if (flo > 0.0 || fhi < 0.0)
        throw ConvergenceFailure("endemic_levels: bracket lost; existence margins " +
                                 std::to_string(p.r0_a - invasion_threshold(p.k, p.s, *ibar_b)) +
                                 ", " +
                                 std::to_string(p.r0_b - invasion_threshold(p.k, p.s, *ibar_a)));
    int iter = 0;
    while (hi - lo > xtol) {
        if (++iter > 200)
            throw ConvergenceFailure("endemic_levels: outer bisection exceeded 200 iterations");
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (outer(mid) > 0.0 ? hi : lo) = mid;
    }
    const double i_b = 0.5 * (lo + hi);
    return std::make_pair(detail::endemic_inner_level(p, i_b, *ibar_a, xtol), i_b);
}

/// Full 8-compartment state of an equilibrium with infectious levels
/// (i_a, i_b): R = (tau_r/tau_i) I, perceived prevalence equals prevalence.
inline State equilibrium_state(const Params& p, double i_a, double i_b) {
    const double q = p.tau_r / p.tau_i;
    State x;
    x.i_a = i_a;
    x.r_a = q * i_a;
    x.s_a = 1.0 - i_a - q * i_a;
    x.it_a = i_a;
    x.i_b = i_b;
    x.r_b = q * i_b;
    x.s_b = 1.0 - i_b - q * i_b;
    x.it_b = i_b;
    return x;
}

/// Max-norm of the time derivative; zero (to solver precision) at genuine
/// fixed points.
inline double residual_norm(const Params& p, const State& x) {
    const State d = rhs(p, x);
    double m = 0.0;
    for (double v : d.to_array()) m = std::max(m, std::abs(v));
    return m;
}

struct EquilibriumReport {
    EquilibriumKind kind = EquilibriumKind::DiseaseFree;
    bool exists = false;
    double i_a = 0.0;
    double i_b = 0.0;
    State full_state;
    /// Signed distance of the binding existence inequality from equality;
    /// +infinity for the disease-free equilibrium, which always exists.
    double existence_margin = 0.0;
    double residual = 0.0; ///< max |rhs| at full_state, when it exists
};

/// All four equilibria, in the order DiseaseFree, BoundaryA, BoundaryB,
/// Endemic. Reports for absent equilibria carry exists = false and the
/// (negative) existence margin. Solver failures propagate with the failing
/// kind attached.
inline std::array<EquilibriumReport, 4> all_equilibria(const Params& p, double xtol = 1e-13) {
    p.validate();
    std::array<EquilibriumReport, 4> out;

    auto finish = [&](EquilibriumReport& r) {
        if (r.exists) {
            r.full_state = equilibrium_state(p, r.i_a, r.i_b);
            r.residual = residual_norm(p, r.full_state);
        }
    };

    auto& dfe = out[0];
    dfe.kind = EquilibriumKind::DiseaseFree;
    dfe.exists = true;
    dfe.existence_margin = std::numeric_limits<double>::infinity();
    finish(dfe);

    std::optional<double> ibar_a, ibar_b;
    auto& ba = out[1];
    ba.kind = EquilibriumKind::BoundaryA;
    ba.existence_margin = p.r0_a - 1.0;
    try {
        ibar_a = boundary_infectious_level(p.r0_a, p.k, p.tau_i, p.tau_r, xtol);
    } catch (const BracketFailure& e) {
        throw ConvergenceFailure(std::string("boundary_a: ") + e.what());
    }
    if (ibar_a) {
        ba.exists = true;
        ba.i_a = *ibar_a;
    }
    finish(ba);

    auto& bb = out[2];
    bb.kind = EquilibriumKind::BoundaryB;
    bb.existence_margin = p.r0_b - 1.0;
    try {
        ibar_b = boundary_infectious_level(p.r0_b, p.k, p.tau_i, p.tau_r, xtol);
    } catch (const BracketFailure& e) {
        throw ConvergenceFailure(std::string("boundary_b: ") + e.what());
    }
    if (ibar_b) {
        bb.exists = true;
        bb.i_b = *ibar_b;
    }
    finish(bb);

    auto& en = out[3];
    en.kind = EquilibriumKind::Endemic;
    // Margins use level 0 when a boundary level is absent: the continuous
    // limit of the Table-style conditions as r0 -> 1.
    const double gap_a = p.r0_a - invasion_threshold(p.k, p.s, ibar_b ? *ibar_b : 0.0);
    const double gap_b = p.r0_b - invasion_threshold(p.k, p.s, ibar_a ? *ibar_a : 0.0);
    en.existence_margin = std::min(gap_a, gap_b);
    try {
        if (auto lv = endemic_levels(p, xtol)) {
            en.exists = true;
            en.i_a = lv->first;
            en.i_b = lv->second;
        }
    } catch (const ConvergenceFailure& e) {
        throw ConvergenceFailure(std::string("endemic: ") + e.what());
    }
    finish(en);

    return out;
}

} // namespace spillover
