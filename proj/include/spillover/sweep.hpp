#pragma once

// Phase-diagram machinery over the (spillover, R0_B) plane: simulated
// persistence/exclusion of disease B, its dominance percentage over the
// first year, the analytic coexistence region from the endemic existence
// conditions, and the closed-form approximation curve.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spillover/equilibria.hpp"
#include "spillover/integrate.hpp"
#include "spillover/model.hpp"
#include "spillover/parallel.hpp"

namespace spillover {

struct SweepAxes {
    std::vector<double> s_values;   ///< strictly increasing, within [0, 1]
    std::vector<double> r0b_values; ///< strictly increasing
    double r0_a = 3.0;

    std::size_t size() const { return s_values.size() * r0b_values.size(); }

    std::string validate_message() const {
        if (s_values.empty() || r0b_values.empty()) return "axes must be nonempty";
        for (std::size_t i = 1; i < s_values.size(); ++i)
            if (!(s_values[i] > s_values[i - 1])) return "s_values must be strictly increasing";
        for (std::size_t i = 1; i < r0b_values.size(); ++i)
            if (!(r0b_values[i] > r0b_values[i - 1]))
                return "r0b_values must be strictly increasing";
        if (s_values.front() < 0.0 || s_values.back() > 1.0) return "s_values outside [0, 1]";
        return {};
    }
};

struct SweepCell {
    bool valid = true;
    bool persists_b = false;
    /// Percent of daily samples with I_B > I_A; unset for identical diseases
    /// (r0_a == r0_b), which are never considered dominant.
    std::optional<double> dominance_pct_b;
    bool analytic_coexist = false;
    /// min of the two signed endemic existence gaps (Table-style conditions)
    double margin = 0.0;
    std::string error;
};

struct SweepGrid {
    SweepAxes axes;
    std::vector<SweepCell> cells; ///< row-major: index = is * n_r0b + ir

    SweepCell& at(std::size_t is, std::size_t ir) {
        return cells[is * axes.r0b_values.size() + ir];
    }
    const SweepCell& at(std::size_t is, std::size_t ir) const {
        return cells[is * axes.r0b_values.size() + ir];
    }
};

struct SweepOptions {
    double horizon = 365.0;              ///< days simulated per cell
    double persist_threshold = 1e-4;     ///< I_B(horizon) at or above => persists
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    int jobs = 1;
};

/// Percent of daily sample times in [0, horizon] at which disease B's
/// prevalence strictly exceeds disease A's. Identical diseases (equal basic
/// reproduction numbers with the shared initial condition) return nullopt:
/// the trajectories coincide and neither is dominant.
inline std::optional<double> dominance_percentage(const Params& p, double horizon,
                                                  double rel_tol = 1e-8,
                                                  double abs_tol = 1e-10) {
    if (!(horizon > 0.0)) throw std::invalid_argument("dominance_percentage: horizon must be > 0");
    if (p.r0_a == p.r0_b) return std::nullopt;
    IntegrationConfig cfg;
    cfg.rel_tol = rel_tol;
    cfg.abs_tol = abs_tol;
    cfg.t_end = horizon;
    const auto n = static_cast<std::size_t>(std::floor(horizon));
    cfg.sample_times.reserve(n + 1);
    for (std::size_t d = 0; d <= n; ++d) cfg.sample_times.push_back(static_cast<double>(d));
    if (cfg.sample_times.back() < horizon) cfg.sample_times.push_back(horizon);
    const auto traj = integrate(p, initial_state(), cfg);
    std::size_t above = 0;
    for (const auto& x : traj.states)
        if (x.i_b > x.i_a) ++above;
    return 100.0 * static_cast<double>(above) / static_cast<double>(traj.states.size());
}

/// Analytic coexistence test for one parameter set: both endemic existence
/// gaps positive. Margin uses level 0 for a boundary level that does not
/// exist (continuous limit as r0 -> 1).
inline std::pair<bool, double> analytic_coexistence(const Params& p) {
    const auto ibar_a = boundary_infectious_level(p.r0_a, p.k, p.tau_i, p.tau_r);
    const auto ibar_b = boundary_infectious_level(p.r0_b, p.k, p.tau_i, p.tau_r);
    const double gap_a = p.r0_a - invasion_threshold(p.k, p.s, ibar_b ? *ibar_b : 0.0);
    const double gap_b = p.r0_b - invasion_threshold(p.k, p.s, ibar_a ? *ibar_a : 0.0);
    const double margin = std::min(gap_a, gap_b);
    return {ibar_a.has_value() && ibar_b.has_value() && gap_a > 0.0 && gap_b > 0.0, margin};
}

namespace detail {

inline Params cell_params(const Params& tmpl, const SweepAxes& axes, std::size_t is,
                          std::size_t ir) {
    Params p = tmpl;
    p.r0_a = axes.r0_a;
    p.s = axes.s_values[is];
    p.r0_b = axes.r0b_values[ir];
    return p;
}

} // namespace detail

/// One-year simulation per cell from the standard initial condition.
/// Fills persists_b and dominance_pct_b; integration failures mark the cell
/// invalid and the sweep continues.
inline SweepGrid simulated_persistence(const Params& tmpl, const SweepAxes& axes,
                                       const SweepOptions& opt = {}) {
    if (auto msg = axes.validate_message(); !msg.empty())
        throw std::invalid_argument("SweepAxes: " + msg);
    SweepGrid grid;
    grid.axes = axes;
    grid.cells.resize(axes.size());
    const std::size_t nr = axes.r0b_values.size();
    parallel_for(grid.cells.size(), opt.jobs, [&](std::size_t idx) {
        const std::size_t is = idx / nr, ir = idx % nr;
        const Params p = detail::cell_params(tmpl, axes, is, ir);
        SweepCell& cell = grid.cells[idx];
        try {
            IntegrationConfig cfg;
            cfg.rel_tol = opt.rel_tol;
            cfg.abs_tol = opt.abs_tol;
            cfg.t_end = opt.horizon;
            const auto n = static_cast<std::size_t>(std::floor(opt.horizon));
            cfg.sample_times.reserve(n + 1);
            for (std::size_t d = 0; d <= n; ++d)
                cfg.sample_times.push_back(static_cast<double>(d));
            if (cfg.sample_times.back() < opt.horizon) cfg.sample_times.push_back(opt.horizon);
            const auto traj = integrate(p, initial_state(), cfg);
            cell.persists_b = traj.back_state().i_b >= opt.persist_threshold;
            if (p.r0_a == p.r0_b) {
                cell.dominance_pct_b = std::nullopt;
            } else {
                std::size_t above = 0;
                for (const auto& x : traj.states)
                    if (x.i_b > x.i_a) ++above;
                cell.dominance_pct_b =
                    100.0 * static_cast<double>(above) / static_cast<double>(traj.states.size());
            }
        } catch (const std::exception& e) {
            cell.valid = false;
            cell.error = e.what();
        }
    });
    return grid;
}

/// Endemic existence conditions per cell; no integration involved.
inline SweepGrid analytic_persistence(const Params& tmpl, const SweepAxes& axes) {
    if (auto msg = axes.validate_message(); !msg.empty())
        throw std::invalid_argument("SweepAxes: " + msg);
    SweepGrid grid;
    grid.axes = axes;
    grid.cells.resize(axes.size());
    const std::size_t nr = axes.r0b_values.size();
    for (std::size_t idx = 0; idx < grid.cells.size(); ++idx) {
        const Params p = detail::cell_params(tmpl, axes, idx / nr, idx % nr);
        SweepCell& cell = grid.cells[idx];
        try {
            const auto [coexist, margin] = analytic_coexistence(p);
            cell.analytic_coexist = coexist;
            cell.margin = margin;
        } catch (const std::exception& e) {
            cell.valid = false;
            cell.error = e.what();
        }
    }
    return grid;
}

/// Full sweep: simulation and analytic conditions merged per cell.
inline SweepGrid run_sweep(const Params& tmpl, const SweepAxes& axes,
                           const SweepOptions& opt = {}) {
    SweepGrid grid = simulated_persistence(tmpl, axes, opt);
    const SweepGrid analytic = analytic_persistence(tmpl, axes);
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        grid.cells[i].analytic_coexist = analytic.cells[i].analytic_coexist;
        grid.cells[i].margin = analytic.cells[i].margin;
        if (!analytic.cells[i].valid) {
            grid.cells[i].valid = false;
            if (grid.cells[i].error.empty()) grid.cells[i].error = analytic.cells[i].error;
        }
    }
    return grid;
}

/// Theorem-style approximation of the exclusion threshold, vectorized over
/// r0_b. Values outside (1, r0_a) raise OrderingError.
inline std::vector<std::pair<double, double>> threshold_curve(double r0_a,
                                                              const std::vector<double>& r0b) {
    std::vector<std::pair<double, double>> out;
    out.reserve(r0b.size());
    for (double r : r0b) out.emplace_back(r, spillover_threshold(r0_a, r));
    return out;
}

/// Smallest spillover fraction at which the analytic coexistence margin
/// crosses zero for the given r0_b (1.0 when coexistence survives perfect
/// spillover). The margin is decreasing in s, so bisection applies.
inline double analytic_exclusion_boundary(const Params& tmpl, double r0_b, double xtol = 1e-12) {
    Params p = tmpl;
    p.r0_b = r0_b;
    auto margin_at = [&](double s) {
        p.s = s;
        return analytic_coexistence(p).second;
    };
    if (margin_at(1.0) > 0.0) return 1.0;
    if (margin_at(0.0) <= 0.0) return 0.0;
    return bisect(margin_at, 0.0, 1.0, xtol);
}

} // namespace spillover
