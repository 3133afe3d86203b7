#pragma once

// Monte Carlo practical-identifiability protocol: synthesize observations
// from known parameters, perturb them with multiplicative Gaussian noise,
// re-fit by bounded simplex search started at the truth, and score each
// parameter by its average relative error (ARE) across noise levels.
//
// The whole pipeline is deterministic for a fixed seed: every (noise level,
// dataset) pair owns an RNG substream and a result slot, so the parallelism
// degree never changes a single output byte.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spillover/integrate.hpp"
#include "spillover/model.hpp"
#include "spillover/nelder_mead.hpp"
#include "spillover/parallel.hpp"
#include "spillover/rng.hpp"

namespace spillover {

enum class OutputKind { Prevalence, RecognizedPrevalence };

/// Observation map applied to trajectories. Prevalence reports the
/// infectious fractions; recognized prevalence reports scaled copies of the
/// perceived (lagged) prevalence.
struct OutputModel {
    OutputKind kind = OutputKind::Prevalence;
    double k_a = 0.5; ///< reporting fraction of disease A (recognized only)
    double k_b = 0.5; ///< reporting fraction of disease B (recognized only)

    std::string validate_message() const {
        if (kind == OutputKind::RecognizedPrevalence) {
            if (!(k_a > 0.0 && k_a <= 1.0)) return "k_a must be in (0, 1]";
            if (!(k_b > 0.0 && k_b <= 1.0)) return "k_b must be in (0, 1]";
        }
        return {};
    }
};

/// A pair of observation series on a shared time grid.
struct Series {
    std::vector<double> times;
    std::vector<double> y_a;
    std::vector<double> y_b;
};

/// Master ordering of fittable parameters. The model is re-parameterized in
/// terms of the infectivities (beta_i = r0_i / tau_i) so that the infectious
/// period can vary independently, matching how the rates enter the equations.
inline const std::array<std::string, 8>& fittable_parameter_names() {
    static const std::array<std::string, 8> names = {"beta_a", "beta_b", "k",   "tau_r",
                                                     "tau_i",  "tau_p",  "k_a", "k_b"};
    return names;
}

inline int fittable_parameter_index(const std::string& name) {
    const auto& names = fittable_parameter_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

/// Full 8-vector (beta_a, beta_b, k, tau_r, tau_i, tau_p, k_a, k_b).
inline std::array<double, 8> full_parameter_vector(const Params& p, const OutputModel& out) {
    return {p.beta0_a(), p.beta0_b(), p.k, p.tau_r, p.tau_i, p.tau_p, out.k_a, out.k_b};
}

/// Rebuilds (Params, OutputModel) from a full vector; the spillover fraction
/// and output kind are taken from the base configuration (never fitted).
inline std::pair<Params, OutputModel> from_parameter_vector(const std::array<double, 8>& v,
                                                            const Params& base,
                                                            const OutputModel& out_base) {
    Params p = base;
    p.tau_i = v[4];
    p.r0_a = v[0] * v[4];
    p.r0_b = v[1] * v[4];
    p.k = v[2];
    p.tau_r = v[3];
    p.tau_p = v[5];
    OutputModel out = out_base;
    out.k_a = v[6];
    out.k_b = v[7];
    return {p, out};
}

struct IdentConfig {
    Params true_params;
    OutputModel output;
    std::vector<double> noise_levels = {0.0, 0.01, 0.05, 0.10, 0.20, 0.30};
    int n_datasets = 1000;
    std::vector<double> sample_times; ///< empty = daily over [0, 365]
    std::vector<std::string> fit_params; ///< empty = default set for the output kind
    double bound_lo_scale = 0.1; ///< lower bound = scale * true value
    double bound_hi_scale = 10.0;
    std::map<std::string, std::pair<double, double>> explicit_bounds;
    std::uint64_t rng_seed = 1;
    int jobs = 1;
    double fit_rel_tol = 1e-6; ///< integrator tolerances inside the objective
    double fit_abs_tol = 1e-9;
    NelderMeadOptions optimizer;

    std::vector<double> resolved_sample_times() const {
        if (!sample_times.empty()) return sample_times;
        std::vector<double> t(366);
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
        return t;
    }

    std::vector<std::string> resolved_fit_params() const {
        if (!fit_params.empty()) return fit_params;
        std::vector<std::string> names = {"beta_a", "beta_b", "k", "tau_r", "tau_i", "tau_p"};
        if (output.kind == OutputKind::RecognizedPrevalence) {
            names.push_back("k_a");
            names.push_back("k_b");
        }
        return names;
    }

    std::pair<double, double> bounds_for(const std::string& name) const {
        if (auto it = explicit_bounds.find(name); it != explicit_bounds.end()) return it->second;
        const int idx = fittable_parameter_index(name);
        const double truth = full_parameter_vector(true_params, output)[idx];
        return {bound_lo_scale * truth, bound_hi_scale * truth};
    }

    std::string validate_message() const {
        if (auto msg = true_params.validate_message(); !msg.empty()) return msg;
        if (auto msg = output.validate_message(); !msg.empty()) return msg;
        if (noise_levels.empty()) return "noise_levels must be nonempty";
        for (double s : noise_levels)
            if (!(s >= 0.0)) return "noise levels must be >= 0";
        if (n_datasets < 1) return "n_datasets must be >= 1";
        const auto times = resolved_sample_times();
        if (times.empty()) return "sample_times must be nonempty";
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1])) return "sample_times must be strictly increasing";
        const auto names = resolved_fit_params();
        if (names.empty()) return "fit_params must be nonempty";
        for (const auto& n : names) {
            if (fittable_parameter_index(n) < 0) return "unknown fit parameter: " + n;
            if (output.kind == OutputKind::Prevalence && (n == "k_a" || n == "k_b"))
                return "reporting fractions are not observable from prevalence output";
            const auto [lo, hi] = bounds_for(n);
            const double truth =
                full_parameter_vector(true_params, output)[fittable_parameter_index(n)];
            if (!(lo < truth && truth < hi)) return "bounds for " + n + " must contain the truth";
        }
        if (jobs < 1) return "jobs must be >= 1";
        return {};
    }

    void validate() const {
        if (auto msg = validate_message(); !msg.empty())
            throw std::invalid_argument("IdentConfig: " + msg);
    }
};

/// Noise-free observations at the requested times.
inline Series synthesize(const Params& p, const OutputModel& out,
                         const std::vector<double>& times, double rel_tol = 1e-6,
                         double abs_tol = 1e-9) {
    IntegrationConfig cfg;
    cfg.rel_tol = rel_tol;
    cfg.abs_tol = abs_tol;
    cfg.t_end = times.back() > 0.0 ? times.back() : 1.0;
    cfg.sample_times = times;
    const auto traj = integrate(p, initial_state(), cfg);
    Series s;
    s.times = times;
    s.y_a.reserve(times.size());
    s.y_b.reserve(times.size());
    for (const auto& x : traj.states) {
        if (out.kind == OutputKind::Prevalence) {
            s.y_a.push_back(x.i_a);
            s.y_b.push_back(x.i_b);
        } else {
            s.y_a.push_back(out.k_a * x.it_a);
            s.y_b.push_back(out.k_b * x.it_b);
        }
    }
    return s;
}

/// Multiplicative noise y -> y (1 + eps), eps ~ N(0, sigma^2), drawn
/// independently per point and per series; negative results are floored at
/// zero since the observations are population fractions.
inline Series add_noise(const Series& clean, double sigma, Rng& rng) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("add_noise: sigma must be >= 0");
    Series noisy = clean;
    if (sigma == 0.0) return noisy;
    for (double& y : noisy.y_a) y = std::max(0.0, y * (1.0 + sigma * rng.next_normal()));
    for (double& y : noisy.y_b) y = std::max(0.0, y * (1.0 + sigma * rng.next_normal()));
    return noisy;
}

inline double sum_squared_errors(const Series& model, const Series& data) {
    double sse = 0.0;
    for (std::size_t i = 0; i < data.y_a.size(); ++i) {
        const double da = model.y_a[i] - data.y_a[i];
        const double db = model.y_b[i] - data.y_b[i];
        sse += da * da + db * db;
    }
    return sse;
}

struct FitResult {
    std::array<double, 8> params{}; ///< full vector; unfitted entries = truth
    double sse = 0.0;
    bool converged = false;
    std::size_t n_eval = 0;
};

namespace detail {

// Bounded log-scale search transform: x = lo (hi/lo)^(sin^2 u). Every u maps
// into (lo, hi), and the optimizer works on the logarithmic scale, which
// levels the four orders of magnitude spanned by the parameters.
struct BoundTransform {
    double log_lo = 0.0, log_span = 0.0;

    BoundTransform() = default;
    BoundTransform(double lo, double hi) : log_lo(std::log(lo)), log_span(std::log(hi / lo)) {}

    double decode(double u) const {
        const double sn = std::sin(u);
        return std::exp(log_lo + log_span * sn * sn);
    }
    double encode(double x) const {
        const double z = (std::log(x) - log_lo) / log_span; // in (0, 1)
        return std::asin(std::sqrt(z));
    }
};

} // namespace detail

/// Least-squares refit of one noisy dataset. The simplex starts at the true
/// parameters (the protocol probes local re-identifiability around truth);
/// box bounds are enforced by the search transform. A fit that exhausts its
/// evaluation budget still reports its best point, flagged unconverged.
inline FitResult fit_dataset(const Series& data, const IdentConfig& cfg) {
    const auto fit_names = cfg.resolved_fit_params();
    const std::size_t n = fit_names.size();
    const auto truth = full_parameter_vector(cfg.true_params, cfg.output);

    std::vector<int> indices(n);
    std::vector<detail::BoundTransform> transforms(n);
    std::vector<double> u0(n);
    for (std::size_t j = 0; j < n; ++j) {
        indices[j] = fittable_parameter_index(fit_names[j]);
        const auto [lo, hi] = cfg.bounds_for(fit_names[j]);
        transforms[j] = detail::BoundTransform(lo, hi);
        u0[j] = transforms[j].encode(truth[indices[j]]);
    }

    auto objective = [&](const std::vector<double>& u) {
        std::array<double, 8> v = truth;
        for (std::size_t j = 0; j < n; ++j) v[indices[j]] = transforms[j].decode(u[j]);
        const auto [p, out] = from_parameter_vector(v, cfg.true_params, cfg.output);
        try {
            const Series model = synthesize(p, out, data.times, cfg.fit_rel_tol, cfg.fit_abs_tol);
            return sum_squared_errors(model, data);
        } catch (const std::exception&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    const auto nm = nelder_mead(objective, u0, cfg.optimizer);

    FitResult res;
    res.params = truth;
    for (std::size_t j = 0; j < n; ++j) res.params[indices[j]] = transforms[j].decode(nm.x[j]);
    res.sse = nm.f;
    res.converged = nm.converged;
    res.n_eval = nm.n_eval;
    return res;
}

/// ARE(p_k) = 100/N sum_j |p_k - p_jk| / |p_k|, in percent.
inline std::vector<double> average_relative_error(const std::vector<double>& truth,
                                                  const std::vector<std::vector<double>>& fits) {
    if (fits.empty()) throw std::invalid_argument("average_relative_error: no fits");
    std::vector<double> are(truth.size(), 0.0);
    for (std::size_t k = 0; k < truth.size(); ++k) {
        if (truth[k] == 0.0)
            throw std::domain_error("average_relative_error: true value is zero");
        double acc = 0.0;
        for (const auto& f : fits) acc += std::abs(truth[k] - f[k]) / std::abs(truth[k]);
        are[k] = 100.0 * acc / static_cast<double>(fits.size());
    }
    return are;
}

enum class IdentClass { Strong, Weak, NonIdentifiable };

inline const char* to_string(IdentClass c) {
    switch (c) {
        case IdentClass::Strong: return "strong";
        case IdentClass::Weak: return "weak";
        case IdentClass::NonIdentifiable: return "non_identifiable";
    }
    return "?";
}

/// Three-way classification against the noise levels (sigma as a fraction,
/// ARE in percent): Strong when ARE <= 100 sigma at every level,
/// NonIdentifiable when ARE > 1000 sigma at any level, Weak otherwise.
/// A zero-noise level must recover the parameter to within `zero_tol`
/// percent; failing that is non-identifiability by itself.
inline IdentClass classify_parameter(const std::vector<double>& are_by_level,
                                     const std::vector<double>& noise_levels,
                                     double zero_tol = 1e-4) {
    bool strong = true;
    for (std::size_t l = 0; l < noise_levels.size(); ++l) {
        const double sigma_pct = 100.0 * noise_levels[l];
        if (noise_levels[l] == 0.0) {
            if (are_by_level[l] > zero_tol) return IdentClass::NonIdentifiable;
        } else {
            if (are_by_level[l] > 10.0 * sigma_pct) return IdentClass::NonIdentifiable;
            if (are_by_level[l] > sigma_pct) strong = false;
        }
    }
    return strong ? IdentClass::Strong : IdentClass::Weak;
}

struct IdentReport {
    std::vector<std::string> param_names;
    std::vector<double> true_values;
    std::vector<double> noise_levels;
    std::vector<std::vector<double>> are;     ///< [noise level][parameter], percent
    std::vector<IdentClass> classification;   ///< [parameter]
    std::vector<std::vector<bool>> converged; ///< [noise level][dataset]
    std::vector<std::vector<double>> final_sse;
    int n_datasets = 0;
    /// True when more than 10% of fits failed to converge at some level.
    bool aggregate_failure = false;
};

/// Runs the full protocol. Deterministic given cfg.rng_seed: each (level,
/// dataset) pair derives its own RNG substream and the reductions run in a
/// fixed order, so results are identical for any `jobs`.
inline IdentReport run_mc(const IdentConfig& cfg) {
    cfg.validate();
    const auto times = cfg.resolved_sample_times();
    const auto fit_names = cfg.resolved_fit_params();
    const auto truth_full = full_parameter_vector(cfg.true_params, cfg.output);
    const Series clean =
        synthesize(cfg.true_params, cfg.output, times, cfg.fit_rel_tol, cfg.fit_abs_tol);

    const std::size_t n_levels = cfg.noise_levels.size();
    const std::size_t n_data = static_cast<std::size_t>(cfg.n_datasets);
    std::vector<FitResult> fits(n_levels * n_data);

    parallel_for(fits.size(), cfg.jobs, [&](std::size_t idx) {
        const std::size_t level = idx / n_data;
        const std::size_t dataset = idx % n_data;
        Rng rng(cfg.rng_seed, level, dataset);
        const Series noisy = add_noise(clean, cfg.noise_levels[level], rng);
        fits[idx] = fit_dataset(noisy, cfg);
    });

    IdentReport report;
    report.param_names = fit_names;
    report.noise_levels = cfg.noise_levels;
    report.n_datasets = cfg.n_datasets;
    for (const auto& name : fit_names)
        report.true_values.push_back(truth_full[fittable_parameter_index(name)]);

    for (std::size_t level = 0; level < n_levels; ++level) {
        std::vector<std::vector<double>> fitted(n_data, std::vector<double>(fit_names.size()));
        std::vector<bool> conv(n_data);
        std::vector<double> sse(n_data);
        int n_conv = 0;
        for (std::size_t d = 0; d < n_data; ++d) {
            const auto& f = fits[level * n_data + d];
            for (std::size_t j = 0; j < fit_names.size(); ++j)
                fitted[d][j] = f.params[fittable_parameter_index(fit_names[j])];
            conv[d] = f.converged;
            sse[d] = f.sse;
            n_conv += f.converged ? 1 : 0;
        }
        report.are.push_back(average_relative_error(report.true_values, fitted));
        report.converged.push_back(std::move(conv));
        report.final_sse.push_back(std::move(sse));
        if (static_cast<double>(n_data - n_conv) > 0.1 * static_cast<double>(n_data))
            report.aggregate_failure = true;
    }

    for (std::size_t j = 0; j < fit_names.size(); ++j) {
        std::vector<double> column;
        column.reserve(n_levels);
        for (std::size_t level = 0; level < n_levels; ++level)
            column.push_back(report.are[level][j]);
        report.classification.push_back(classify_parameter(column, cfg.noise_levels));
    }
    return report;
}

} // namespace spillover
