#pragma once

// File formats: flat key = value configs, JSON reports, CSV tables. All CSV
// output uses '.' decimals, LF line endings and 17 significant digits, so
// identical runs produce identical bytes.

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spillover/equilibria.hpp"
#include "spillover/identify.hpp"
#include "spillover/integrate.hpp"
#include "spillover/model.hpp"
#include "spillover/stability.hpp"
#include "spillover/sweep.hpp"

namespace spillover {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Full-precision decimal rendering (round-trips doubles exactly).
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for '" + key + "': " + value);
    }
}

inline std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> parts;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const auto& item : split_list(value)) out.push_back(parse_double(key, item));
    return out;
}

} // namespace detail

/// Parses `key = value` lines; '#' starts a comment, blank lines ignored.
inline std::map<std::string, std::string> parse_kv(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " is not 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config: empty key on line " + std::to_string(lineno));
        if (kv.count(key)) throw ConfigError("config: duplicate key '" + key + "'");
        kv[key] = value;
    }
    return kv;
}

inline std::map<std::string, std::string> parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    return parse_kv(in);
}

inline const std::vector<std::string>& params_keys() {
    static const std::vector<std::string> keys = {"r0_a", "r0_b", "tau_i", "tau_r",
                                                  "tau_p", "k",    "s"};
    return keys;
}

/// Builds Params from a key-value map. Missing keys keep their defaults;
/// unknown keys are rejected unless allow_extra is set (used when the model
/// block is embedded in a larger config).
inline Params params_from_kv(const std::map<std::string, std::string>& kv,
                             bool allow_extra = false) {
    Params p;
    std::map<std::string, double*> fields = {{"r0_a", &p.r0_a},   {"r0_b", &p.r0_b},
                                             {"tau_i", &p.tau_i}, {"tau_r", &p.tau_r},
                                             {"tau_p", &p.tau_p}, {"k", &p.k},
                                             {"s", &p.s}};
    for (const auto& [key, value] : kv) {
        if (auto it = fields.find(key); it != fields.end())
            *it->second = detail::parse_double(key, value);
        else if (!allow_extra)
            throw ConfigError("config: unknown key '" + key + "'");
    }
    if (auto msg = p.validate_message(); !msg.empty()) throw ConfigError("config: " + msg);
    return p;
}

inline Params load_params(const std::string& path) { return params_from_kv(parse_kv_file(path)); }

inline void write_params_kv(std::ostream& out, const Params& p) {
    out << "r0_a = " << format_g17(p.r0_a) << "\n"
        << "r0_b = " << format_g17(p.r0_b) << "\n"
        << "tau_i = " << format_g17(p.tau_i) << "\n"
        << "tau_r = " << format_g17(p.tau_r) << "\n"
        << "tau_p = " << format_g17(p.tau_p) << "\n"
        << "k = " << format_g17(p.k) << "\n"
        << "s = " << format_g17(p.s) << "\n";
}

inline void to_json(nlohmann::ordered_json& j, const Params& p) {
    j = nlohmann::ordered_json{{"r0_a", p.r0_a},   {"r0_b", p.r0_b}, {"tau_i", p.tau_i},
                               {"tau_r", p.tau_r}, {"tau_p", p.tau_p}, {"k", p.k},
                               {"s", p.s}};
}

inline void from_json(const nlohmann::ordered_json& j, Params& p) {
    j.at("r0_a").get_to(p.r0_a);
    j.at("r0_b").get_to(p.r0_b);
    j.at("tau_i").get_to(p.tau_i);
    j.at("tau_r").get_to(p.tau_r);
    j.at("tau_p").get_to(p.tau_p);
    j.at("k").get_to(p.k);
    j.at("s").get_to(p.s);
}

/// Trajectory CSV: one row per sample time, full double precision.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "t,S_A,I_A,R_A,It_A,S_B,I_B,R_B,It_B,beta_A,beta_B,Re_A,Re_B\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const auto& x = traj.states[i];
        const auto& o = traj.obs[i];
        out << format_g17(traj.times[i]) << ',' << format_g17(x.s_a) << ',' << format_g17(x.i_a)
            << ',' << format_g17(x.r_a) << ',' << format_g17(x.it_a) << ',' << format_g17(x.s_b)
            << ',' << format_g17(x.i_b) << ',' << format_g17(x.r_b) << ',' << format_g17(x.it_b)
            << ',' << format_g17(o.beta_a) << ',' << format_g17(o.beta_b) << ','
            << format_g17(o.re_a) << ',' << format_g17(o.re_b) << "\n";
    }
}

/// Sweep CSV, row-major in (s, r0_b). Booleans as 0/1; the dominance column
/// is `nan` for identical diseases and for invalid cells.
inline void write_sweep_csv(std::ostream& out, const SweepGrid& grid) {
    out << "s,r0_b,persists_b,dominance_pct_b,analytic_coexist,margin\n";
    const std::size_t nr = grid.axes.r0b_values.size();
    for (std::size_t is = 0; is < grid.axes.s_values.size(); ++is) {
        for (std::size_t ir = 0; ir < nr; ++ir) {
            const auto& cell = grid.at(is, ir);
            out << format_g17(grid.axes.s_values[is]) << ','
                << format_g17(grid.axes.r0b_values[ir]) << ',';
            if (!cell.valid) {
                out << "nan,nan,nan,nan\n";
                continue;
            }
            out << (cell.persists_b ? '1' : '0') << ',';
            if (cell.dominance_pct_b)
                out << format_g17(*cell.dominance_pct_b);
            else
                out << "nan";
            out << ',' << (cell.analytic_coexist ? '1' : '0') << ',' << format_g17(cell.margin)
                << "\n";
        }
    }
}

inline void write_threshold_csv(std::ostream& out,
                                const std::vector<std::pair<double, double>>& curve) {
    out << "r0_b,s_threshold\n";
    for (const auto& [r0b, s] : curve)
        out << format_g17(r0b) << ',' << format_g17(s) << "\n";
}

/// Equilibrium reports (with stability verdicts) as a JSON array of four.
inline nlohmann::ordered_json
equilibria_json(const std::array<EquilibriumReport, 4>& reports,
                const std::array<std::optional<StabilityVerdict>, 4>& verdicts) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        nlohmann::ordered_json j;
        j["kind"] = to_string(r.kind);
        j["exists"] = r.exists;
        j["I_A"] = r.exists ? nlohmann::ordered_json(r.i_a) : nlohmann::ordered_json(nullptr);
        j["I_B"] = r.exists ? nlohmann::ordered_json(r.i_b) : nlohmann::ordered_json(nullptr);
        j["residual_norm"] =
            r.exists ? nlohmann::ordered_json(r.residual) : nlohmann::ordered_json(nullptr);
        j["existence_margin"] = std::isfinite(r.existence_margin)
                                    ? nlohmann::ordered_json(r.existence_margin)
                                    : nlohmann::ordered_json(nullptr);
        if (verdicts[i]) {
            const auto& v = *verdicts[i];
            j["stability"] = {{"stable", to_string(v.label)},
                              {"method", to_string(v.method)},
                              {"leading_eigen_real", v.leading_eigen_real},
                              {"conjecture_region", v.conjecture_region}};
        } else {
            j["stability"] = nullptr;
        }
        arr.push_back(j);
    }
    return arr;
}

/// Identifiability ARE table: one row per (parameter, noise level).
inline void write_ident_csv(std::ostream& out, const IdentReport& report) {
    out << "parameter,sigma,ARE\n";
    for (std::size_t j = 0; j < report.param_names.size(); ++j)
        for (std::size_t level = 0; level < report.noise_levels.size(); ++level)
            out << report.param_names[j] << ',' << format_g17(report.noise_levels[level]) << ','
                << format_g17(report.are[level][j]) << "\n";
}

inline nlohmann::ordered_json ident_summary_json(const IdentReport& report) {
    nlohmann::ordered_json j;
    j["n_datasets"] = report.n_datasets;
    j["noise_levels"] = report.noise_levels;
    nlohmann::ordered_json cls;
    for (std::size_t i = 0; i < report.param_names.size(); ++i)
        cls[report.param_names[i]] = to_string(report.classification[i]);
    j["classification"] = cls;
    nlohmann::ordered_json conv;
    for (std::size_t level = 0; level < report.noise_levels.size(); ++level) {
        int n = 0;
        for (bool c : report.converged[level]) n += c ? 1 : 0;
        conv.push_back(n);
    }
    j["converged_per_level"] = conv;
    j["aggregate_failure"] = report.aggregate_failure;
    return j;
}

/// Identifiability run configuration from a key-value file. Model parameters
/// use their usual keys; the remaining knobs are documented in the README.
inline IdentConfig ident_config_from_kv(const std::map<std::string, std::string>& kv) {
    IdentConfig cfg;
    cfg.true_params = params_from_kv(kv, /*allow_extra=*/true);

    double sample_start = 0.0, sample_end = 365.0, sample_step = 1.0;
    for (const auto& [key, value] : kv) {
        if (key == "r0_a" || key == "r0_b" || key == "tau_i" || key == "tau_r" ||
            key == "tau_p" || key == "k" || key == "s")
            continue;
        if (key == "output") {
            if (value == "prevalence")
                cfg.output.kind = OutputKind::Prevalence;
            else if (value == "recognized_prevalence")
                cfg.output.kind = OutputKind::RecognizedPrevalence;
            else
                throw ConfigError("config: output must be 'prevalence' or "
                                  "'recognized_prevalence'");
        } else if (key == "k_a") {
            cfg.output.k_a = detail::parse_double(key, value);
        } else if (key == "k_b") {
            cfg.output.k_b = detail::parse_double(key, value);
        } else if (key == "noise_levels") {
            cfg.noise_levels = detail::parse_double_list(key, value);
        } else if (key == "n_datasets") {
            cfg.n_datasets = static_cast<int>(detail::parse_double(key, value));
        } else if (key == "sample_start") {
            sample_start = detail::parse_double(key, value);
        } else if (key == "sample_end") {
            sample_end = detail::parse_double(key, value);
        } else if (key == "sample_step") {
            sample_step = detail::parse_double(key, value);
        } else if (key == "sample_times") {
            cfg.sample_times = detail::parse_double_list(key, value);
        } else if (key == "fit_params") {
            cfg.fit_params = detail::split_list(value);
        } else if (key == "bound_lo_scale") {
            cfg.bound_lo_scale = detail::parse_double(key, value);
        } else if (key == "bound_hi_scale") {
            cfg.bound_hi_scale = detail::parse_double(key, value);
        } else if (key.rfind("bound_", 0) == 0) {
            const auto list = detail::parse_double_list(key, value);
            if (list.size() != 2) throw ConfigError("config: '" + key + "' needs 'lo,hi'");
            cfg.explicit_bounds[key.substr(6)] = {list[0], list[1]};
        } else if (key == "rng_seed") {
            cfg.rng_seed = static_cast<std::uint64_t>(std::stoull(value));
        } else if (key == "fit_rel_tol") {
            cfg.fit_rel_tol = detail::parse_double(key, value);
        } else if (key == "fit_abs_tol") {
            cfg.fit_abs_tol = detail::parse_double(key, value);
        } else if (key == "opt_tol_x") {
            cfg.optimizer.tol_x = detail::parse_double(key, value);
        } else if (key == "opt_tol_f_rel") {
            cfg.optimizer.tol_f_rel = detail::parse_double(key, value);
        } else if (key == "opt_max_eval") {
            cfg.optimizer.max_eval = static_cast<std::size_t>(detail::parse_double(key, value));
        } else {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }
    if (cfg.sample_times.empty() &&
        !(sample_start == 0.0 && sample_end == 365.0 && sample_step == 1.0)) {
        if (!(sample_step > 0.0) || !(sample_end > sample_start))
            throw ConfigError("config: bad sample_start/sample_end/sample_step");
        for (double t = sample_start; t <= sample_end + 1e-9; t += sample_step)
            cfg.sample_times.push_back(t);
    }
    if (auto msg = cfg.validate_message(); !msg.empty()) throw ConfigError("config: " + msg);
    return cfg;
}

inline IdentConfig load_ident_config(const std::string& path) {
    return ident_config_from_kv(parse_kv_file(path));
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace spillover
