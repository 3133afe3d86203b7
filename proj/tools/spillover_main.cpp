// Command-line front end: simulate | equilibria | sweep | identify | threshold.
// Exit codes: 0 success, 2 usage/config error, 3 numeric failure.
// All configuration is explicit (files and flags); no environment variables.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spillover/equilibria.hpp"
#include "spillover/identify.hpp"
#include "spillover/integrate.hpp"
#include "spillover/io.hpp"
#include "spillover/model.hpp"
#include "spillover/stability.hpp"
#include "spillover/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct CliError {
    int code;
    std::string message;
};

spillover::SweepAxes make_axes(const std::string& grid_spec, double s_min, double s_max,
                               double r0b_min, double r0b_max, double r0_a) {
    const auto x = grid_spec.find('x');
    if (x == std::string::npos)
        throw CliError{kExitConfig, "--grid must look like '101x101' (n_s x n_r0b)"};
    std::size_t ns = 0, nr = 0;
    try {
        ns = std::stoul(grid_spec.substr(0, x));
        nr = std::stoul(grid_spec.substr(x + 1));
    } catch (const std::exception&) {
        throw CliError{kExitConfig, "--grid must look like '101x101' (n_s x n_r0b)"};
    }
    if (ns < 2 || nr < 2) throw CliError{kExitConfig, "--grid needs at least 2 points per axis"};
    spillover::SweepAxes axes;
    axes.s_values = spillover::linspace(s_min, s_max, ns);
    axes.r0b_values = spillover::linspace(r0b_min, r0b_max, nr);
    axes.r0_a = r0_a;
    return axes;
}

int run_simulate(const std::string& config_path, double t_end, std::size_t samples,
                 const std::string& out_path, double rel_tol, double abs_tol) {
    const auto params = spillover::load_params(config_path);
    if (samples < 2) throw CliError{kExitConfig, "--samples must be at least 2"};
    if (!(t_end > 0.0)) throw CliError{kExitConfig, "--t-end must be positive"};

    spillover::IntegrationConfig cfg;
    cfg.rel_tol = rel_tol;
    cfg.abs_tol = abs_tol;
    cfg.t_end = t_end;
    cfg.sample_times = spillover::linspace(0.0, t_end, samples);
    cfg.validate();

    const auto traj = spillover::integrate(params, spillover::initial_state(), cfg);

    std::ostringstream csv;
    spillover::write_trajectory_csv(csv, traj);
    spillover::write_text_file(out_path, csv.str());

    double min_re_a = traj.obs.front().re_a, max_re_a = min_re_a;
    double min_re_b = traj.obs.front().re_b, max_re_b = min_re_b;
    for (const auto& o : traj.obs) {
        min_re_a = std::min(min_re_a, o.re_a);
        max_re_a = std::max(max_re_a, o.re_a);
        min_re_b = std::min(min_re_b, o.re_b);
        max_re_b = std::max(max_re_b, o.re_b);
    }
    nlohmann::ordered_json summary{{"final_I_A", traj.back_state().i_a},
                                   {"final_I_B", traj.back_state().i_b},
                                   {"min_Re_A", min_re_a},
                                   {"max_Re_A", max_re_a},
                                   {"min_Re_B", min_re_b},
                                   {"max_Re_B", max_re_b}};
    std::cout << summary.dump(2) << "\n";
    return kExitOk;
}

int run_equilibria(const std::string& config_path, const std::string& out_path) {
    const auto params = spillover::load_params(config_path);
    const auto reports = spillover::all_equilibria(params);
    std::array<std::optional<spillover::StabilityVerdict>, 4> verdicts;
    for (std::size_t i = 0; i < reports.size(); ++i)
        if (reports[i].exists) verdicts[i] = spillover::classify(params, reports[i]);
    const auto json = spillover::equilibria_json(reports, verdicts);
    if (out_path.empty())
        std::cout << json.dump(2) << "\n";
    else
        spillover::write_text_file(out_path, json.dump(2) + "\n");
    return kExitOk;
}

int run_sweep(const std::string& config_path, const std::string& out_path,
              const std::string& grid_spec, double s_min, double s_max, double r0b_min,
              double r0b_max, double horizon, double persist_threshold, int jobs) {
    const auto params = spillover::load_params(config_path);
    const auto axes =
        make_axes(grid_spec, s_min, s_max, r0b_min, r0b_max, params.r0_a);

    spillover::SweepOptions opt;
    opt.horizon = horizon;
    opt.persist_threshold = persist_threshold;
    opt.jobs = jobs;
    const auto grid = spillover::run_sweep(params, axes, opt);

    std::ostringstream csv;
    spillover::write_sweep_csv(csv, grid);
    spillover::write_text_file(out_path, csv.str());

    std::size_t invalid = 0;
    std::ostringstream log;
    const std::size_t nr = grid.axes.r0b_values.size();
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        if (grid.cells[i].valid) continue;
        ++invalid;
        log << "cell s=" << spillover::format_g17(grid.axes.s_values[i / nr])
            << " r0_b=" << spillover::format_g17(grid.axes.r0b_values[i % nr]) << ": "
            << grid.cells[i].error << "\n";
    }
    if (invalid > 0) spillover::write_text_file(out_path + ".log", log.str());
    std::cerr << "sweep: " << grid.cells.size() - invalid << "/" << grid.cells.size()
              << " cells valid\n";
    if (10 * invalid >= grid.cells.size())
        throw CliError{kExitNumeric, "sweep: 10% or more of the grid cells failed"};
    return kExitOk;
}

int run_identify(const std::string& config_path, const std::string& out_csv,
                 const std::string& out_json, int jobs, std::optional<std::uint64_t> seed) {
    auto cfg = spillover::load_ident_config(config_path);
    cfg.jobs = jobs;
    if (seed) cfg.rng_seed = *seed;

    const auto report = spillover::run_mc(cfg);

    std::ostringstream csv;
    spillover::write_ident_csv(csv, report);
    spillover::write_text_file(out_csv, csv.str());
    if (!out_json.empty())
        spillover::write_text_file(out_json, spillover::ident_summary_json(report).dump(2) + "\n");

    std::ostringstream log;
    for (std::size_t level = 0; level < report.noise_levels.size(); ++level)
        for (std::size_t d = 0; d < report.converged[level].size(); ++d)
            if (!report.converged[level][d])
                log << "dataset sigma=" << spillover::format_g17(report.noise_levels[level])
                    << " index=" << d << ": did not converge\n";
    if (!log.str().empty()) spillover::write_text_file(out_csv + ".log", log.str());

    if (report.aggregate_failure)
        throw CliError{kExitNumeric,
                       "identify: more than 10% of fits failed to converge at some noise level"};
    return kExitOk;
}

int run_threshold(double r0a, std::optional<double> r0b, double r0b_min, double r0b_max,
                  std::size_t n, const std::string& out_path) {
    if (r0b) {
        const double s = spillover::spillover_threshold(r0a, *r0b);
        std::cout << spillover::format_g17(s) << "\n";
        return kExitOk;
    }
    if (out_path.empty())
        throw CliError{kExitConfig, "threshold: need either --r0b or --out with a range"};
    const auto curve = spillover::threshold_curve(r0a, spillover::linspace(r0b_min, r0b_max, n));
    std::ostringstream csv;
    spillover::write_threshold_csv(csv, curve);
    spillover::write_text_file(out_path, csv.str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-pathogen SIRS dynamics with behaviorally coupled transmission"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Integrate the model and write a trajectory CSV");
    std::string sim_config, sim_out;
    double sim_t_end = 365.0, sim_rel = 1e-8, sim_abs = 1e-10;
    std::size_t sim_samples = 366;
    sim->add_option("config", sim_config, "model parameter file")->required();
    sim->add_option("--t-end", sim_t_end, "horizon in days");
    sim->add_option("--samples", sim_samples, "number of equally spaced output samples");
    sim->add_option("--out", sim_out, "output CSV path")->required();
    sim->add_option("--rel-tol", sim_rel, "integrator relative tolerance");
    sim->add_option("--abs-tol", sim_abs, "integrator absolute tolerance");

    // equilibria
    auto* eq = app.add_subcommand("equilibria",
                                  "Locate and classify all equilibria; emit a JSON report");
    std::string eq_config, eq_out;
    eq->add_option("config", eq_config, "model parameter file")->required();
    eq->add_option("--out", eq_out, "output JSON path (stdout when omitted)");

    // sweep
    auto* sw = app.add_subcommand("sweep",
                                  "Phase diagram over (s, R0_B): persistence, dominance, "
                                  "analytic coexistence");
    std::string sw_config, sw_out, sw_grid = "101x101";
    double sw_smin = 0.0, sw_smax = 1.0, sw_rmin = 1.0, sw_rmax = 3.0;
    double sw_horizon = 365.0, sw_thresh = 1e-4;
    int sw_jobs = 1;
    sw->add_option("config", sw_config, "model parameter file")->required();
    sw->add_option("--out", sw_out, "output CSV path")->required();
    sw->add_option("--grid", sw_grid, "grid size as n_s x n_r0b, e.g. 101x101");
    sw->add_option("--s-min", sw_smin, "spillover axis start");
    sw->add_option("--s-max", sw_smax, "spillover axis end");
    sw->add_option("--r0b-min", sw_rmin, "R0_B axis start");
    sw->add_option("--r0b-max", sw_rmax, "R0_B axis end");
    sw->add_option("--horizon", sw_horizon, "days simulated per cell");
    sw->add_option("--persist-threshold", sw_thresh,
                   "disease B persists when I_B(horizon) >= this");
    sw->add_option("--jobs", sw_jobs, "worker threads (output is independent of this)");

    // identify
    auto* id = app.add_subcommand("identify",
                                  "Monte Carlo practical-identifiability analysis");
    std::string id_config, id_csv, id_json;
    int id_jobs = 1;
    std::uint64_t id_seed = 0;
    id->add_option("config", id_config, "identifiability configuration file")->required();
    id->add_option("--out-csv", id_csv, "ARE table CSV path")->required();
    id->add_option("--out-json", id_json, "classification summary JSON path");
    id->add_option("--jobs", id_jobs, "worker threads (output is independent of this)");
    auto* id_seed_opt = id->add_option("--seed", id_seed, "override rng_seed from the config file");

    // threshold
    auto* th = app.add_subcommand("threshold",
                                  "Closed-form spillover threshold for exclusion of disease B");
    double th_r0a = 3.0, th_r0b_min = 1.05, th_r0b_max = 2.95;
    std::optional<double> th_r0b;
    std::size_t th_n = 101;
    std::string th_out;
    th->add_option("--r0a", th_r0a, "R0 of disease A")->required();
    th->add_option("--r0b", th_r0b, "single R0_B: print the threshold and exit");
    th->add_option("--r0b-min", th_r0b_min, "curve start");
    th->add_option("--r0b-max", th_r0b_max, "curve end");
    th->add_option("--n", th_n, "number of curve points");
    th->add_option("--out", th_out, "curve CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (sim->parsed())
            return run_simulate(sim_config, sim_t_end, sim_samples, sim_out, sim_rel, sim_abs);
        if (eq->parsed()) return run_equilibria(eq_config, eq_out);
        if (sw->parsed())
            return run_sweep(sw_config, sw_out, sw_grid, sw_smin, sw_smax, sw_rmin, sw_rmax,
                             sw_horizon, sw_thresh, sw_jobs);
        if (id->parsed())
            return run_identify(id_config, id_csv, id_json, id_jobs,
                                id_seed_opt->count() > 0 ? std::optional<std::uint64_t>(id_seed)
                                                         : std::nullopt);
        if (th->parsed())
            return run_threshold(th_r0a, th_r0b, th_r0b_min, th_r0b_max, th_n, th_out);
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.code;
    } catch (const spillover::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitConfig;
}
