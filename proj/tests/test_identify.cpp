#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "spillover/identify.hpp"
#include "spillover/io.hpp"

using namespace spillover;

namespace {

// Small, fast configuration used across these tests: sparse sampling and few
// datasets keep each fit around a tenth of a second.
IdentConfig small_config() {
    IdentConfig cfg;
    cfg.true_params = Params{};
    cfg.output.kind = OutputKind::Prevalence;
    cfg.noise_levels = {0.0, 0.05};
    cfg.n_datasets = 3;
    for (double t = 0.0; t <= 365.0; t += 10.0) cfg.sample_times.push_back(t);
    cfg.rng_seed = 99;
    return cfg;
}

} // namespace

TEST_CASE("synthesize") {
    const Params p;
    const std::vector<double> times = {0.0, 50.0, 100.0};
    SECTION("prevalence starts at the seeded fraction") {
        const auto s = synthesize(p, OutputModel{OutputKind::Prevalence}, times);
        CHECK(s.y_a[0] == 0.0001);
        CHECK(s.y_b[0] == 0.0001);
        CHECK(s.y_a[1] > 0.0);
    }
    SECTION("recognized prevalence starts at zero and scales by the reporting fraction") {
        OutputModel out;
        out.kind = OutputKind::RecognizedPrevalence;
        out.k_a = 0.5;
        out.k_b = 0.5;
        const auto s = synthesize(p, out, times);
        CHECK(s.y_a[0] == 0.0);
        CHECK(s.y_b[0] == 0.0);
        const auto full = synthesize(p, OutputModel{OutputKind::RecognizedPrevalence, 1.0, 1.0},
                                     times);
        CHECK(s.y_a[2] == Catch::Approx(0.5 * full.y_a[2]).epsilon(1e-12));
    }
}

TEST_CASE("add noise") {
    Series clean;
    clean.times = {0.0, 1.0, 2.0};
    clean.y_a = {0.01, 0.02, 0.03};
    clean.y_b = {0.04, 0.05, 0.06};

    SECTION("zero noise is the identity") {
        Rng rng(1);
        const auto noisy = add_noise(clean, 0.0, rng);
        CHECK(noisy.y_a == clean.y_a);
        CHECK(noisy.y_b == clean.y_b);
    }
    SECTION("same substream gives identical series") {
        Rng r1(42, 3, 7), r2(42, 3, 7);
        const auto n1 = add_noise(clean, 0.05, r1);
        const auto n2 = add_noise(clean, 0.05, r2);
        CHECK(n1.y_a == n2.y_a);
        CHECK(n1.y_b == n2.y_b);
    }
    SECTION("different substreams differ") {
        Rng r1(42, 3, 7), r2(42, 3, 8);
        const auto n1 = add_noise(clean, 0.05, r1);
        const auto n2 = add_noise(clean, 0.05, r2);
        CHECK(n1.y_a != n2.y_a);
    }
    SECTION("noise is unbiased") {
        Series point;
        point.times = {0.0};
        point.y_a = {0.01};
        point.y_b = {0.01};
        Rng rng(7);
        const int n = 100000;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += add_noise(point, 0.1, rng).y_a[0];
        const double mean = sum / n;
        const double se = 0.1 * 0.01 / std::sqrt(static_cast<double>(n));
        CHECK(std::abs(mean - 0.01) < 3.0 * se);
    }
    SECTION("negative draws are floored at zero") {
        Series point;
        point.times = {0.0};
        point.y_a = {0.01};
        point.y_b = {0.01};
        Rng rng(7);
        for (int i = 0; i < 2000; ++i) {
            const auto y = add_noise(point, 2.0, rng); // huge noise: negatives guaranteed
            CHECK(y.y_a[0] >= 0.0);
        }
    }
}

TEST_CASE("average relative error") {
    const std::vector<double> truth = {2.0, 10.0};
    SECTION("exact fits give zero") {
        const std::vector<std::vector<double>> fits = {{2.0, 10.0}, {2.0, 10.0}};
        const auto are = average_relative_error(truth, fits);
        CHECK(are[0] == 0.0);
        CHECK(are[1] == 0.0);
    }
    SECTION("symmetric 10% errors average to 10%") {
        const std::vector<std::vector<double>> fits = {{1.8, 9.0}, {2.2, 11.0}};
        const auto are = average_relative_error(truth, fits);
        CHECK(are[0] == Catch::Approx(10.0).epsilon(1e-12));
        CHECK(are[1] == Catch::Approx(10.0).epsilon(1e-12));
    }
    SECTION("zero truth rejected") {
        CHECK_THROWS_AS(average_relative_error({0.0}, {{1.0}}), std::domain_error);
    }
}

TEST_CASE("classification rules") {
    const std::vector<double> levels = {0.0, 0.01, 0.05, 0.10, 0.20, 0.30};
    SECTION("identifiable column stays below sigma at every level") {
        CHECK(classify_parameter({0.0, 0.19, 1.02, 2.21, 6.02, 11.49}, levels) ==
              IdentClass::Strong);
    }
    SECTION("weakly identifiable column exceeds sigma somewhere but never 10 sigma") {
        CHECK(classify_parameter({0.0, 1.0918, 5.039, 10.3588, 18.7359, 27.2016}, levels) ==
              IdentClass::Weak);
    }
    SECTION("non-identifiable column blows past 10 sigma") {
        CHECK(classify_parameter({0.0, 2.9084, 27.0649, 67.8649, 253.7215, 378.8752}, levels) ==
              IdentClass::NonIdentifiable);
    }
    SECTION("all-zero table is strongly identifiable") {
        CHECK(classify_parameter({0.0, 0.0, 0.0, 0.0, 0.0, 0.0}, levels) == IdentClass::Strong);
    }
    SECTION("failure to recover at zero noise is disqualifying") {
        CHECK(classify_parameter({5.0, 0.5, 2.0, 4.0, 8.0, 12.0}, levels) ==
              IdentClass::NonIdentifiable);
    }
}

TEST_CASE("fit recovers the truth from noise-free data") {
    auto cfg = small_config();
    const auto times = cfg.resolved_sample_times();
    const auto clean = synthesize(cfg.true_params, cfg.output, times, cfg.fit_rel_tol,
                                  cfg.fit_abs_tol);
    const auto fit = fit_dataset(clean, cfg);
    CHECK(fit.converged);
    // the bound transform perturbs the start point by ~1 ulp, so the
    // objective at the returned best vertex is tiny but not bit-zero
    CHECK(fit.sse <= 1e-20);
    const auto truth = full_parameter_vector(cfg.true_params, cfg.output);
    for (std::size_t i = 0; i < truth.size(); ++i)
        CHECK(fit.params[i] == Catch::Approx(truth[i]).epsilon(1e-10));
}

TEST_CASE("fitted objective never exceeds the truth objective") {
    auto cfg = small_config();
    const auto times = cfg.resolved_sample_times();
    const auto clean = synthesize(cfg.true_params, cfg.output, times, cfg.fit_rel_tol,
                                  cfg.fit_abs_tol);
    Rng rng(cfg.rng_seed, 1, 0);
    const auto noisy = add_noise(clean, 0.1, rng);
    const double sse_at_truth = sum_squared_errors(clean, noisy);
    const auto fit = fit_dataset(noisy, cfg);
    CHECK(fit.sse <= sse_at_truth);
    CHECK(fit.sse > 0.0);
}

TEST_CASE("fits are insensitive to the noise realization at the 10-sigma scale") {
    auto cfg = small_config();
    const double sigma = 0.05;
    const auto times = cfg.resolved_sample_times();
    const auto clean = synthesize(cfg.true_params, cfg.output, times, cfg.fit_rel_tol,
                                  cfg.fit_abs_tol);
    Rng r1(1, 0, 0), r2(2, 0, 0);
    const auto f1 = fit_dataset(add_noise(clean, sigma, r1), cfg);
    const auto f2 = fit_dataset(add_noise(clean, sigma, r2), cfg);
    const auto truth = full_parameter_vector(cfg.true_params, cfg.output);
    for (int idx : {0, 1, 5}) { // beta_a, beta_b, tau_p: the identifiable ones
        const double rel = std::abs(f1.params[idx] - f2.params[idx]) / truth[idx];
        CHECK(rel < 10.0 * sigma);
    }
}

TEST_CASE("run_mc") {
    auto cfg = small_config();
    cfg.jobs = 2;
    const auto report = run_mc(cfg);

    SECTION("shape and zero-noise row") {
        REQUIRE(report.are.size() == cfg.noise_levels.size());
        REQUIRE(report.are[0].size() == 6);
        for (double a : report.are[0]) CHECK(a <= 1e-10); // sigma = 0 recovers exactly
        for (double a : report.are[1]) CHECK(a > 0.0);
        CHECK_FALSE(report.aggregate_failure);
        for (const auto& level : report.converged)
            for (bool c : level) CHECK(c);
    }
    SECTION("deterministic across worker counts") {
        auto serial = cfg;
        serial.jobs = 1;
        const auto r1 = run_mc(serial);
        std::ostringstream a, b;
        write_ident_csv(a, report);
        write_ident_csv(b, r1);
        CHECK(a.str() == b.str());
    }
    SECTION("same seed twice is byte-identical") {
        const auto r2 = run_mc(cfg);
        std::ostringstream a, b;
        write_ident_csv(a, report);
        write_ident_csv(b, r2);
        CHECK(a.str() == b.str());
    }
}

TEST_CASE("identifiability config validation") {
    auto cfg = small_config();
    CHECK(cfg.validate_message().empty());

    SECTION("reporting fractions rejected for prevalence output") {
        cfg.fit_params = {"beta_a", "k_a"};
        CHECK_FALSE(cfg.validate_message().empty());
    }
    SECTION("unknown parameter name") {
        cfg.fit_params = {"beta_c"};
        CHECK_FALSE(cfg.validate_message().empty());
    }
    SECTION("bounds must contain the truth") {
        cfg.explicit_bounds["beta_a"] = {1.0, 2.0}; // truth is 3/7
        CHECK_FALSE(cfg.validate_message().empty());
    }
    SECTION("negative noise rejected") {
        cfg.noise_levels = {-0.01};
        CHECK_FALSE(cfg.validate_message().empty());
    }
    SECTION("reporting fraction range enforced for recognized output") {
        cfg.output.kind = OutputKind::RecognizedPrevalence;
        cfg.output.k_a = 1.5;
        CHECK_FALSE(cfg.validate_message().empty());
    }
}
