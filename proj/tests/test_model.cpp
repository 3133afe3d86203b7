#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "spillover/model.hpp"
#include "spillover/rng.hpp"

using namespace spillover;

namespace {

Params table1(double r0_b = 2.0, double s = 0.0) {
    Params p;
    p.r0_b = r0_b;
    p.s = s;
    return p;
}

State random_state(Rng& rng) {
    State x;
    x.s_a = rng.next_double();
    x.i_a = rng.next_double() * (1.0 - x.s_a);
    x.r_a = 1.0 - x.s_a - x.i_a;
    x.it_a = rng.next_double() * 0.3;
    x.s_b = rng.next_double();
    x.i_b = rng.next_double() * (1.0 - x.s_b);
    x.r_b = 1.0 - x.s_b - x.i_b;
    x.it_b = rng.next_double() * 0.3;
    return x;
}

} // namespace

TEST_CASE("behavioral multiplier") {
    CHECK(behavioral_multiplier(100.0, 0.0) == 1.0);
    CHECK(behavioral_multiplier(0.0, 0.5) == 1.0);
    CHECK(behavioral_multiplier(100.0, 0.01) == Catch::Approx(std::exp(-1.0)).epsilon(1e-15));
    // integrator overshoot: negative perceived prevalence must not amplify
    CHECK(behavioral_multiplier(100.0, -0.01) == 1.0);
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const double m = behavioral_multiplier(200.0 * rng.next_double(), rng.next_double());
        CHECK(m > 0.0);
        CHECK(m <= 1.0);
    }
}

TEST_CASE("transmission rates: spillover scenarios") {
    SECTION("no prevalence, no response") {
        const auto p = table1(2.0, 0.0);
        const auto tr = transmission_rates(p, 0.0, 0.0);
        CHECK(tr.beta_a == Catch::Approx(p.beta0_a()).epsilon(1e-15));
        CHECK(tr.beta_b == Catch::Approx(p.beta0_b()).epsilon(1e-15));
    }
    SECTION("perfect spillover is the product of both multipliers") {
        auto p = table1(2.0, 1.0);
        const auto tr = transmission_rates(p, 0.01, 0.01);
        CHECK(tr.beta_a == Catch::Approx((3.0 / 7.0) * std::exp(-2.0)).epsilon(1e-14));
        CHECK(tr.beta_b == Catch::Approx((2.0 / 7.0) * std::exp(-2.0)).epsilon(1e-14));
    }
    SECTION("no perceived prevalence of B leaves A's own response only") {
        auto p = table1(2.0, 0.5);
        for (double it_a : {0.0, 0.005, 0.05}) {
            const auto tr = transmission_rates(p, it_a, 0.0);
            CHECK(tr.beta_a ==
                  Catch::Approx(behavioral_multiplier(p.k, it_a) * p.beta0_a()).epsilon(1e-15));
        }
    }
    SECTION("s = 0 and s = 1 reduce to the uncoupled and fully coupled laws") {
        Rng rng(42);
        for (int i = 0; i < 300; ++i) {
            const double it_a = rng.next_double() * 0.5;
            const double it_b = rng.next_double() * 0.5;
            auto p = table1(1.0 + 2.0 * rng.next_double(), 0.0);
            p.k = 200.0 * rng.next_double();
            const double m_a = behavioral_multiplier(p.k, it_a);
            const double m_b = behavioral_multiplier(p.k, it_b);

            auto tr = transmission_rates(p, it_a, it_b);
            CHECK(tr.beta_a == Catch::Approx(m_a * p.beta0_a()).margin(1e-15));
            CHECK(tr.beta_b == Catch::Approx(m_b * p.beta0_b()).margin(1e-15));

            p.s = 1.0;
            tr = transmission_rates(p, it_a, it_b);
            CHECK(tr.beta_a == Catch::Approx(m_a * m_b * p.beta0_a()).margin(1e-15));
            CHECK(tr.beta_b == Catch::Approx(m_a * m_b * p.beta0_b()).margin(1e-15));
        }
    }
    SECTION("beta_A never increases in either perceived prevalence") {
        Rng rng(7);
        for (int i = 0; i < 300; ++i) {
            auto p = table1(2.0, rng.next_double());
            p.k = 200.0 * rng.next_double();
            const double it_a = rng.next_double() * 0.5;
            const double it_b = rng.next_double() * 0.5;
            const double da = rng.next_double() * 0.2;
            const double db = rng.next_double() * 0.2;
            const double base = transmission_rates(p, it_a, it_b).beta_a;
            CHECK(transmission_rates(p, it_a + da, it_b).beta_a <= base + 1e-15);
            CHECK(transmission_rates(p, it_a, it_b + db).beta_a <= base + 1e-15);
        }
    }
}

TEST_CASE("rhs") {
    SECTION("disease-free state is a fixed point") {
        const State dfe{1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0};
        for (double s : {0.0, 0.5, 1.0}) {
            const auto d = rhs(table1(2.0, s), dfe);
            for (double v : d.to_array()) CHECK(v == 0.0);
        }
    }
    SECTION("outbreak initial condition grows when R0 > 1") {
        const auto p = table1(2.0, 0.0);
        const auto d = rhs(p, initial_state());
        CHECK(d.i_a ==
              Catch::Approx((3.0 / 7.0) * 0.9999 * 0.0001 - 0.0001 / 7.0).epsilon(1e-14));
        CHECK(d.i_a > 0.0);
    }
    SECTION("waning immunity is the only flow without infectious") {
        State x{0.7, 0.0, 0.3, 0.0, 1.0, 0.0, 0.0, 0.0};
        const auto p = table1();
        const auto d = rhs(p, x);
        CHECK(d.s_a == Catch::Approx(0.3 / p.tau_r).epsilon(1e-15));
        CHECK(d.s_a > 0.0);
        CHECK(d.i_a == 0.0);
    }
    SECTION("per-disease mass is conserved at machine precision") {
        Rng rng(3);
        for (int i = 0; i < 500; ++i) {
            auto p = table1(1.0 + 2.0 * rng.next_double(), rng.next_double());
            const auto x = random_state(rng);
            const auto d = rhs(p, x);
            CHECK(std::abs(d.s_a + d.i_a + d.r_a) < 1e-15);
            CHECK(std::abs(d.s_b + d.i_b + d.r_b) < 1e-15);
        }
    }
    SECTION("swapping disease labels commutes with the dynamics") {
        Rng rng(5);
        for (int i = 0; i < 200; ++i) {
            Params p = table1(1.0 + 2.0 * rng.next_double(), rng.next_double());
            const auto x = random_state(rng);
            Params q = p;
            std::swap(q.r0_a, q.r0_b);
            const State xs{x.s_b, x.i_b, x.r_b, x.it_b, x.s_a, x.i_a, x.r_a, x.it_a};
            const auto d = rhs(p, x);
            const auto ds = rhs(q, xs);
            CHECK(d.s_a == ds.s_b);
            CHECK(d.i_a == ds.i_b);
            CHECK(d.r_a == ds.r_b);
            CHECK(d.it_a == ds.it_b);
            CHECK(d.s_b == ds.s_a);
            CHECK(d.i_b == ds.i_a);
        }
    }
    SECTION("perceived prevalence relaxes toward prevalence") {
        const auto p = table1();
        State x = initial_state();
        x.it_a = 0.05;
        const auto d = rhs(p, x);
        CHECK(d.it_a == Catch::Approx((x.i_a - x.it_a) / p.tau_p).epsilon(1e-15));
    }
}

TEST_CASE("effective reproduction numbers") {
    SECTION("disease-free limit returns the basic reproduction numbers") {
        const State dfe{1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0};
        for (double k : {0.0, 50.0, 100.0}) {
            auto p = table1(2.0, 1.0);
            p.k = k;
            const auto [re_a, re_b] = effective_r(p, dfe);
            CHECK(re_a == Catch::Approx(p.r0_a).epsilon(1e-15));
            CHECK(re_b == Catch::Approx(p.r0_b).epsilon(1e-15));
        }
    }
    SECTION("perceived prevalence of both diseases discounts R_e under s = 1") {
        auto p = table1(2.0, 1.0);
        State x{1.0, 0.0, 0.0, 0.01, 1.0, 0.0, 0.0, 0.01};
        const auto [re_a, re_b] = effective_r(p, x);
        CHECK(re_a == Catch::Approx(3.0 * std::exp(-2.0)).epsilon(1e-14));
        CHECK(re_b == Catch::Approx(2.0 * std::exp(-2.0)).epsilon(1e-14));
    }
    SECTION("observables are mutually consistent") {
        Rng rng(9);
        for (int i = 0; i < 100; ++i) {
            const auto p = table1(2.5, rng.next_double());
            const auto x = random_state(rng);
            const auto o = observables(p, x);
            CHECK(o.re_a == Catch::Approx(o.beta_a * x.s_a * p.tau_i).epsilon(1e-15));
            CHECK(o.re_b == Catch::Approx(o.beta_b * x.s_b * p.tau_i).epsilon(1e-15));
            CHECK(o.m_a > 0.0);
            CHECK(o.m_a <= 1.0);
        }
    }
}

TEST_CASE("parameter validation") {
    Params p;
    CHECK(p.validate_message().empty());
    p.s = 1.2;
    CHECK_FALSE(p.validate_message().empty());
    p.s = 0.5;
    p.tau_i = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.tau_i = 7.0;
    p.k = -1.0;
    CHECK_FALSE(p.validate_message().empty());
}

TEST_CASE("state validation") {
    CHECK(initial_state().validate_message().empty());
    State x = initial_state();
    x.i_a = 0.5; // breaks the simplex constraint
    CHECK_FALSE(x.validate_message().empty());
    x = initial_state();
    x.it_a = 1.5;
    CHECK_FALSE(x.validate_message().empty());
}
