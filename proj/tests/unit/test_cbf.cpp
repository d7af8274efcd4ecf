#include <doctest.h>

#include <cmath>
#include <random>

#include "stefan/cbf.hpp"
#include "stefan/config.hpp"
#include "stefan/controller.hpp"

using namespace stefan;

TEST_CASE("snapshot at the equilibrium is all zero") {
    const PlantParams p{kZincPreset.alpha, kZincPreset.beta, kZincPreset.k, 0.35, kZincPreset.T_m};
    const StefanState eq{0.0, 0.3, 0.0, std::vector<double>(50, p.T_m)};
    const auto s = snapshot(eq, p, Setpoint{0.3}, ControllerGains{});
    CHECK(s.h1 == 0.0);
    CHECK(s.h2 == 0.0);
    CHECK(s.h3 == 0.0);
    CHECK(s.h_min == 0.0);
}

TEST_CASE("snapshot of the nondimensional linear profile") {
    const PlantParams p{1.0, 1.0, 1.0, 0.35, 0.0};
    const StefanState st{0.0, 0.05, 0.0, make_profile(ProfileKind::linear, 1.0, 0.0, 101)};
    const auto s = snapshot(st, p, Setpoint{0.3}, ControllerGains{});
    CHECK(s.h1 == doctest::Approx(0.225));
    CHECK(s.h3 == doctest::Approx(7.2e-4));
    CHECK(s.h_min == 0.0);
}

TEST_CASE("snapshot outside the safe set when the gain condition fails") {
    const auto s = snapshot_from(0.0, 100.0, 0.5, 0.0, 3.2e-3);
    CHECK(s.h3 == doctest::Approx(-0.18));
    CHECK(3.2e-3 < 0.5 / 100.0);
}

TEST_CASE("definition consistency h3 + h2 - c1 h1 = 0") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double c1 = std::abs(d(rng)) * 1e-8 + 1e-6;
        const auto s = snapshot_from(0.0, d(rng), d(rng), 0.0, c1);
        const double residual = s.h3 + s.h2 - c1 * s.h1;
        CHECK(std::abs(residual) <= 1e-15 * (std::abs(s.h2) + std::abs(c1 * s.h1)));
    }
}

TEST_CASE("h1 ODE residual") {
    SUBCASE("equilibrium") {
        std::vector<TraceRecord> tr(10);
        for (int i = 0; i < 10; ++i) tr[i].t = i;
        CHECK(h1_ode_residual(tr, 0.1) == 0.0);
    }
    SUBCASE("h3 = 0 gives exponential decay of h1") {
        // Integrate h1' = -c1 h1 with RK4 and check the trace against exp(-c1 t).
        const double c1 = 0.3;
        std::vector<TraceRecord> tr;
        double h1 = 1.0;
        const double dt = 0.01;
        for (int i = 0; i <= 1000; ++i) {
            TraceRecord r;
            r.t = i * dt;
            r.h1 = h1;
            tr.push_back(r);
            auto f = [&](double x) { return -c1 * x; };
            const double k1 = f(h1), k2 = f(h1 + 0.5 * dt * k1), k3 = f(h1 + 0.5 * dt * k2), k4 = f(h1 + dt * k3);
            h1 += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        }
        CHECK(tr.back().h1 == doctest::Approx(std::exp(-c1 * 10.0)).epsilon(1e-9));
        CHECK(h1_ode_residual(tr, c1) < 1e-5);
    }
    SUBCASE("residual shrinks at second order on non-uniform samples") {
        auto residual = [](double dt) {
            std::vector<TraceRecord> tr;
            for (int i = 0; i * dt <= 5.0; ++i) {
                TraceRecord r;
                r.t = i * dt * (1.0 + 0.1 * (i % 2));  // mildly irregular spacing
                r.h1 = std::sin(r.t);
                r.h3 = std::cos(r.t) + 0.2 * r.h1;  // so that -c1 h1 + h3 = h1'
                tr.push_back(r);
            }
            return h1_ode_residual(tr, 0.2);
        };
        const double a = residual(0.02), b = residual(0.01);
        CHECK(a / b > 3.5);
    }
    SUBCASE("too short") {
        CHECK_THROWS_AS(h1_ode_residual(std::vector<TraceRecord>(2), 0.1), std::invalid_argument);
    }
}

TEST_CASE("safe set check") {
    std::vector<TraceRecord> tr(5);
    for (int i = 0; i < 5; ++i) {
        tr[i].t = i;
        tr[i].s = 0.1 + 0.01 * i;
        tr[i].h1 = 10.0;
        tr[i].h2 = 1.0;
        tr[i].h3 = 2.0;
    }
    CHECK(safe_set_check(tr, 0.1, 0.3, 1e-9).pass);
    CHECK(safe_set_tolerance(tr) == doctest::Approx(1e-8));

    tr[3].h2 = -1.0;
    const auto r = safe_set_check(tr, 0.1, 0.3, 1e-9);
    CHECK_FALSE(r.pass);
    REQUIRE(r.first_violation.has_value());
    CHECK(*r.first_violation == 3);
    CHECK(r.what == "h2");

    tr[3].h2 = 1.0;
    tr[4].s = 0.3 + 1e-6;
    CHECK(safe_set_check(tr, 0.1, 0.3, 1e-9).what == "s above s_r");
    tr[4].s = 0.3 + 1e-10;
    CHECK(safe_set_check(tr, 0.1, 0.3, 1e-9).pass);

    const std::vector<TraceRecord> eq(3);
    CHECK(safe_set_check(eq, 0.0, 0.0, 0.0).pass);
}
