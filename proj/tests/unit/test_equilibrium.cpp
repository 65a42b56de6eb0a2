#include "support.hpp"

#include "ringpbc/equilibrium.hpp"

#include <catch_amalgamated.hpp>

using namespace ringpbc;
using namespace ringpbc::testing;
using Catch::Approx;

TEST_CASE("equilibrium: duty for a target voltage", "[equilibrium]") {
    CHECK(duty_from_voltage(15.0, 40.0) == Approx(0.625));
    CHECK(duty_from_voltage(15.0, 15.0) == 0.0);
    CHECK_THROWS_AS(duty_from_voltage(15.0, 10.0), std::domain_error);
    CHECK_THROWS_AS(duty_from_voltage(15.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(duty_from_voltage(0.0, 40.0), std::invalid_argument);
}

TEST_CASE("equilibrium: balanced ring", "[equilibrium]") {
    const auto eq = steady_state(nominal_ring(), DutyVector(5, 0.625));
    for (std::size_t n = 0; n < 5; ++n) {
        CHECK(eq.vC_bar[n] == Approx(40.0));
        CHECK(eq.iT_bar[n] == 0.0);
        CHECK(eq.iL_bar[n] == Approx(0.62745098).epsilon(1e-8));
    }
}

TEST_CASE("equilibrium: unit duty has no steady state", "[equilibrium]") {
    CHECK_THROWS_AS(steady_state(nominal_ring(), DutyVector(5, 1.0)), std::domain_error);
    CHECK_THROWS_AS(steady_state(nominal_ring(), DutyVector(std::vector<double>{0.5, 0.5, 1.2, 0.5, 0.5})),
                    std::invalid_argument);
    CHECK_THROWS_AS(steady_state(nominal_ring(), DutyVector(4, 0.5)), std::invalid_argument);
}

TEST_CASE("equilibrium: closed form is a fixed point of the dynamics", "[equilibrium][property]") {
    std::mt19937_64 rng(21);
    for (Index m : {2, 3, 5, 8}) {
        for (int trial = 0; trial < 50; ++trial) {
            const auto p = random_ring(rng, m);
            const auto u = random_duty(rng, m, 0.0, 0.8);
            const auto x = steady_state(p, u).state();
            const auto dx = averaged_derivative(p, x, u);
            // Compare each rate against the size of the terms it balances.
            for (Index n = 0; n < m; ++n) {
                const auto& c = p.converters[static_cast<std::size_t>(n)];
                const auto& l = p.lines[static_cast<std::size_t>(n)];
                CHECK(std::abs(dx.iL(n)) * c.L <= 1e-12 * c.E);
                CHECK(std::abs(dx.vC(n)) * c.C <= 1e-12 * (std::abs(x.iL(n)) + x.vC(n) / c.R2T));
                CHECK(std::abs(dx.iT(n)) * l.LT <= 1e-12 * x.vC(n));
            }
        }
    }
}

TEST_CASE("equilibrium: voltages do not depend on loads or lines", "[equilibrium]") {
    std::mt19937_64 rng(22);
    const auto u = random_duty(rng, 5, 0.2, 0.7);
    const auto a = random_ring(rng, 5);
    auto b = a;
    for (auto& c : b.converters) c.R2T *= 1.7;
    for (auto& l : b.lines) l.R1T *= 0.3;
    const auto ea = steady_state(a, u);
    const auto eb = steady_state(b, u);
    for (std::size_t n = 0; n < 5; ++n) {
        CHECK(ea.vC_bar[n] == eb.vC_bar[n]);
        CHECK(ea.vC_bar[n] == Approx(a.converters[n].E / (1.0 - u[static_cast<Index>(n)])));
    }
}

TEST_CASE("equilibrium: unbalanced inputs at a common target carry no line current", "[equilibrium]") {
    auto p = nominal_ring();
    const double e[] = {15, 13, 12, 13, 15};
    for (std::size_t n = 0; n < 5; ++n) p.converters[n].E = e[n];
    const auto eq = steady_state_for_voltages(p, std::vector<double>(5, 40.0));
    for (std::size_t n = 0; n < 5; ++n) {
        CHECK(eq.vC_bar[n] == Approx(40.0));
        CHECK(std::abs(eq.iT_bar[n]) < 1e-12);
        CHECK(eq.iL_bar[n] == Approx(40.0 * 40.0 / (170.0 * e[n])));
    }
}

TEST_CASE("equilibrium: supplied power equals dissipated power", "[equilibrium][property]") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = random_ring(rng, 5);
        const auto eq = steady_state(p, random_duty(rng, 5, 0.0, 0.8));
        double in = 0.0, out = 0.0;
        for (std::size_t n = 0; n < 5; ++n) {
            in += p.converters[n].E * eq.iL_bar[n];
            out += eq.vC_bar[n] * eq.vC_bar[n] / p.converters[n].R2T + p.lines[n].R1T * eq.iT_bar[n] * eq.iT_bar[n];
        }
        CHECK(in == Approx(out).epsilon(1e-12));
    }
}

TEST_CASE("equilibrium: line currents follow neighbouring voltage differences", "[equilibrium]") {
    auto p = nominal_ring();
    const auto eq = steady_state_for_voltages(p, {40.0, 42.0, 40.0, 38.0, 40.0});
    CHECK(eq.iT_bar[0] == Approx(-2.0 / 100.0));
    CHECK(eq.iT_bar[1] == Approx(2.0 / 100.0));
    CHECK(eq.iT_bar[2] == Approx(2.0 / 100.0));
    CHECK(eq.iT_bar[3] == Approx(-2.0 / 100.0));
    CHECK(eq.iT_bar[4] == Approx(0.0).margin(1e-15));
    const auto x = eq.state();
    CHECK(x.vC(1) == Approx(42.0));
}
