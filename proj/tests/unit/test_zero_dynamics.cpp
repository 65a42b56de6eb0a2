#include "support.hpp"

#include "ringpbc/zero_dynamics.hpp"

#include <catch_amalgamated.hpp>

#include <sstream>

using namespace ringpbc;
using namespace ringpbc::testing;
using Catch::Approx;

namespace {

ZeroDynConfig balanced_config() {
    const auto p = nominal_ring();
    const auto eq = steady_state_for_voltages(p, std::vector<double>(5, 40.0));
    return ZeroDynConfig::from_equilibrium(p, eq, 0);
}

}  // namespace

TEST_CASE("zero dynamics: pinned operating point of the balanced ring", "[zero_dynamics]") {
    const auto cfg = balanced_config();
    CHECK(cfg.vC_pinned == Approx(40.0));
    CHECK(cfg.iL_pinned == Approx(0.62745098));
    CHECK(cfg.line_current_difference() == 0.0);
    CHECK_THROWS_AS(ZeroDynConfig::from_equilibrium(nominal_ring(), steady_state(nominal_ring(), DutyVector(5, 0.5)), 5),
                    std::out_of_range);
}

TEST_CASE("zero dynamics: voltage output has an unstable interior equilibrium", "[zero_dynamics]") {
    const auto cfg = balanced_config();
    CHECK(mu_dot_voltage_output(cfg, 0.625) == Approx(0.0).margin(1e-12));
    // E - (1-mu) vC is negative below 0.625 and positive above: trajectories leave.
    CHECK(mu_dot_voltage_output(cfg, 0.5) < 0.0);
    CHECK(mu_dot_voltage_output(cfg, 0.7) > 0.0);

    const auto line = phase_line(cfg, PinnedOutput::Voltage, 1001);
    REQUIRE(line.equilibria.size() == 1);
    CHECK(line.equilibria[0].mu == Approx(0.625).margin(1e-9));
    CHECK(line.equilibria[0].stability == Stability::Unstable);
}

TEST_CASE("zero dynamics: degenerate voltage pinning is rejected", "[zero_dynamics]") {
    auto cfg = balanced_config();
    cfg.iT_n_bar = -cfg.vC_pinned;
    CHECK_THROWS_AS(mu_dot_voltage_output(cfg, 0.3), std::domain_error);
}

TEST_CASE("zero dynamics: current output has a stable interior equilibrium", "[zero_dynamics]") {
    const auto cfg = balanced_config();
    CHECK(mu_dot_current_output(cfg, 0.625) == Approx(0.0).margin(1e-12));
    CHECK(mu_dot_current_output(cfg, 0.5) > 0.0);
    CHECK(mu_dot_current_output(cfg, 0.7) < 0.0);

    const auto roots = equilibria_current_output(cfg);
    CHECK(roots[0].mu == Approx(0.625).epsilon(1e-12));
    CHECK(roots[0].stability == Stability::Stable);
    CHECK(roots[0].admissible);
    CHECK_FALSE(roots[1].admissible);
    CHECK(roots[2].mu == 1.0);
    CHECK(roots[2].stability == Stability::Unstable);
    CHECK(roots[2].slope == Approx(1.0 / (170.0 * 100e-6)));

    const auto line = phase_line(cfg, PinnedOutput::Current, 1001);
    REQUIRE(line.equilibria.size() == 1);
    CHECK(line.equilibria[0].mu == Approx(0.625).margin(1e-9));
    CHECK(line.equilibria[0].stability == Stability::Stable);
}

TEST_CASE("zero dynamics: analytic slope matches finite differences", "[zero_dynamics][property]") {
    auto cfg = balanced_config();
    cfg.iT_n_bar = 0.03;
    cfg.iT_nm1_bar = -0.01;
    for (double mu : {0.1, 0.3, 0.5, 0.62, 0.9}) {
        const double h = 1e-6;
        const double fd = (mu_dot_current_output(cfg, mu + h) - mu_dot_current_output(cfg, mu - h)) / (2 * h);
        CHECK(mu_dot_current_output_slope(cfg, mu) == Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("zero dynamics: closed-form roots agree with bisection", "[zero_dynamics][property]") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> iL(0.3, 2.0), d(-0.2, 0.2);
    int compared = 0;
    for (int trial = 0; trial < 200; ++trial) {
        auto cfg = balanced_config();
        cfg.iL_pinned = iL(rng);
        cfg.iT_n_bar = d(rng);
        cfg.iT_nm1_bar = d(rng);
        const auto roots = equilibria_current_output(cfg);
        const auto line = phase_line(cfg, PinnedOutput::Current, 4001);
        for (const auto& r : roots) {
            if (!(r.mu > 1e-3 && r.mu < 1.0 - 1e-3)) continue;
            REQUIRE(!line.equilibria.empty());
            double best = 1.0;
            for (const auto& e : line.equilibria) best = std::min(best, std::abs(e.mu - r.mu));
            CHECK(best < 1e-8);
            ++compared;
        }
        for (const auto& e : line.equilibria) CHECK(std::abs(mu_dot_current_output(cfg, e.mu)) < 1e-6);
    }
    CHECK(compared > 50);
}

TEST_CASE("zero dynamics: a line-current imbalance shifts the stable root", "[zero_dynamics]") {
    auto cfg = balanced_config();
    cfg.iT_n_bar = 0.01;
    const auto roots = equilibria_current_output(cfg);
    CHECK(roots[0].mu == Approx(0.61695).margin(1e-5));
    CHECK(roots[0].stability == Stability::Stable);
}

TEST_CASE("zero dynamics: stability is lost when R2 iL no longer exceeds E", "[zero_dynamics]") {
    auto cfg = balanced_config();
    const double E = cfg.converter.E;
    const double R2 = cfg.converter.R2T;
    cfg.iL_pinned = 1.05 * E / R2;
    CHECK(has_stable_operating_point(cfg));
    cfg.iL_pinned = 0.95 * E / R2;
    CHECK_FALSE(has_stable_operating_point(cfg));
    const auto roots = equilibria_current_output(cfg);
    CHECK(roots[0].mu < 0.0);
    cfg.iL_pinned = 0.0;
    CHECK_THROWS_AS(equilibria_current_output(cfg), std::invalid_argument);
}

TEST_CASE("zero dynamics: serial and parallel phase lines are identical", "[zero_dynamics]") {
    const auto cfg = balanced_config();
    for (auto which : {PinnedOutput::Voltage, PinnedOutput::Current}) {
        const auto a = phase_line(cfg, which, 100001, Execution::Serial);
        const auto b = phase_line(cfg, which, 100001, Execution::Parallel);
        CHECK(a.mu == b.mu);
        CHECK(a.mu_dot == b.mu_dot);
        CHECK(a.equilibria.size() == b.equilibria.size());
    }
    CHECK_THROWS_AS(phase_line(cfg, PinnedOutput::Current, 2), std::invalid_argument);
}

TEST_CASE("zero dynamics: phase-line csv", "[zero_dynamics]") {
    const auto line = phase_line(balanced_config(), PinnedOutput::Current, 9);
    std::ostringstream os;
    write_phase_line_csv(os, line);
    const std::string s = os.str();
    CHECK(s.rfind("mu,mu_dot\n0.10000000000000001,", 0) == 0);
    CHECK(s.find("# output=current") != std::string::npos);
    CHECK(s.find("stability=stable") != std::string::npos);
}
