#include "support.hpp"

#include "ringpbc/control.hpp"
#include "ringpbc/equilibrium.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace ringpbc;
using namespace ringpbc::testing;
using Catch::Approx;

namespace {

ControllerState balanced_controller() {
    return initial_controller_state(nominal_ring(), ConstantReference{std::vector<double>(5, 40.0)});
}

}  // namespace

TEST_CASE("control: reference validation", "[control]") {
    const auto p = nominal_ring();
    CHECK_NOTHROW(validate_reference(ConstantReference{std::vector<double>(5, 40.0)}, p));
    CHECK_THROWS_AS(validate_reference(ConstantReference{std::vector<double>(5, 10.0)}, p), std::invalid_argument);
    CHECK_THROWS_AS(validate_reference(ConstantReference{std::vector<double>(4, 40.0)}, p), std::invalid_argument);
    CHECK_NOTHROW(validate_reference(SinusoidReference{40.0, 8.0, 60.0}, p));
    CHECK_THROWS_AS(validate_reference(SinusoidReference{20.0, 8.0, 60.0}, p), std::invalid_argument);
    CHECK_THROWS_AS(validate_reference(SinusoidReference{40.0, 8.0, -1.0}, p), std::invalid_argument);
}

TEST_CASE("control: sinusoidal reference waveform", "[control]") {
    const Reference ref = SinusoidReference{40.0, 8.0, 60.0};
    CHECK(reference_voltage(ref, 2, 0.0) == Approx(40.0));
    CHECK(reference_voltage(ref, 2, 1.0 / 240.0) == Approx(48.0));
    CHECK(reference_rate(ref, 0, 0.0) == Approx(8.0 * 2.0 * std::numbers::pi * 60.0));
    CHECK(is_time_varying(ref));
    CHECK(reference_frequency(ref) == 60.0);
    CHECK_FALSE(is_time_varying(ConstantReference{{40.0}}));
    CHECK(reference_frequency(ConstantReference{{40.0}}) == 0.0);
}

TEST_CASE("control: feedforward duty", "[control]") {
    const auto u = feedforward_duty(nominal_ring(), ConstantReference{std::vector<double>(5, 40.0)}, 0.3);
    for (Index n = 0; n < 5; ++n) CHECK(u[n] == Approx(0.625));
}

TEST_CASE("control: duty law on and off the desired trajectory", "[control]") {
    const auto p = nominal_ring();
    const auto ctrl = balanced_controller();
    const auto damping = DampingConfig::uniform(5, 15.0);
    RingState x = ctrl.desired_state();
    auto mu = pbc_duty(p, x, ctrl, damping);
    for (Index n = 0; n < 5; ++n) CHECK(mu[n] == Approx(0.625));

    // Inductor current 0.1 A above its target lowers the duty by R_alpha * 0.1 / vCd.
    x.iL(0) += 0.1;
    mu = pbc_duty(p, x, ctrl, damping);
    CHECK(mu[0] == Approx(0.5875));
    CHECK(mu[1] == Approx(0.625));
}

TEST_CASE("control: duty law clamps to [0,1]", "[control]") {
    const auto p = nominal_ring();
    const auto ctrl = balanced_controller();
    const auto damping = DampingConfig::uniform(5, 15.0);
    RingState x = ctrl.desired_state();
    x.iL(0) += 10.0;
    x.iL(1) -= 10.0;
    const auto raw = pbc_duty_unclamped(p, x, ctrl, damping);
    CHECK(raw[0] < 0.0);
    CHECK(raw[1] > 1.0);
    const auto mu = pbc_duty(p, x, ctrl, damping);
    CHECK(mu[0] == 0.0);
    CHECK(mu[1] == 1.0);

    auto bad = ctrl;
    bad.vCd[3] = 0.0;
    CHECK_THROWS_AS(pbc_duty_unclamped(p, x, bad, damping), std::runtime_error);
}

TEST_CASE("control: damping configuration", "[control]") {
    CHECK_NOTHROW(DampingConfig::uniform(5, 15.0).validate(5));
    CHECK_THROWS_AS(DampingConfig::uniform(4, 15.0).validate(5), std::invalid_argument);
    CHECK_THROWS_AS(DampingConfig::uniform(5, -1.0).validate(5), std::invalid_argument);
    const auto d = DampingConfig::uniform(2, 15.0).injection_diagonal();
    REQUIRE(d.size() == 6);
    CHECK(d[0] == 15.0);
    CHECK(d[1] == 0.0);
    CHECK(d[2] == 0.0);
    CHECK(d[3] == 15.0);
}

TEST_CASE("control: error energy of single-slot deviations", "[control]") {
    const auto p = nominal_ring();
    const auto ctrl = balanced_controller();
    const auto damping = DampingConfig::uniform(5, 15.0);

    RingState x = ctrl.desired_state();
    x.vC(2) += 1.0;
    const auto hv = error_energy(p, x, ctrl);
    CHECK(hv.total == Approx(5e-5));
    CHECK(hv.per_converter[2] == Approx(5e-5));
    CHECK(hv.per_converter[1] == 0.0);
    CHECK(error_energy_rate(p, x, ctrl, damping) == Approx(-1.0 / 170.0));

    x = ctrl.desired_state();
    x.iL(0) += 1.0;
    CHECK(error_energy(p, x, ctrl).total == Approx(0.5 * 46e-3));
    CHECK(error_energy_rate(p, x, ctrl, damping) == Approx(-15.0));

    CHECK(error_energy(p, ctrl.desired_state(), ctrl).total == 0.0);
}

TEST_CASE("control: decay-rate bound", "[control]") {
    const double k = decay_rate_bound(nominal_ring(), DampingConfig::uniform(5, 15.0));
    CHECK(k == Approx(1.0 / (170.0 * 100e-6)));
    // Without injection the inductor slots carry no dissipation.
    CHECK(decay_rate_bound(nominal_ring(), DampingConfig::uniform(5, 0.0)) == 0.0);
}

TEST_CASE("control: error energy rate obeys the Rayleigh bound", "[control][property]") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = random_ring(rng, 5);
        const auto damping = DampingConfig::uniform(5, 15.0);
        const auto ctrl = initial_controller_state(p, ConstantReference{std::vector<double>(5, 40.0)});
        const RingState x(Eigen::VectorXd(ctrl.desired_state().vector() + random_state(rng, 5, 5.0).vector()));
        const double hd = error_energy(p, x, ctrl).total;
        const double rate = error_energy_rate(p, x, ctrl, damping);
        CHECK(rate <= 0.0);
        CHECK(rate <= -2.0 * decay_rate_bound(p, damping) * hd * (1.0 - 1e-12));
    }
}

TEST_CASE("control: desired trajectory is stationary at the equilibrium", "[control]") {
    const auto p = nominal_ring();
    const auto ctrl = balanced_controller();
    const Reference ref = ConstantReference{std::vector<double>(5, 40.0)};
    const auto rate = desired_state_derivative(p, ctrl, DutyVector(5, 0.625), ref, 0.0);
    for (std::size_t n = 0; n < 5; ++n) {
        CHECK(std::abs(rate.vCd[n]) < 1e-9);
        CHECK(std::abs(rate.iTd[n]) < 1e-9);
    }
}

TEST_CASE("control: closed-loop error obeys the damped error dynamics", "[control][property]") {
    // D e' = (J(mu) - R - R_I) e whenever the duty is not clamped.
    std::mt19937_64 rng(42);
    const Reference ref = ConstantReference{std::vector<double>(5, 40.0)};
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = random_ring(rng, 5);
        const auto damping = DampingConfig::uniform(5, 15.0);
        auto ctrl = initial_controller_state(p, ref);
        std::uniform_real_distribution<double> dv(-3.0, 3.0);
        for (auto& v : ctrl.vCd) v += dv(rng);
        const RingState x(Eigen::VectorXd(ctrl.desired_state().vector() + random_state(rng, 5, 0.2).vector()));
        const auto raw = pbc_duty_unclamped(p, x, ctrl, damping);
        if (std::any_of(raw.begin(), raw.end(), [](double v) { return v < 0.0 || v > 1.0; })) continue;
        const DutyVector mu(raw);
        const auto dx = averaged_derivative(p, x, mu);
        const auto rate = desired_state_derivative(p, ctrl, mu, ref, 0.0);
        RingState dxd(5);
        for (Index n = 0; n < 5; ++n) {
            dxd.vC(n) = rate.vCd[static_cast<std::size_t>(n)];
            dxd.iT(n) = rate.iTd[static_cast<std::size_t>(n)];
        }
        const auto pch = assemble_pch(p, mu);
        const Eigen::VectorXd e = x.vector() - ctrl.desired_state().vector();
        const Eigen::MatrixXd RI = damping.injection_diagonal().asDiagonal();
        const Eigen::VectorXd lhs = pch.D * (dx.vector() - dxd.vector());
        const Eigen::VectorXd rhs = (pch.J - pch.R - RI) * e;
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));
        ++checked;
    }
    CHECK(checked > 100);
}

TEST_CASE("control: sinusoidal reference sets a quasi-static current target", "[control]") {
    const auto p = nominal_ring();
    const Reference ref = SinusoidReference{40.0, 8.0, 60.0};
    const auto ctrl = initial_controller_state(p, ref);
    const double t = 1.0 / 240.0;
    const auto evolve = effective_controller(p, ctrl, ref, t, DesiredVoltageMode::Evolve);
    const auto over = effective_controller(p, ctrl, ref, t, DesiredVoltageMode::Override);
    CHECK(evolve.iL_bar[0] == Approx(48.0 * 48.0 / (170.0 * 15.0)));
    CHECK(evolve.vCd[0] == ctrl.vCd[0]);
    CHECK(over.vCd[0] == Approx(48.0));

    const auto rate = desired_state_derivative(p, ctrl, DutyVector(5, 0.625), ref, 0.0, DesiredVoltageMode::Override);
    CHECK(rate.vCd[0] == Approx(reference_rate(ref, 0, 0.0)));
}
