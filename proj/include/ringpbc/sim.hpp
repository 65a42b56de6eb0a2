#pragma once

#include "ringpbc/control.hpp"
#include "ringpbc/integrators.hpp"
#include "ringpbc/model.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ringpbc {

/// Fixed duty ratios for the whole run.
struct ConstantDuty {
    DutyVector duty;
};

/// Open loop following a reference: U_n(t) = 1 - E_n / vCd_n(t).
struct OpenLoopReference {
    Reference reference;
};

/// Passivity-based feedback with damping injection.
struct PassivityControl {
    DampingConfig damping;
    Reference reference;
    DesiredVoltageMode voltage_mode = DesiredVoltageMode::Evolve;
};

using DutyLaw = std::variant<ConstantDuty, OpenLoopReference, PassivityControl>;

[[nodiscard]] bool is_feedback(const DutyLaw& law);

/// Sawtooth carrier per converter; the switch is on while carrier < mu.
/// The duty ratio is sampled once per carrier period, at the carrier reset.
struct PwmConfig {
    double f_sw = 20e3;          // [Hz]
    std::vector<double> phase;   // carrier offset per converter, fraction of a period in [0,1); empty = all zero

    /// Throws std::invalid_argument on bad values or when f_sw is below
    /// 100 times the reference frequency.
    void validate(Index m, double reference_frequency) const;
    bool operator==(const PwmConfig&) const = default;
};

enum class EventKind { DutySaturated, DutyReleased, StepRejected, Failure };

[[nodiscard]] std::string_view to_string(EventKind k);

struct SimEvent {
    double t = 0.0;
    EventKind kind = EventKind::Failure;
    Index converter = -1;
    std::string detail;
};

struct Trajectory {
    Index converters = 0;
    std::vector<double> t;
    std::vector<RingState> states;
    std::vector<DutyVector> duties;
    std::vector<std::vector<double>> hd;   // Hd_n per sample
    std::vector<double> hd_total;
    std::vector<RingState> desired;        // x_d per sample
    std::vector<double> hd_rate;           // -e^T (R + R_I) e per sample (feedback runs; 0 otherwise)
    /// Switched runs only: mean state over the most recently completed PWM period.
    std::vector<RingState> period_average;
    std::vector<SimEvent> events;
    bool ok = true;
    std::string failure;
    long steps_accepted = 0;
    long steps_rejected = 0;

    [[nodiscard]] std::size_t samples() const { return t.size(); }
};

/// Integrates the averaged ring (plus desired-state dynamics under feedback)
/// from x0 over [0, integrator.t_end], recording every output_dt.
[[nodiscard]] Trajectory simulate_averaged(const RingParams& params, const RingState& x0,
                                           const DutyLaw& law, const IntegratorConfig& integrator);

/// Integrates the switched ring with fixed RK4 sub-steps of at most
/// integrator.dt, split exactly at every carrier reset and switch edge.
/// Requires integrator.dt <= 1 / (50 f_sw).
[[nodiscard]] Trajectory simulate_switched(const RingParams& params, const RingState& x0,
                                           const DutyLaw& law, const PwmConfig& pwm,
                                           const IntegratorConfig& integrator);

/// Everything needed for one independent run.
struct SimulationJob {
    RingParams params;
    RingState x0;
    DutyLaw law;
    IntegratorConfig integrator;
    std::optional<PwmConfig> pwm;  // switched mode when set
};

[[nodiscard]] Trajectory run_job(const SimulationJob& job);

}  // namespace ringpbc
