#pragma once

// Passivity-based duty-ratio control with damping injection on the inductor
// currents. The controller carries a desired trajectory x_d (vCd, iL_bar, iTd)
// driven by the same interconnection as the plant, so that the error
// e = x - x_d obeys D e' = (J(mu) - R - R_I) e and the error energy
// Hd = 1/2 e^T D e decays at least at rate k = min_i (R + R_I)_ii / D_ii.

#include "ringpbc/model.hpp"

#include <Eigen/Dense>

#include <variant>
#include <vector>

namespace ringpbc {

/// Virtual resistance injected at each inductor-current slot [Ohm].
struct DampingConfig {
    std::vector<double> R_alpha;

    [[nodiscard]] static DampingConfig uniform(Index m, double r_alpha);
    void validate(Index m) const;
    /// Diagonal of R_I in state order.
    [[nodiscard]] Eigen::VectorXd injection_diagonal() const;

    bool operator==(const DampingConfig&) const = default;
};

struct ConstantReference {
    std::vector<double> vCd;  // per converter [V]
    bool operator==(const ConstantReference&) const = default;
};

/// v_Cd(t) = vDC + A sin(2 pi f t), shared by all converters.
struct SinusoidReference {
    double vDC = 0.0;
    double A = 0.0;
    double f = 0.0;
    bool operator==(const SinusoidReference&) const = default;
};

using Reference = std::variant<ConstantReference, SinusoidReference>;

/// How the controller's desired capacitor voltage follows a time-varying reference.
enum class DesiredVoltageMode {
    /// vCd keeps integrating the desired-state dynamics; the reference enters
    /// through the quasi-static inductor-current target iL_bar(t).
    Evolve,
    /// vCd is replaced by the reference waveform at every instant.
    Override,
};

[[nodiscard]] double reference_voltage(const Reference& ref, Index n, double t);
[[nodiscard]] double reference_rate(const Reference& ref, Index n, double t);
[[nodiscard]] bool is_time_varying(const Reference& ref);
/// Highest frequency present in the reference [Hz]; 0 for constant targets.
[[nodiscard]] double reference_frequency(const Reference& ref);
/// Throws std::invalid_argument unless every target stays above its source voltage.
void validate_reference(const Reference& ref, const RingParams& params);

struct ControllerState {
    std::vector<double> vCd;     // desired capacitor voltage [V]
    std::vector<double> iTd;     // desired line current [A]
    std::vector<double> iL_bar;  // inductor-current target [A]

    [[nodiscard]] Index size() const { return static_cast<Index>(vCd.size()); }
    /// x_d in the interleaved state layout.
    [[nodiscard]] RingState desired_state() const;
};

/// Rates of the integrated controller variables.
struct ControllerRate {
    std::vector<double> vCd;
    std::vector<double> iTd;
};

/// vCd at the reference value for t = 0, iTd and iL_bar at the matching equilibrium.
[[nodiscard]] ControllerState initial_controller_state(const RingParams& params,
                                                       const Reference& ref);

/// Applies the reference at time t: for a sinusoid, iL_bar becomes the
/// steady-state current of the instantaneous target and, in Override mode,
/// vCd becomes the waveform itself. Constant references leave ctrl unchanged.
[[nodiscard]] ControllerState effective_controller(const RingParams& params,
                                                   const ControllerState& ctrl,
                                                   const Reference& ref, double t,
                                                   DesiredVoltageMode mode);

/// Open-loop duty U_n(t) = 1 - E_n / vCd_n(t).
[[nodiscard]] DutyVector feedforward_duty(const RingParams& params, const Reference& ref, double t);

/// mu_n = 1 - (E_n + R_alpha_n (iL_n - iL_bar_n)) / vCd_n before clamping.
/// Throws std::runtime_error if some vCd_n <= 0.
[[nodiscard]] std::vector<double> pbc_duty_unclamped(const RingParams& params,
                                                     const RingState& state,
                                                     const ControllerState& ctrl,
                                                     const DampingConfig& damping);

/// pbc_duty_unclamped() clamped to [0,1].
[[nodiscard]] DutyVector pbc_duty(const RingParams& params, const RingState& state,
                                  const ControllerState& ctrl, const DampingConfig& damping);

/// Desired-trajectory dynamics
///   C_n  vCd_n' = (1 - mu_n) iL_bar_n - iTd_n + iTd_{n-1} - vCd_n / R2T_n
///   LT_n iTd_n' = vCd_n - vCd_{n+1} - R1T_n iTd_n
/// evaluated on effective_controller(ctrl, ref, t, mode). In Override mode the
/// vCd rate is the derivative of the reference waveform.
[[nodiscard]] ControllerRate desired_state_derivative(const RingParams& params,
                                                      const ControllerState& ctrl,
                                                      const DutyVector& duty,
                                                      const Reference& ref, double t,
                                                      DesiredVoltageMode mode =
                                                          DesiredVoltageMode::Evolve);

struct ErrorEnergy {
    Eigen::VectorXd error;              // x - x_d
    std::vector<double> per_converter;  // Hd_n [J]
    double total = 0.0;                 // [J]
};

[[nodiscard]] ErrorEnergy error_energy(const RingParams& params, const RingState& state,
                                       const ControllerState& ctrl);

/// -e^T (R + R_I) e [W]; never positive.
[[nodiscard]] double error_energy_rate(const RingParams& params, const RingState& state,
                                       const ControllerState& ctrl, const DampingConfig& damping);

/// k = min_i (R + R_I)_ii / D_ii, so that Hd' <= -k Hd.
[[nodiscard]] double decay_rate_bound(const RingParams& params, const DampingConfig& damping);

}  // namespace ringpbc
