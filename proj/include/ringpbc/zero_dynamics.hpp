#pragma once

// Residual duty-ratio dynamics of one converter when either its capacitor
// voltage or its inductor current is held at a fixed value together with the
// adjacent line currents.

#include "ringpbc/equilibrium.hpp"
#include "ringpbc/execution.hpp"
#include "ringpbc/model.hpp"

#include <array>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace ringpbc {

struct ZeroDynConfig {
    ConverterParams converter;
    double vC_pinned = 0.0;   // [V]
    double iL_pinned = 0.0;   // [A]
    double iT_n_bar = 0.0;    // outgoing line current [A]
    double iT_nm1_bar = 0.0;  // incoming line current [A]

    /// iT_n - iT_{n-1}
    [[nodiscard]] double line_current_difference() const { return iT_n_bar - iT_nm1_bar; }

    /// Pins converter n at the given steady state.
    [[nodiscard]] static ZeroDynConfig from_equilibrium(const RingParams& params,
                                                        const Equilibrium& eq, Index n);
};

enum class Stability { Stable, Unstable, Degenerate };
enum class PinnedOutput { Voltage, Current };

[[nodiscard]] std::string_view to_string(Stability s);
[[nodiscard]] std::string_view to_string(PinnedOutput o);

/// Voltage held: mu' = (1-mu)^2 / (L [dIT + vC]) * (E - (1-mu) vC).
/// Throws std::domain_error when the bracket dIT + vC is zero.
[[nodiscard]] double mu_dot_voltage_output(const ZeroDynConfig& cfg, double mu);

/// Current held: mu' = (1-mu) / (R2 C E) * (R2 (1-mu)^2 iL - R2 (1-mu) dIT - E).
[[nodiscard]] double mu_dot_current_output(const ZeroDynConfig& cfg, double mu);

/// d(mu')/d(mu) of the current-output dynamics, in closed form.
[[nodiscard]] double mu_dot_current_output_slope(const ZeroDynConfig& cfg, double mu);

struct CurrentEquilibrium {
    double mu = 0.0;
    double slope = 0.0;
    Stability stability = Stability::Degenerate;
    bool admissible = false;  // 0 <= mu <= 1
};

/// The three roots of the current-output dynamics,
///   mu_{1,2} = 1 - d/(2 iL) -/+ sqrt(E/(R2 iL) + (d/(2 iL))^2),  mu_3 = 1,
/// with d = iT_n - iT_{n-1}. Throws std::invalid_argument if iL <= 0.
[[nodiscard]] std::array<CurrentEquilibrium, 3> equilibria_current_output(const ZeroDynConfig& cfg);

/// True when the current-output dynamics have a stable root inside [0,1].
/// With balanced lines this is exactly R2 iL > E.
[[nodiscard]] bool has_stable_operating_point(const ZeroDynConfig& cfg);

struct PhaseEquilibrium {
    double mu = 0.0;
    double slope = 0.0;
    Stability stability = Stability::Degenerate;
};

struct PhaseLine {
    PinnedOutput output = PinnedOutput::Voltage;
    std::vector<double> mu;
    std::vector<double> mu_dot;
    std::vector<PhaseEquilibrium> equilibria;
};

/// Samples mu' on mu_i = (i+1)/(grid_size+1), i < grid_size, locates every sign
/// change by bisection to 1e-10 and classifies it by the local slope.
/// Throws std::invalid_argument if grid_size < 3.
[[nodiscard]] PhaseLine phase_line(const ZeroDynConfig& cfg, PinnedOutput which, int grid_size,
                                   Execution exec = Execution::Parallel);

/// Two-column CSV "mu,mu_dot" followed by "# equilibrium" annotation lines.
void write_phase_line_csv(std::ostream& os, const PhaseLine& line);

}  // namespace ringpbc
