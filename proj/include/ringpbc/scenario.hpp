#pragma once

// Scenario definitions: parameters, control, reference, integrator and initial
// state for one run, with a JSON file form and the built-in campaigns.

#include "ringpbc/control.hpp"
#include "ringpbc/integrators.hpp"
#include "ringpbc/model.hpp"
#include "ringpbc/sim.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ringpbc {

enum class ControlMode { OpenLoop, Pbc };
enum class SimMode { Averaged, Switched };

[[nodiscard]] std::string_view to_string(ControlMode c);
[[nodiscard]] std::string_view to_string(SimMode s);

struct InitialState {
    enum class Kind { Zero, Equilibrium, Explicit, Random };
    Kind kind = Kind::Zero;
    std::vector<double> values;  // Explicit: full 3m state
    double amplitude = 1.0;      // Random: uniform perturbation half-width around the equilibrium
    std::uint64_t seed = 0;

    bool operator==(const InitialState&) const = default;
};

struct Scenario {
    std::string name;
    std::string description;
    RingParams params;
    ControlMode control = ControlMode::Pbc;
    DampingConfig damping;
    Reference reference = ConstantReference{};
    DesiredVoltageMode voltage_mode = DesiredVoltageMode::Evolve;
    IntegratorConfig integrator;
    SimMode mode = SimMode::Averaged;
    PwmConfig pwm;
    InitialState x0;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
    [[nodiscard]] Index size() const { return params.size(); }

    bool operator==(const Scenario&) const = default;
};

[[nodiscard]] std::vector<std::string> builtin_scenario_names();

/// Throws std::invalid_argument listing the built-ins for an unknown name.
[[nodiscard]] Scenario builtin_scenario(std::string_view name);

/// A built-in name or a path to a JSON scenario file.
[[nodiscard]] Scenario load_scenario(const std::string& name_or_path);

[[nodiscard]] nlohmann::json scenario_to_json(const Scenario& s);

/// Parses and validates; schema violations raise std::invalid_argument with
/// the JSON path of the field ("scenario.converters[2].L: ...").
[[nodiscard]] Scenario scenario_from_json(const nlohmann::json& j);

[[nodiscard]] RingState initial_state(const Scenario& s);

/// Duty law for the scenario's control mode.
[[nodiscard]] DutyLaw duty_law(const Scenario& s);

[[nodiscard]] SimulationJob make_job(const Scenario& s);

/// The target capacitor voltage of converter n at time t.
[[nodiscard]] double target_voltage(const Scenario& s, Index n, double t);

}  // namespace ringpbc
