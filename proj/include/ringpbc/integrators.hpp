#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace ringpbc {

enum class IntegratorMethod { Rk4, Rk45 };

[[nodiscard]] std::string_view to_string(IntegratorMethod m);
/// Accepts "rk4" and "rk45"; throws std::invalid_argument otherwise.
[[nodiscard]] IntegratorMethod parse_integrator_method(std::string_view s);

struct IntegratorConfig {
    IntegratorMethod method = IntegratorMethod::Rk45;
    double dt = 1e-5;        // RK4 step; initial step guess for RK45 [s]
    double rtol = 1e-6;
    double atol = 1e-9;
    double dt_min = 1e-12;   // RK45 underflow threshold [s]
    double dt_max = 1e-4;    // [s]
    double t_end = 1.0;      // [s]
    double output_dt = 1e-4; // recording cadence [s]

    void validate() const;
    bool operator==(const IntegratorConfig&) const = default;
};

using Rhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt)>;

/// Called at every output time (including t = 0 and t_end).
using OutputObserver = std::function<void(double t, const Eigen::VectorXd& y)>;

/// Called after every accepted step.
using StepObserver = std::function<void(double t, const Eigen::VectorXd& y)>;

/// Discrete operating mode of the right-hand side, such as which actuators sit
/// on a limit. An RK45 step that changes the mode is shortened by bisection so
/// that it ends just past the switching time; the kink in f then never lies
/// inside a step, where the embedded error estimate would miss it.
using ModeSignature = std::function<std::vector<int>(double t, const Eigen::VectorXd& y)>;

struct IntegrationResult {
    bool ok = true;
    double t_reached = 0.0;
    std::string message;
    long steps_accepted = 0;
    long steps_rejected = 0;
    std::vector<double> rejection_times;
};

/// Classic fourth-order Runge-Kutta step.
[[nodiscard]] Eigen::VectorXd rk4_step(const Rhs& f, double t, const Eigen::VectorXd& y, double h);

/// Output times k * output_dt below t_end, followed by t_end itself.
[[nodiscard]] std::vector<double> output_times(const IntegratorConfig& cfg);

/// Integrates y' = f(t, y) from 0 to cfg.t_end. RK4 subdivides each output
/// interval into equal steps no longer than dt; RK45 is Dormand-Prince 5(4)
/// with steps clipped to the output grid. Non-finite values or an RK45 step
/// below dt_min stop the run with ok = false; samples up to that point have
/// already been delivered. `mode` is used by RK45 only.
IntegrationResult integrate(const Rhs& f, Eigen::VectorXd y0, const IntegratorConfig& cfg,
                            const OutputObserver& on_output, const StepObserver& on_step = {},
                            const ModeSignature& mode = {});

}  // namespace ringpbc
