#include "ringpbc/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ringpbc {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// Difference between the 5th and embedded 4th order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

// Width of the bracket on a mode switch, relative to the step that crossed it.
constexpr double kModeLocateRelTol = 1e-8;

std::string failure_message(const char* what, double t) {
    std::ostringstream os;
    os.precision(10);
    os << what << " at t = " << t << " s";
    return os.str();
}

struct Dopri {
    const Rhs& f;
    Eigen::VectorXd k1, k2, k3, k4, k5, k6, k7, tmp;

    Dopri(const Rhs& rhs, Eigen::Index n)
        : f(rhs), k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n) {}

    // Uses k1 = f(t, y) on entry (first-same-as-last); leaves f(t+h, y_new) in k7.
    void step(double t, const Eigen::VectorXd& y, double h, Eigen::VectorXd& y_new,
              Eigen::VectorXd& err) {
        tmp = y + h * a21 * k1;
        f(t + c2 * h, tmp, k2);
        tmp = y + h * (a31 * k1 + a32 * k2);
        f(t + c3 * h, tmp, k3);
        tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        f(t + c4 * h, tmp, k4);
        tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(t + c5 * h, tmp, k5);
        tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(t + h, tmp, k6);
        y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        f(t + h, y_new, k7);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    }
};

IntegrationResult integrate_rk4(const Rhs& f, Eigen::VectorXd y, const IntegratorConfig& cfg,
                                const OutputObserver& on_output, const StepObserver& on_step) {
    IntegrationResult res;
    const auto times = output_times(cfg);
    on_output(0.0, y);
    double t0 = 0.0;
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double t1 = times[k];
        const double span = t1 - t0;
        const auto steps = static_cast<long>(std::max(1.0, std::ceil(span / cfg.dt - 1e-9)));
        const double h = span / static_cast<double>(steps);
        for (long j = 0; j < steps; ++j) {
            const double t = t0 + static_cast<double>(j) * h;
            y = rk4_step(f, t, y, h);
            ++res.steps_accepted;
            const double t_next = (j + 1 == steps) ? t1 : t0 + static_cast<double>(j + 1) * h;
            if (!y.allFinite()) {
                res.ok = false;
                res.t_reached = t;
                res.message = failure_message("non-finite state", t_next);
                return res;
            }
            if (on_step) on_step(t_next, y);
        }
        t0 = t1;
        res.t_reached = t1;
        on_output(t1, y);
    }
    return res;
}

IntegrationResult integrate_rk45(const Rhs& f, Eigen::VectorXd y, const IntegratorConfig& cfg,
                                 const OutputObserver& on_output, const StepObserver& on_step,
                                 const ModeSignature& mode) {
    IntegrationResult res;
    const auto times = output_times(cfg);
    const Eigen::Index n = y.size();
    Dopri dp(f, n);
    Eigen::VectorXd y_new(n), err(n);

    double t = 0.0;
    double h = std::min(cfg.dt, cfg.dt_max);
    f(t, y, dp.k1);
    on_output(t, y);

    for (std::size_t k = 1; k < times.size(); ++k) {
        const double t_out = times[k];
        while (t < t_out) {
            bool last = false;
            bool located = false;
            double h_try = h;
            if (t + h_try >= t_out * (1.0 - 1e-14)) {
                h_try = t_out - t;
                last = true;
            }
            dp.step(t, y, h_try, y_new, err);

            double norm = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double scale = cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
                const double r = err[i] / scale;
                norm += r * r;
            }
            norm = std::sqrt(norm / static_cast<double>(n));

            if (!std::isfinite(norm)) {
                res.ok = false;
                res.t_reached = t;
                res.message = failure_message("non-finite state", t + h_try);
                return res;
            }

            const double factor = norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
            if (norm <= 1.0 && mode) {
                const auto start = mode(t, y);
                if (mode(t + h_try, y_new) != start) {
                    // Shrink to the shortest step that still reaches the new mode.
                    double lo = 0.0, hi = h_try;
                    const double width = std::max(cfg.dt_min, kModeLocateRelTol * h_try);
                    while (hi - lo > width) {
                        const double mid = 0.5 * (lo + hi);
                        dp.step(t, y, mid, y_new, err);
                        if (mode(t + mid, y_new) == start) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    if (hi < h_try) {
                        h_try = hi;
                        last = false;
                        located = true;
                    }
                    dp.step(t, y, h_try, y_new, err);
                }
            }
            if (norm <= 1.0) {
                t = last ? t_out : t + h_try;
                y.swap(y_new);
                dp.k1.swap(dp.k7);
                ++res.steps_accepted;
                if (on_step) on_step(t, y);
                // Do not let a clipped or shortened step shrink the next proposal.
                h = std::min(cfg.dt_max, (last || located ? std::max(h, h_try) : h_try) * factor);
            } else {
                ++res.steps_rejected;
                res.rejection_times.push_back(t);
                h = h_try * std::max(factor, 0.1);
                if (h < cfg.dt_min) {
                    res.ok = false;
                    res.t_reached = t;
                    res.message = failure_message("step size underflow", t);
                    return res;
                }
            }
        }
        res.t_reached = t_out;
        on_output(t_out, y);
    }
    return res;
}

}  // namespace

std::string_view to_string(IntegratorMethod m) { return m == IntegratorMethod::Rk4 ? "rk4" : "rk45"; }

IntegratorMethod parse_integrator_method(std::string_view s) {
    if (s == "rk4") return IntegratorMethod::Rk4;
    if (s == "rk45") return IntegratorMethod::Rk45;
    throw std::invalid_argument("unknown integrator method '" + std::string(s) + "' (rk4 | rk45)");
}

void IntegratorConfig::validate() const {
    auto positive = [](double v, const char* what) {
        if (!(std::isfinite(v) && v > 0.0)) {
            throw std::invalid_argument(std::string("integrator ") + what + " must be positive");
        }
    };
    positive(dt, "dt");
    positive(rtol, "rtol");
    positive(atol, "atol");
    positive(dt_min, "dt_min");
    positive(dt_max, "dt_max");
    positive(t_end, "t_end");
    positive(output_dt, "output_dt");
    if (dt_min > dt_max) throw std::invalid_argument("integrator dt_min exceeds dt_max");
}

Eigen::VectorXd rk4_step(const Rhs& f, double t, const Eigen::VectorXd& y, double h) {
    const Eigen::Index n = y.size();
    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n);
    f(t, y, k1);
    f(t + 0.5 * h, y + 0.5 * h * k1, k2);
    f(t + 0.5 * h, y + 0.5 * h * k2, k3);
    f(t + h, y + h * k3, k4);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::vector<double> output_times(const IntegratorConfig& cfg) {
    std::vector<double> times{0.0};
    for (long k = 1;; ++k) {
        const double t = static_cast<double>(k) * cfg.output_dt;
        if (t >= cfg.t_end * (1.0 - 1e-12)) break;
        times.push_back(t);
    }
    times.push_back(cfg.t_end);
    return times;
}

IntegrationResult integrate(const Rhs& f, Eigen::VectorXd y0, const IntegratorConfig& cfg,
                            const OutputObserver& on_output, const StepObserver& on_step,
                            const ModeSignature& mode) {
    cfg.validate();
    if (!y0.allFinite()) {
        IntegrationResult res;
        res.ok = false;
        res.message = failure_message("non-finite initial state", 0.0);
        return res;
    }
    return cfg.method == IntegratorMethod::Rk4 ? integrate_rk4(f, std::move(y0), cfg, on_output, on_step)
                                               : integrate_rk45(f, std::move(y0), cfg, on_output, on_step, mode);
}

}  // namespace ringpbc
