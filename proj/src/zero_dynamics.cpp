#include "ringpbc/zero_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ringpbc {

namespace {

constexpr double kBisectionTol = 1e-10;
constexpr double kDegenerateSlope = 1e-12;
constexpr double kSlopeStep = 1e-7;

Stability classify(double slope) {
    if (std::abs(slope) < kDegenerateSlope) return Stability::Degenerate;
    return slope < 0.0 ? Stability::Stable : Stability::Unstable;
}

double evaluate(const ZeroDynConfig& cfg, PinnedOutput which, double mu) {
    return which == PinnedOutput::Voltage ? mu_dot_voltage_output(cfg, mu)
                                          : mu_dot_current_output(cfg, mu);
}

double bisect(const ZeroDynConfig& cfg, PinnedOutput which, double lo, double hi, double f_lo) {
    while (hi - lo > kBisectionTol) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = evaluate(cfg, which, mid);
        if (f_mid == 0.0) return mid;
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double numeric_slope(const ZeroDynConfig& cfg, PinnedOutput which, double mu) {
    const double a = std::max(mu - kSlopeStep, 0.0);
    const double b = std::min(mu + kSlopeStep, 1.0 - 1e-15);
    return (evaluate(cfg, which, b) - evaluate(cfg, which, a)) / (b - a);
}

}  // namespace

ZeroDynConfig ZeroDynConfig::from_equilibrium(const RingParams& params, const Equilibrium& eq,
                                              Index n) {
    const Index m = params.size();
    if (n < 0 || n >= m) throw std::out_of_range("converter index out of range");
    const auto k = static_cast<std::size_t>(n);
    ZeroDynConfig cfg;
    cfg.converter = params.converters[k];
    cfg.vC_pinned = eq.vC_bar[k];
    cfg.iL_pinned = eq.iL_bar[k];
    cfg.iT_n_bar = eq.iT_bar[k];
    cfg.iT_nm1_bar = eq.iT_bar[static_cast<std::size_t>(prev_index(n, m))];
    return cfg;
}

std::string_view to_string(Stability s) {
    switch (s) {
        case Stability::Stable: return "stable";
        case Stability::Unstable: return "unstable";
        case Stability::Degenerate: return "degenerate";
    }
    return "?";
}

std::string_view to_string(PinnedOutput o) {
    return o == PinnedOutput::Voltage ? "voltage" : "current";
}

double mu_dot_voltage_output(const ZeroDynConfig& cfg, double mu) {
    // The bracket adds a current difference to a voltage; kept as the model states it.
    const double bracket = cfg.line_current_difference() + cfg.vC_pinned;
    if (bracket == 0.0) {
        throw std::domain_error("degenerate pinning: iT_n - iT_{n-1} + vC vanishes");
    }
    const double s = 1.0 - mu;
    return s * s / (cfg.converter.L * bracket) * (cfg.converter.E - s * cfg.vC_pinned);
}

double mu_dot_current_output(const ZeroDynConfig& cfg, double mu) {
    const auto& c = cfg.converter;
    const double s = 1.0 - mu;
    const double g = c.R2T * s * s * cfg.iL_pinned - c.R2T * s * cfg.line_current_difference() - c.E;
    return s / (c.R2T * c.C * c.E) * g;
}

double mu_dot_current_output_slope(const ZeroDynConfig& cfg, double mu) {
    // f = s g(s) / k with s = 1 - mu, so df/dmu = -(g + s g') / k.
    const auto& c = cfg.converter;
    const double s = 1.0 - mu;
    const double d = cfg.line_current_difference();
    const double g = c.R2T * s * s * cfg.iL_pinned - c.R2T * s * d - c.E;
    const double dg = 2.0 * c.R2T * s * cfg.iL_pinned - c.R2T * d;
    return -(g + s * dg) / (c.R2T * c.C * c.E);
}

std::array<CurrentEquilibrium, 3> equilibria_current_output(const ZeroDynConfig& cfg) {
    const auto& c = cfg.converter;
    if (!(cfg.iL_pinned > 0.0)) {
        throw std::invalid_argument("pinned inductor current must be positive");
    }
    const double shift = cfg.line_current_difference() / (2.0 * cfg.iL_pinned);
    const double radicand = c.E / (c.R2T * cfg.iL_pinned) + shift * shift;
    if (radicand < 0.0) {
        throw std::domain_error("no real interior equilibrium for the pinned current");
    }
    const double root = std::sqrt(radicand);

    std::array<CurrentEquilibrium, 3> out;
    out[0].mu = 1.0 - shift - root;
    out[1].mu = 1.0 - shift + root;
    out[2].mu = 1.0;
    for (auto& e : out) {
        e.slope = mu_dot_current_output_slope(cfg, e.mu);
        e.stability = classify(e.slope);
        e.admissible = e.mu >= 0.0 && e.mu <= 1.0;
    }
    return out;
}

bool has_stable_operating_point(const ZeroDynConfig& cfg) {
    const auto eqs = equilibria_current_output(cfg);
    return std::any_of(eqs.begin(), eqs.end(), [](const CurrentEquilibrium& e) {
        return e.admissible && e.stability == Stability::Stable;
    });
}

PhaseLine phase_line(const ZeroDynConfig& cfg, PinnedOutput which, int grid_size, Execution exec) {
    if (grid_size < 3) {
        throw std::invalid_argument("phase line needs at least 3 grid points");
    }
    PhaseLine line;
    line.output = which;
    line.mu.resize(static_cast<std::size_t>(grid_size));
    line.mu_dot.resize(static_cast<std::size_t>(grid_size));

    const double spacing = 1.0 / (grid_size + 1);
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < grid_size; ++i) {
            const double mu = (i + 1) * spacing;
            line.mu[static_cast<std::size_t>(i)] = mu;
            line.mu_dot[static_cast<std::size_t>(i)] = evaluate(cfg, which, mu);
        }
    } else {
        for (int i = 0; i < grid_size; ++i) {
            const double mu = (i + 1) * spacing;
            line.mu[static_cast<std::size_t>(i)] = mu;
            line.mu_dot[static_cast<std::size_t>(i)] = evaluate(cfg, which, mu);
        }
    }

    for (std::size_t i = 0; i < line.mu.size(); ++i) {
        const double f = line.mu_dot[i];
        double root = 0.0;
        bool found = false;
        if (f == 0.0) {
            root = line.mu[i];
            found = true;
        } else if (i + 1 < line.mu.size() && f * line.mu_dot[i + 1] < 0.0) {
            root = bisect(cfg, which, line.mu[i], line.mu[i + 1], f);
            found = true;
        }
        if (!found) continue;
        PhaseEquilibrium eq;
        eq.mu = root;
        eq.slope = numeric_slope(cfg, which, root);
        eq.stability = classify(eq.slope);
        line.equilibria.push_back(eq);
    }
    return line;
}

void write_phase_line_csv(std::ostream& os, const PhaseLine& line) {
    char buf[96];
    os << "mu,mu_dot\n";
    for (std::size_t i = 0; i < line.mu.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", line.mu[i], line.mu_dot[i]);
        os << buf;
    }
    os << "# output=" << to_string(line.output) << '\n';
    for (const auto& e : line.equilibria) {
        std::snprintf(buf, sizeof buf, "%.12g slope=%.6g stability=", e.mu, e.slope);
        os << "# equilibrium mu=" << buf << to_string(e.stability) << '\n';
    }
}

}  // namespace ringpbc
