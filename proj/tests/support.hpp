#pragma once

// Shared fixtures for the unit and acceptance suites.

#include "ringpbc/model.hpp"

#include <random>
#include <vector>

namespace ringpbc::testing {

inline ConverterParams nominal_converter() { return ConverterParams{46e-3, 100e-6, 15.0, 170.0}; }
inline LineParams nominal_line() { return LineParams{15e-3, 100.0}; }

inline RingParams nominal_ring(Index m = 5) { return RingParams::uniform(m, nominal_converter(), nominal_line()); }

/// Physically plausible random ring around the nominal values.
inline RingParams random_ring(std::mt19937_64& rng, Index m) {
    std::uniform_real_distribution<double> L(10e-3, 100e-3), C(50e-6, 200e-6), E(10.0, 20.0),
        R2(100.0, 200.0), LT(5e-3, 20e-3), R1(50.0, 150.0);
    RingParams p;
    for (Index n = 0; n < m; ++n) {
        p.converters.push_back(ConverterParams{L(rng), C(rng), E(rng), R2(rng)});
        p.lines.push_back(LineParams{LT(rng), R1(rng)});
    }
    return p;
}

inline DutyVector random_duty(std::mt19937_64& rng, Index m, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v;
    for (Index n = 0; n < m; ++n) v.push_back(u(rng));
    return DutyVector(std::move(v));
}

inline RingState random_state(std::mt19937_64& rng, Index m, double scale = 50.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    RingState x(m);
    for (Eigen::Index i = 0; i < x.vector().size(); ++i) x.vector()[i] = u(rng);
    return x;
}

/// Ring rotated by one position: converter n of the result is converter n+1 of p.
inline RingParams rotate(const RingParams& p) {
    RingParams r = p;
    const Index m = p.size();
    for (Index n = 0; n < m; ++n) {
        r.converters[static_cast<std::size_t>(n)] = p.converters[static_cast<std::size_t>(next_index(n, m))];
        r.lines[static_cast<std::size_t>(n)] = p.lines[static_cast<std::size_t>(next_index(n, m))];
    }
    return r;
}

inline RingState rotate(const RingState& x) {
    const Index m = x.converters();
    RingState r(m);
    for (Index n = 0; n < m; ++n) {
        r.iL(n) = x.iL(next_index(n, m));
        r.vC(n) = x.vC(next_index(n, m));
        r.iT(n) = x.iT(next_index(n, m));
    }
    return r;
}

inline DutyVector rotate(const DutyVector& d) {
    const Index m = d.size();
    std::vector<double> v;
    for (Index n = 0; n < m; ++n) v.push_back(d[next_index(n, m)]);
    return DutyVector(std::move(v));
}

}  // namespace ringpbc::testing
