#include "ringpbc/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ringpbc {

namespace {

void require_positive(double value, const char* what) {
    if (!(std::isfinite(value) && value > 0.0)) {
        throw std::invalid_argument(std::string(what) + " must be positive and finite, got " +
                                    std::to_string(value));
    }
}

void require_non_negative(double value, const char* what) {
    if (!(std::isfinite(value) && value >= 0.0)) {
        throw std::invalid_argument(std::string(what) + " must be non-negative and finite, got " +
                                    std::to_string(value));
    }
}

void require_size(const RingParams& params, Index state_size, Index duty_size) {
    const Index m = params.size();
    if (state_size != kSlotsPerConverter * m) {
        throw std::invalid_argument("state has " + std::to_string(state_size) +
                                    " entries, expected " + std::to_string(kSlotsPerConverter * m));
    }
    if (duty_size != m) {
        throw std::invalid_argument("duty vector has " + std::to_string(duty_size) +
                                    " entries, expected " + std::to_string(m));
    }
}

RingState ring_derivative(const RingParams& params, const RingState& x, const DutyVector& u) {
    const Index m = params.size();
    RingState dx(m);
    for (Index n = 0; n < m; ++n) {
        const auto& cv = params.converters[static_cast<std::size_t>(n)];
        const auto& ln = params.lines[static_cast<std::size_t>(n)];
        const double off = 1.0 - u[n];
        dx.iL(n) = (-off * x.vC(n) + cv.E) / cv.L;
        dx.vC(n) = (off * x.iL(n) - x.iT(n) + x.iT(prev_index(n, m)) - x.vC(n) / cv.R2T) / cv.C;
        dx.iT(n) = (x.vC(n) - x.vC(next_index(n, m)) - ln.R1T * x.iT(n)) / ln.LT;
    }
    return dx;
}

}  // namespace

void ConverterParams::validate() const {
    require_positive(L, "converter L");
    require_positive(C, "converter C");
    require_non_negative(E, "converter E");
    require_positive(R2T, "converter R2T");
}

void LineParams::validate() const {
    require_positive(LT, "line LT");
    require_positive(R1T, "line R1T");
}

void RingParams::validate() const {
    if (converters.size() < 2) {
        throw std::invalid_argument("ring needs at least 2 converters, got " +
                                    std::to_string(converters.size()));
    }
    if (lines.size() != converters.size()) {
        throw std::invalid_argument("ring has " + std::to_string(converters.size()) +
                                    " converters but " + std::to_string(lines.size()) + " lines");
    }
    for (const auto& c : converters) c.validate();
    for (const auto& l : lines) l.validate();
}

RingParams RingParams::uniform(Index m, const ConverterParams& converter, const LineParams& line) {
    RingParams p;
    p.converters.assign(static_cast<std::size_t>(m), converter);
    p.lines.assign(static_cast<std::size_t>(m), line);
    return p;
}

RingState::RingState(Index m) : values_(Eigen::VectorXd::Zero(kSlotsPerConverter * m)) {}

RingState::RingState(Eigen::VectorXd values) : values_(std::move(values)) {
    if (values_.size() % kSlotsPerConverter != 0) {
        throw std::invalid_argument("state length must be a multiple of 3");
    }
}

DutyVector::DutyVector(std::vector<double> values) : values_(std::move(values)) {}

DutyVector::DutyVector(Index m, double value) : values_(static_cast<std::size_t>(m), value) {}

void DutyVector::validate() const {
    for (std::size_t n = 0; n < values_.size(); ++n) {
        const double v = values_[n];
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument("duty[" + std::to_string(n) + "] = " + std::to_string(v) +
                                        " outside [0,1]");
        }
    }
}

bool DutyVector::is_binary() const {
    for (double v : values_) {
        if (v != 0.0 && v != 1.0) return false;
    }
    return true;
}

PchMatrices assemble_pch(const RingParams& params, const DutyVector& duty) {
    const Index m = params.size();
    require_size(params, kSlotsPerConverter * m, duty.size());
    const Index dim = kSlotsPerConverter * m;

    PchMatrices pch;
    pch.D = Eigen::MatrixXd::Zero(dim, dim);
    pch.J = Eigen::MatrixXd::Zero(dim, dim);
    pch.R = Eigen::MatrixXd::Zero(dim, dim);
    pch.E = Eigen::VectorXd::Zero(dim);

    for (Index n = 0; n < m; ++n) {
        const auto& cv = params.converters[static_cast<std::size_t>(n)];
        const auto& ln = params.lines[static_cast<std::size_t>(n)];
        const Index b = kSlotsPerConverter * n;

        pch.D(b + kSlotIL, b + kSlotIL) = cv.L;
        pch.D(b + kSlotVC, b + kSlotVC) = cv.C;
        pch.D(b + kSlotIT, b + kSlotIT) = ln.LT;

        pch.R(b + kSlotVC, b + kSlotVC) = 1.0 / cv.R2T;
        pch.R(b + kSlotIT, b + kSlotIT) = ln.R1T;

        pch.E(b + kSlotIL) = cv.E;

        // Diagonal block A_n(u_n).
        const double off = 1.0 - duty[n];
        pch.J(b + kSlotIL, b + kSlotVC) = -off;
        pch.J(b + kSlotVC, b + kSlotIL) = off;
        pch.J(b + kSlotVC, b + kSlotIT) = -1.0;
        pch.J(b + kSlotIT, b + kSlotVC) = 1.0;

        // Coupling to the neighbours. Block (n, n-1) is B, block (n, n+1) is -B^T;
        // the wrap-around at n = 0 and n = m-1 produces the corner blocks. Blocks are
        // accumulated so that m = 2, where both neighbours coincide, stays correct.
        const Index bp = kSlotsPerConverter * prev_index(n, m);
        const Index bn = kSlotsPerConverter * next_index(n, m);
        pch.J(b + kSlotVC, bp + kSlotIT) += 1.0;   // +iT_{n-1} into C_n
        pch.J(b + kSlotIT, bn + kSlotVC) += -1.0;  // -vC_{n+1} into LT_n
    }
    return pch;
}

RingState pch_derivative(const PchMatrices& pch, const RingState& state) {
    const Eigen::VectorXd rhs = (pch.J - pch.R) * state.vector() + pch.E;
    return RingState(Eigen::VectorXd(rhs.cwiseQuotient(pch.D.diagonal())));
}

RingState averaged_derivative(const RingParams& params, const RingState& state,
                              const DutyVector& duty) {
    require_size(params, state.vector().size(), duty.size());
    return ring_derivative(params, state, duty);
}

RingState switched_derivative(const RingParams& params, const RingState& state,
                              const DutyVector& switches) {
    require_size(params, state.vector().size(), switches.size());
    if (!switches.is_binary()) {
        throw std::invalid_argument("switch positions must be 0 or 1");
    }
    return ring_derivative(params, state, switches);
}

Eigen::VectorXd storage_diagonal(const RingParams& params) {
    const Index m = params.size();
    Eigen::VectorXd d(kSlotsPerConverter * m);
    for (Index n = 0; n < m; ++n) {
        d[kSlotsPerConverter * n + kSlotIL] = params.converters[static_cast<std::size_t>(n)].L;
        d[kSlotsPerConverter * n + kSlotVC] = params.converters[static_cast<std::size_t>(n)].C;
        d[kSlotsPerConverter * n + kSlotIT] = params.lines[static_cast<std::size_t>(n)].LT;
    }
    return d;
}

Eigen::VectorXd dissipation_diagonal(const RingParams& params) {
    const Index m = params.size();
    Eigen::VectorXd r(kSlotsPerConverter * m);
    for (Index n = 0; n < m; ++n) {
        r[kSlotsPerConverter * n + kSlotIL] = 0.0;
        r[kSlotsPerConverter * n + kSlotVC] = 1.0 / params.converters[static_cast<std::size_t>(n)].R2T;
        r[kSlotsPerConverter * n + kSlotIT] = params.lines[static_cast<std::size_t>(n)].R1T;
    }
    return r;
}

double hamiltonian(const RingParams& params, const RingState& state) {
    if (state.vector().size() != kSlotsPerConverter * params.size()) {
        throw std::invalid_argument("state length does not match ring size");
    }
    const Eigen::VectorXd d = storage_diagonal(params);
    return 0.5 * state.vector().cwiseAbs2().dot(d);
}

}  // namespace ringpbc
