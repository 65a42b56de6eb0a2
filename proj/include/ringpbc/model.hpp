#pragma once

// Ring of m boost converters coupled through series R-L links.
//
// Converter n feeds a load R2T_n from its output capacitor; line n carries
// current iT_n from converter n to converter (n+1) mod m. The state vector is
// interleaved per converter: (iL_0, vC_0, iT_0, iL_1, vC_1, iT_1, ...).

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace ringpbc {

using Index = std::ptrdiff_t;

struct ConverterParams {
    double L = 0.0;    // inductance [H]
    double C = 0.0;    // capacitance [F]
    double E = 0.0;    // source voltage [V]
    double R2T = 0.0;  // load resistance [Ohm]

    void validate() const;
    bool operator==(const ConverterParams&) const = default;
};

struct LineParams {
    double LT = 0.0;   // line inductance [H]
    double R1T = 0.0;  // line resistance [Ohm]

    void validate() const;
    bool operator==(const LineParams&) const = default;
};

/// Line n couples converter n to converter (n+1) mod m.
struct RingParams {
    std::vector<ConverterParams> converters;
    std::vector<LineParams> lines;

    [[nodiscard]] Index size() const { return static_cast<Index>(converters.size()); }

    /// Throws std::invalid_argument on m < 2, a length mismatch, a non-positive
    /// L, C, R2T, LT or R1T, or a negative source voltage.
    void validate() const;

    /// m identical converters and lines.
    [[nodiscard]] static RingParams uniform(Index m, const ConverterParams& converter,
                                            const LineParams& line);

    bool operator==(const RingParams&) const = default;
};

/// Cyclic neighbour indices.
[[nodiscard]] inline Index next_index(Index n, Index m) { return (n + 1) % m; }
[[nodiscard]] inline Index prev_index(Index n, Index m) { return (n + m - 1) % m; }

/// Slot offsets inside one converter block.
inline constexpr Index kSlotIL = 0;
inline constexpr Index kSlotVC = 1;
inline constexpr Index kSlotIT = 2;
inline constexpr Index kSlotsPerConverter = 3;

/// Flat 3m state vector. Also used for state derivatives.
class RingState {
public:
    RingState() = default;
    explicit RingState(Index m);
    explicit RingState(Eigen::VectorXd values);

    [[nodiscard]] Index converters() const { return values_.size() / kSlotsPerConverter; }

    [[nodiscard]] double iL(Index n) const { return values_[kSlotsPerConverter * n + kSlotIL]; }
    [[nodiscard]] double vC(Index n) const { return values_[kSlotsPerConverter * n + kSlotVC]; }
    [[nodiscard]] double iT(Index n) const { return values_[kSlotsPerConverter * n + kSlotIT]; }
    double& iL(Index n) { return values_[kSlotsPerConverter * n + kSlotIL]; }
    double& vC(Index n) { return values_[kSlotsPerConverter * n + kSlotVC]; }
    double& iT(Index n) { return values_[kSlotsPerConverter * n + kSlotIT]; }

    [[nodiscard]] const Eigen::VectorXd& vector() const { return values_; }
    Eigen::VectorXd& vector() { return values_; }

    [[nodiscard]] bool all_finite() const { return values_.allFinite(); }

private:
    Eigen::VectorXd values_;
};

/// Switch positions (switched mode, entries in {0,1}) or duty ratios
/// (averaged mode, entries in [0,1]), one per converter.
class DutyVector {
public:
    DutyVector() = default;
    explicit DutyVector(std::vector<double> values);
    DutyVector(Index m, double value);

    [[nodiscard]] Index size() const { return static_cast<Index>(values_.size()); }
    [[nodiscard]] double operator[](Index n) const { return values_[static_cast<std::size_t>(n)]; }
    double& operator[](Index n) { return values_[static_cast<std::size_t>(n)]; }
    [[nodiscard]] std::span<const double> values() const { return values_; }

    /// Throws std::invalid_argument unless every entry lies in [0,1].
    void validate() const;
    [[nodiscard]] bool is_binary() const;

    bool operator==(const DutyVector&) const = default;

private:
    std::vector<double> values_;
};

/// D xdot = (J(u) - R) x + E, all 3m x 3m except E (3m).
struct PchMatrices {
    Eigen::MatrixXd D;
    Eigen::MatrixXd J;
    Eigen::MatrixXd R;
    Eigen::VectorXd E;
};

/// Assembles the port-controlled Hamiltonian matrices for the given duty.
/// Throws std::invalid_argument if duty.size() != m.
[[nodiscard]] PchMatrices assemble_pch(const RingParams& params, const DutyVector& duty);

/// D^-1 ((J - R) x + E): the derivative evaluated through the matrix form.
[[nodiscard]] RingState pch_derivative(const PchMatrices& pch, const RingState& state);

/// Averaged circuit equations with duty ratios in [0,1]:
///   L  diL/dt = -(1-mu_n) vC_n + E_n
///   C  dvC/dt =  (1-mu_n) iL_n - iT_n + iT_{n-1} - vC_n / R2T_n
///   LT diT/dt =  vC_n - vC_{n+1} - R1T_n iT_n
[[nodiscard]] RingState averaged_derivative(const RingParams& params, const RingState& state,
                                            const DutyVector& duty);

/// Same equations with binary switch positions; throws on a non-binary entry.
[[nodiscard]] RingState switched_derivative(const RingParams& params, const RingState& state,
                                            const DutyVector& switches);

/// Stored energy 1/2 x^T D x [J].
[[nodiscard]] double hamiltonian(const RingParams& params, const RingState& state);

/// Diagonal of D, in state order.
[[nodiscard]] Eigen::VectorXd storage_diagonal(const RingParams& params);

/// Diagonal of R, in state order.
[[nodiscard]] Eigen::VectorXd dissipation_diagonal(const RingParams& params);

}  // namespace ringpbc
