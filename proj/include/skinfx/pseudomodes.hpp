#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "skinfx/bem.hpp"
#include "skinfx/toeplitz.hpp"

namespace skinfx {

/// Zeros of z^{l-1} (f(z) - lambda), clustered.
struct RootSet {
    std::vector<cdouble> roots;     // one representative per cluster
    std::vector<int> multiplicity;  // same length as roots
    int poleOrder = 0;              // l - 1 after trimming zero outer coefficients
    int interiorCount = 0;          // with multiplicity, |z| < radius
    double radius = 1.0;
    /// max |coefficient reconstructed from the unclustered roots - actual| / max |coefficient|
    double vietaError = 0.0;

    int total() const;
};

inline constexpr double kRootClusterTolerance = 1e-6;

RootSet laurent_roots(const SymbolCoefficients& coeffs, cdouble lambda, double r = 1.0);

enum class ModeSide { left, right };
const char* to_string(ModeSide side);

struct PseudoMode {
    cdouble lambda;
    Eigen::VectorXcd vector;     // unit 2-norm
    double residualBanded = 0.0; // ||(banded - lambda I) v||
    double residualFull = -1.0;  // set by verify_transfer; negative until then
    ModeSide side = ModeSide::left;
    double decayRate = 0.0;      // fitted rho from the log-linear envelope
    double envelopeConstant = 0.0; // C3 with |v_j| / max|v| <= C3 rho^{j-1} from the localized end
    double basisCondition = 0.0;   // condition estimate of the scaled Vandermonde basis
    int winding = 0;
    int bandwidth = 0;
    std::size_t n = 0;
};

/// Exponentially localized pseudo-eigenvector of a k-banded matrix built from
/// the symbol roots on the decaying side. Throws ConfigError when the winding
/// number at lambda is zero.
PseudoMode construct_pseudomode(const Eigen::MatrixXd& banded, const SymbolCoefficients& coeffs, cdouble lambda,
                                double r = 1.0);
PseudoMode construct_pseudomode(const GaugeCapacitanceMatrix& banded, const SymbolCoefficients& coeffs,
                                cdouble lambda, double r = 1.0);

/// |v_j| / max|v| <= C3 rho^{j-1} counted from the localized end; returns C3 for the given rho.
double envelope_constant(const Eigen::VectorXcd& v, ModeSide side, double rho);
/// Log-linear least-squares decay rate from the localized end.
double fitted_decay_rate(const Eigen::VectorXcd& v, ModeSide side);

/// Tail term of the bandwidth criterion: sum_{j > k} xi(j+2-k, j+k)^2 / (1+j)^2
/// with xi(i, j) = sum_{q=i}^{j} 1/q, bounded above by a truncated sum plus a
/// proven remainder no larger than tolerance.
double bandwidth_tail_bound(int k, double tolerance);

/// Smallest k with max(1/k, tail) <= epsilon.
int choose_bandwidth(double epsilon);

/// max(1/k, sum_{j>=k} 1/j^2).
double transfer_epsilon1(int k);

struct TransferCheck {
    double residualFull = 0.0;
    double budget = 0.0;
    double epsilon1 = 0.0;
    double epsilon2 = 0.0;
    double deltaK = 0.0;  // fitted: max |C_ij| |i - j| over |i - j| >= k
    double envelopeConstant = 0.0;
    double rho = 0.0;
    bool hypothesisHolds = false;  // rho < 1 - epsilon1
    bool withinBudget = false;     // false whenever the budget is infinite
};

/// delta*K fitted from the entries the k-banding discards: max_{|i-j| >= k} |C_ij| |i - j|.
double fitted_decay_constant(const Eigen::MatrixXd& matrix, int k = 1);

/// Residual of the mode against the full matrix and the transfer budget
/// eps2 + dK C ((1-eps1)/(1-eps1-rho) sqrt(eps1) + eps1 rho^k / ((1-rho) sqrt(1-rho^2))).
/// The budget is +inf when rho >= 1 - eps1 and collapses to eps2 when nothing
/// lies outside the band. Fills mode.residualFull.
TransferCheck verify_transfer(const GaugeCapacitanceMatrix& full, PseudoMode& mode);
TransferCheck verify_transfer(const Eigen::MatrixXd& full, PseudoMode& mode);

}  // namespace skinfx
