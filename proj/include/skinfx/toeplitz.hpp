#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "skinfx/bem.hpp"
#include "skinfx/errors.hpp"

namespace skinfx {

using cdouble = std::complex<double>;

/// Laurent coefficients a_{-(k-1)} .. a_{k-1} of a banded Toeplitz matrix whose
/// (i, j) entry is a_{i-j}. The symbol is f(z) = sum_j a_j z^j.
struct SymbolCoefficients {
    int halfBandwidth = 1;      // k
    std::vector<double> coeffs; // coeffs[j + k - 1] = a_j
    /// max_j |a_j(R) - a_j(R - 20)| when produced by limit_coefficients, else 0.
    double drift = 0.0;

    SymbolCoefficients() : coeffs(1, 0.0) {}
    SymbolCoefficients(int k, std::vector<double> values);

    double at(int j) const;
    double& at(int j);
    /// Coefficients of the index-reversed matrix: a_j -> a_{-j}.
    SymbolCoefficients reversed() const;
    double max_abs() const;
};

/// Thrown when a winding number is requested for a point on (or numerically
/// indistinguishable from) the symbol curve.
class OnCurveError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// a_j = entry(c + j, c) for |j| < k; the column through the center.
SymbolCoefficients coefficients_from_matrix(const Eigen::MatrixXd& matrix, int k, std::size_t center);

struct ChainTemplate {
    double spacing = 1.0;
    double radius = 0.25;
};

/// Coefficients of the infinite chain from the center of an R-sphere chain.
/// The drift against an (R - 20)-sphere chain is stored in the result; above
/// tolerance * max|a_j| the call fails.
SymbolCoefficients limit_coefficients(const ChainTemplate& chain, const MaterialParams& params, int k,
                                      int R, const BasisSpec& basis = {}, double tolerance = 1e-3);

cdouble evaluate_symbol(const SymbolCoefficients& coeffs, cdouble z);

struct SymbolCurve {
    double radius = 1.0;
    std::vector<double> theta;
    std::vector<cdouble> values;
};

/// f(r e^{i theta_m}) on M uniform angles; M is raised to at least 64 k.
SymbolCurve sample_symbol_curve(const SymbolCoefficients& coeffs, double r = 1.0, int M = 0);

struct WindingOptions {
    double radius = 1.0;
    int initialSamples = 0;      // 0 selects 64 k
    int maxSamples = 1 << 22;
};

int winding_number(const SymbolCoefficients& coeffs, cdouble lambda, const WindingOptions& opt = {});

struct WindingSample {
    cdouble lambda;
    std::optional<int> winding;  // empty when lambda lies on the curve
};

/// Winding at every probe point, OpenMP over probes.
std::vector<WindingSample> winding_grid(const SymbolCoefficients& coeffs, const std::vector<cdouble>& probes,
                                        const WindingOptions& opt = {});
std::vector<WindingSample> winding_grid_serial(const SymbolCoefficients& coeffs,
                                               const std::vector<cdouble>& probes,
                                               const WindingOptions& opt = {});

/// Cell-centered nx-by-ny grid over the bounding box of the curve, padded by 5% of its larger side.
std::vector<cdouble> curve_bounding_grid(const SymbolCurve& curve, int nx, int ny);

struct DecayFit {
    double exponent = 0.0;
    double intercept = 0.0;
    double rSquared = 0.0;
    std::size_t center = 0;
    int first = 2;
    int last = 0;
};

/// Least-squares fit of log|entry(c, c + j)| against log j over 2 <= j <= N/2,
/// c the center row; exponent = -slope.
DecayFit decay_fit(const Eigen::MatrixXd& matrix);
DecayFit decay_fit(const GaugeCapacitanceMatrix& matrix);

struct ToeplitzDeviation {
    double constant = 0.0;  // implied K
    std::size_t row = 0;    // location of the maximum (0-based)
    std::size_t col = 0;
};

/// max over |i - j| < k of |entry(i, j) - a_{i-j}| (1 + min(i, N - i)) (1 + min(j, N - j)) / delta
/// with 1-based i, j.
ToeplitzDeviation toeplitz_deviation(const GaugeCapacitanceMatrix& matrix, const SymbolCoefficients& coeffs);

/// Dense N x N Toeplitz matrix with entry(i, j) = a_{i-j}.
Eigen::MatrixXd toeplitz_matrix(const SymbolCoefficients& coeffs, std::size_t n);

}  // namespace skinfx
