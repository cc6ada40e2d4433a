#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "skinfx/bem.hpp"

namespace skinfx {

using cdouble = std::complex<double>;

/// Eigenpairs sorted by real part, then imaginary part. Eigenvectors are the
/// columns of `eigenvectors`, unit 2-norm, with the largest-magnitude entry
/// rotated to be real and positive.
struct SpectralDecomposition {
    std::vector<cdouble> eigenvalues;
    Eigen::MatrixXcd eigenvectors;
    MatrixKind sourceKind = MatrixKind::gauge;
    int bandwidth = 0;
    double frobenius = 0.0;

    std::size_t size() const noexcept { return eigenvalues.size(); }
};

/// Balanced dense nonsymmetric eigensolver. Throws NumericalError when the
/// driver fails or a returned pair violates ||Av - lambda v|| <= 1e-8 ||A||_F.
SpectralDecomposition eigendecompose(const Eigen::MatrixXd& matrix);
SpectralDecomposition eigendecompose(const GaugeCapacitanceMatrix& matrix);

/// Scales v to unit norm and rotates its largest-magnitude entry onto the
/// positive real axis (lowest index wins ties).
void normalize_phase(Eigen::Ref<Eigen::VectorXcd> v);

/// Principal square root with Re >= 0; -1 maps to +i.
cdouble resonant_frequency(cdouble lambda);
std::vector<cdouble> resonant_frequencies(const SpectralDecomposition& decomp);

/// ||(A - lambda I) v|| / ||v||.
double residual(const Eigen::MatrixXd& matrix, cdouble lambda, const Eigen::VectorXcd& v);

/// Angle in degrees between span(a) and span(b): acos(|<a, b>| / (|a| |b|)).
double vector_angle(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

struct SingularDirection {
    double sigmaMin = 0.0;
    Eigen::VectorXcd v;
};

/// Smallest singular value of A - lambda I and its right singular vector.
SingularDirection smallest_singular_direction(const Eigen::MatrixXd& matrix, cdouble lambda);

/// Roots of sum_q c_q z^q (ascending coefficients, leading one nonzero) as
/// eigenvalues of the companion matrix.
std::vector<cdouble> polynomial_roots(const std::vector<cdouble>& ascending);

}  // namespace skinfx
