#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "skinfx/geometry.hpp"
#include "skinfx/spectra.hpp"
#include "skinfx/toeplitz.hpp"

using namespace skinfx;

namespace {

constexpr double pi = std::numbers::pi;

// Tridiagonal Toeplitz: a on the diagonal, b below, c above.
Eigen::MatrixXd tridiagonal(int n, double a, double b, double c) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        m(i, i) = a;
        if (i + 1 < n) {
            m(i + 1, i) = b;
            m(i, i + 1) = c;
        }
    }
    return m;
}

}  // namespace

TEST_CASE("tridiagonal Toeplitz eigenpairs match the closed form") {
    const int n = 16;
    const double a = 2.0, b = 1.0, c = 0.25;
    const SpectralDecomposition d = eigendecompose(tridiagonal(n, a, b, c));
    REQUIRE(d.size() == n);
    std::vector<double> expect;
    for (int j = 1; j <= n; ++j) expect.push_back(a + 2.0 * std::sqrt(b * c) * std::cos(j * pi / (n + 1)));
    std::sort(expect.begin(), expect.end());
    const double ratio = std::sqrt(b / c);
    for (int j = 0; j < n; ++j) {
        CHECK(d.eigenvalues[static_cast<std::size_t>(j)].real() == doctest::Approx(expect[static_cast<std::size_t>(j)]).epsilon(1e-10));
        CHECK(std::abs(d.eigenvalues[static_cast<std::size_t>(j)].imag()) < 1e-10);
        // Eigenvector for cos(t): v_q = ratio^q sin(q t), q = 1..n.
        const double t = std::acos((expect[static_cast<std::size_t>(j)] - a) / (2.0 * std::sqrt(b * c)));
        Eigen::VectorXcd ref(n);
        for (int q = 0; q < n; ++q) ref[q] = std::pow(ratio, q + 1) * std::sin((q + 1) * t);
        CHECK(vector_angle(d.eigenvectors.col(j), ref) < 1e-4);
    }
}

TEST_CASE("eigenvectors are unit norm with a real positive peak") {
    Eigen::MatrixXd m(3, 3);
    m << 0.0, -2.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0;
    const SpectralDecomposition d = eigendecompose(m);
    REQUIRE(d.size() == 3);
    // Sorted by real part, then imaginary part.
    CHECK(std::abs(d.eigenvalues[0] - cdouble(0.0, -std::sqrt(2.0))) < 1e-14);
    CHECK(std::abs(d.eigenvalues[1] - cdouble(0.0, std::sqrt(2.0))) < 1e-14);
    CHECK(std::abs(d.eigenvalues[2] - 1.0) < 1e-14);
    for (int j = 0; j < 3; ++j) {
        const Eigen::VectorXcd v = d.eigenvectors.col(j);
        CHECK(v.norm() == doctest::Approx(1.0));
        Eigen::Index idx = 0;
        v.cwiseAbs().maxCoeff(&idx);
        CHECK(v[idx].real() > 0.0);
        CHECK(v[idx].imag() == 0.0);
        CHECK(residual(m, d.eigenvalues[static_cast<std::size_t>(j)], v) < 1e-12);
    }
    // Conjugate eigenvalues carry conjugate eigenvectors.
    CHECK((d.eigenvectors.col(0) - d.eigenvectors.col(1).conjugate()).norm() < 1e-12);
    CHECK(d.frobenius == doctest::Approx(m.norm()));
}

TEST_CASE("eigendecompose rejects bad input") {
    CHECK_THROWS_AS(eigendecompose(Eigen::MatrixXd(2, 3)), ConfigError);
    CHECK_THROWS_AS(eigendecompose(Eigen::MatrixXd(0, 0)), ConfigError);
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2, 2);
    m(0, 1) = std::nan("");
    CHECK_THROWS_AS(eigendecompose(m), ConfigError);
}

TEST_CASE("phase normalization is deterministic") {
    Eigen::VectorXcd v(3);
    v << cdouble(0.0, 2.0), cdouble(0.0, -2.0), 1.0;
    normalize_phase(v);
    CHECK(v.norm() == doctest::Approx(1.0));
    CHECK(v[0].real() == doctest::Approx(2.0 / 3.0));
    CHECK(v[0].imag() == 0.0);
    CHECK(v[1].real() == doctest::Approx(-2.0 / 3.0));
}

TEST_CASE("resonant frequencies take the principal branch") {
    CHECK(resonant_frequency(-1.0) == cdouble(0.0, 1.0));
    CHECK(resonant_frequency(4.0) == cdouble(2.0, 0.0));
    const cdouble w = resonant_frequency(cdouble(0.3, -0.4));
    CHECK(w.real() >= 0.0);
    CHECK(std::abs(w * w - cdouble(0.3, -0.4)) < 1e-15);
}

TEST_CASE("vector angle") {
    Eigen::VectorXcd a(2), b(2);
    a << 1.0, 0.0;
    b << 1.0, 1.0;
    CHECK(vector_angle(a, b) == doctest::Approx(45.0));
    CHECK(vector_angle(a, cdouble(0.0, 3.0) * a) == doctest::Approx(0.0));
    b << 0.0, 1.0;
    CHECK(vector_angle(a, b) == doctest::Approx(90.0));
    CHECK_THROWS_AS(vector_angle(a, Eigen::VectorXcd::Zero(2)), ConfigError);
}

TEST_CASE("smallest singular direction matches Eigen's Jacobi SVD") {
    const Eigen::MatrixXd m = tridiagonal(12, 0.0, 1.0, 0.2) + 0.01 * Eigen::MatrixXd::Ones(12, 12);
    for (cdouble lambda : {cdouble(0.1, 0.0), cdouble(-0.3, 0.2), cdouble(2.0, -1.0)}) {
        Eigen::MatrixXcd shifted = m.cast<cdouble>();
        shifted.diagonal().array() -= lambda;
        const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(shifted, Eigen::ComputeFullV);
        const SingularDirection s = smallest_singular_direction(m, lambda);
        CHECK(s.sigmaMin == doctest::Approx(svd.singularValues()[11]).epsilon(1e-10));
        CHECK(vector_angle(s.v, svd.matrixV().col(11)) < 1e-4);
        CHECK((shifted * s.v).norm() == doctest::Approx(s.sigmaMin).epsilon(1e-8));
    }
}

TEST_CASE("polynomial roots from the companion matrix") {
    // (z - 1)(z - 2)(z + 3i) = z^3 + (3i - 3) z^2 + (2 - 9i) z + 6i
    const std::vector<cdouble> p{cdouble(0.0, 6.0), cdouble(2.0, -9.0), cdouble(-3.0, 3.0), 1.0};
    std::vector<cdouble> r = polynomial_roots(p);
    REQUIRE(r.size() == 3);
    for (const cdouble& expected : {cdouble(1.0), cdouble(2.0), cdouble(0.0, -3.0)}) {
        const auto best = std::min_element(r.begin(), r.end(), [&](cdouble a, cdouble b) {
            return std::abs(a - expected) < std::abs(b - expected);
        });
        CHECK(std::abs(*best - expected) < 1e-12);
    }
    CHECK(polynomial_roots({2.0, 4.0}).front() == cdouble(-0.5));
    CHECK_THROWS_AS(polynomial_roots({1.0, 0.0}), ConfigError);
}

TEST_CASE("symmetric 2x2") {
    Eigen::MatrixXd m(2, 2);
    m << 2.0, -1.0, -1.0, 2.0;
    const SpectralDecomposition d = eigendecompose(m);
    CHECK(std::abs(d.eigenvalues[0] - 1.0) < 1e-14);
    CHECK(std::abs(d.eigenvalues[1] - 3.0) < 1e-14);
    CHECK(resonant_frequency(0.0) == cdouble(0.0));
}

TEST_CASE("singular values at an eigenvalue and for the identity") {
    Eigen::MatrixXd m(2, 2);
    m << 2.0, -1.0, -1.0, 2.0;
    CHECK(smallest_singular_direction(m, 3.0).sigmaMin <= 1e-10 * m.norm());
    const SingularDirection s = smallest_singular_direction(Eigen::MatrixXd::Identity(4, 4), 0.0);
    CHECK(s.sigmaMin == doctest::Approx(1.0));
    CHECK(s.v.norm() == doctest::Approx(1.0));
}

TEST_CASE("residual of a unit vector far from a symmetric spectrum exceeds the distance") {
    Eigen::MatrixXd m(3, 3);
    m << 2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0;
    Eigen::VectorXcd v(3);
    v << 0.3, cdouble(-0.2, 0.5), 0.7;
    const cdouble lambda(8.0, 1.0);
    double dist = 1e300;
    for (const auto& e : eigendecompose(m).eigenvalues) dist = std::min(dist, std::abs(e - lambda));
    CHECK(residual(m, lambda, v) >= dist - 1e-12);
}

TEST_CASE("gauge chain spectrum: real, permutation invariant, reversal symmetric") {
    const SphereLayout l = build_chain(50);
    const GaugeCapacitanceMatrix cp = compute_gauge_capacitance(l, MaterialParams::uniform(1.0));
    const GaugeCapacitanceMatrix cm = compute_gauge_capacitance(l, MaterialParams::uniform(-1.0));
    const SpectralDecomposition dp = eigendecompose(cp);
    const SpectralDecomposition dm = eigendecompose(cm);
    double maxRe = 0.0;
    for (const auto& e : dp.eigenvalues) maxRe = std::max(maxRe, std::abs(e.real()));
    for (std::size_t i = 0; i < dp.size(); ++i) {
        CHECK(std::abs(dp.eigenvalues[i].imag()) <= 1e-8 * maxRe);
        CHECK(std::abs(dp.eigenvalues[i] - dm.eigenvalues[i]) <= 1e-8 * maxRe);
        CHECK(residual(cp.entries, dp.eigenvalues[i], dp.eigenvectors.col(static_cast<Eigen::Index>(i))) <=
              1e-8 * dp.frobenius);
    }
    Eigen::VectorXi idx(50);
    for (int i = 0; i < 50; ++i) idx[i] = (17 * i + 5) % 50;
    const Eigen::PermutationMatrix<Eigen::Dynamic> perm(idx);
    const Eigen::MatrixXd similar = perm * cp.entries * perm.transpose();
    const SpectralDecomposition ds = eigendecompose(similar);
    for (std::size_t i = 0; i < dp.size(); ++i) CHECK(std::abs(ds.eigenvalues[i] - dp.eigenvalues[i]) <= 1e-9 * maxRe);
}

TEST_CASE("hermitian limit has orthonormal eigenvectors") {
    const GaugeCapacitanceMatrix c = compute_gauge_capacitance(build_chain(30), MaterialParams::uniform(0.0));
    const SpectralDecomposition d = eigendecompose(c);
    for (const auto& e : d.eigenvalues) CHECK(e.imag() == 0.0);
    const Eigen::MatrixXcd gram = d.eigenvectors.adjoint() * d.eigenvectors;
    CHECK((gram - Eigen::MatrixXcd::Identity(30, 30)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("smallest singular value of a banded chain shrinks exponentially with N") {
    const MaterialParams p = MaterialParams::uniform(1.0);
    const GaugeCapacitanceMatrix big = compute_gauge_capacitance(build_chain(50), p);
    const SymbolCoefficients s = coefficients_from_matrix(big.entries, 10, 25);
    const SpectralDecomposition d = eigendecompose(toeplitz_matrix(s, 50));
    // A point inside the curve, away from the finite-section eigenvalues.
    const cdouble lambda = 0.5 * (d.eigenvalues[20] + d.eigenvalues[21]);
    REQUIRE(winding_number(s, lambda) != 0);
    const double s30 = smallest_singular_direction(toeplitz_matrix(s, 30), lambda).sigmaMin;
    const double s50 = smallest_singular_direction(toeplitz_matrix(s, 50), lambda).sigmaMin;
    const double rho = std::pow(s50 / s30, 1.0 / 20.0);
    MESSAGE("fitted rho = " << rho);
    CHECK(rho < 1.0);
}
