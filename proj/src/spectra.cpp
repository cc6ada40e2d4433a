#include "skinfx/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "lapack.hpp"

namespace skinfx {

void normalize_phase(Eigen::Ref<Eigen::VectorXcd> v) {
    v /= v.norm();
    Eigen::Index big = 0;
    double bigAbs = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > bigAbs * (1.0 + 1e-12)) {
            bigAbs = a;
            big = i;
        }
    }
    const cdouble rot = std::conj(v[big]) / std::abs(v[big]);
    v *= rot;
    v[big] = cdouble(v[big].real(), 0.0);
}

SpectralDecomposition eigendecompose(const Eigen::MatrixXd& matrix) {
    const Eigen::Index n = matrix.rows();
    if (matrix.cols() != n) throw ConfigError("eigendecompose needs a square matrix");
    if (n == 0) throw ConfigError("eigendecompose needs a nonempty matrix");
    if (!matrix.allFinite()) throw ConfigError("eigendecompose: non-finite matrix entries");

    const auto ln = static_cast<lapack_int>(n);
    Eigen::MatrixXd work = matrix;
    std::vector<double> wr(static_cast<std::size_t>(n)), wi(static_cast<std::size_t>(n));
    std::vector<double> scale(static_cast<std::size_t>(n)), rconde(static_cast<std::size_t>(n)),
        rcondv(static_cast<std::size_t>(n));
    Eigen::MatrixXd vr(n, n);
    lapack_int ilo = 0, ihi = 0;
    double abnrm = 0.0;
    const lapack_int info =
        LAPACKE_dgeevx(LAPACK_COL_MAJOR, 'B', 'N', 'V', 'N', ln, work.data(), ln, wr.data(), wi.data(), nullptr,
                       ln, vr.data(), ln, &ilo, &ihi, scale.data(), &abnrm, rconde.data(), rcondv.data());
    if (info != 0) {
        std::ostringstream os;
        os << "nonsymmetric eigensolver failed (dgeevx info = " << info << ")";
        throw NumericalError(os.str());
    }

    std::vector<cdouble> values(static_cast<std::size_t>(n));
    Eigen::MatrixXcd vectors(n, n);
    for (Eigen::Index j = 0; j < n;) {
        const auto sj = static_cast<std::size_t>(j);
        if (wi[sj] == 0.0) {
            values[sj] = cdouble(wr[sj], 0.0);
            vectors.col(j) = vr.col(j).cast<cdouble>();
            ++j;
        } else {
            const Eigen::VectorXcd re = vr.col(j).cast<cdouble>();
            const Eigen::VectorXcd im = vr.col(j + 1).cast<cdouble>();
            values[sj] = cdouble(wr[sj], wi[sj]);
            values[sj + 1] = cdouble(wr[sj + 1], wi[sj + 1]);
            vectors.col(j) = re + cdouble(0.0, 1.0) * im;
            vectors.col(j + 1) = re - cdouble(0.0, 1.0) * im;
            j += 2;
        }
    }

    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a].real() != values[b].real()) return values[a].real() < values[b].real();
        return values[a].imag() < values[b].imag();
    });

    SpectralDecomposition out;
    out.frobenius = matrix.norm();
    out.eigenvalues.resize(static_cast<std::size_t>(n));
    out.eigenvectors.resize(n, n);
    const Eigen::MatrixXcd a = matrix.cast<cdouble>();
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto col = static_cast<Eigen::Index>(r);
        out.eigenvalues[r] = values[order[r]];
        out.eigenvectors.col(col) = vectors.col(static_cast<Eigen::Index>(order[r]));
        normalize_phase(out.eigenvectors.col(col));
        const double res = (a * out.eigenvectors.col(col) - out.eigenvalues[r] * out.eigenvectors.col(col)).norm();
        if (!(res <= 1e-8 * out.frobenius)) {
            std::ostringstream os;
            os << "eigenpair " << r << " residual " << res << " exceeds 1e-8 * ||A||_F";
            throw NumericalError(os.str());
        }
    }
    return out;
}

SpectralDecomposition eigendecompose(const GaugeCapacitanceMatrix& matrix) {
    SpectralDecomposition d = eigendecompose(matrix.entries);
    d.sourceKind = matrix.kind;
    d.bandwidth = matrix.bandwidth;
    return d;
}

cdouble resonant_frequency(cdouble lambda) {
    // +0.0 imaginary part puts the negative real axis on the upper side of the cut.
    if (lambda.imag() == 0.0) lambda = cdouble(lambda.real(), 0.0);
    cdouble w = std::sqrt(lambda);
    if (w.real() < 0.0) w = -w;
    return w;
}

std::vector<cdouble> resonant_frequencies(const SpectralDecomposition& decomp) {
    std::vector<cdouble> out;
    out.reserve(decomp.size());
    for (const auto& l : decomp.eigenvalues) out.push_back(resonant_frequency(l));
    return out;
}

double residual(const Eigen::MatrixXd& matrix, cdouble lambda, const Eigen::VectorXcd& v) {
    if (v.size() != matrix.cols()) throw ConfigError("residual: vector length does not match matrix");
    const double nv = v.norm();
    if (!(nv > 0.0)) throw ConfigError("residual of the zero vector is undefined");
    return (matrix.cast<cdouble>() * v - lambda * v).norm() / nv;
}

double vector_angle(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    if (a.size() != b.size()) throw ConfigError("vector_angle: length mismatch");
    const double na = a.norm(), nb = b.norm();
    if (!(na > 0.0 && nb > 0.0)) throw ConfigError("vector_angle: zero vector");
    const double c = std::min(1.0, std::abs(a.dot(b)) / (na * nb));
    return std::acos(c) * 180.0 / std::numbers::pi;
}

SingularDirection smallest_singular_direction(const Eigen::MatrixXd& matrix, cdouble lambda) {
    const Eigen::Index n = matrix.rows();
    if (matrix.cols() != n || n == 0) throw ConfigError("smallest_singular_direction needs a square matrix");
    Eigen::MatrixXcd a = matrix.cast<cdouble>();
    a.diagonal().array() -= lambda;
    const auto ln = static_cast<lapack_int>(n);
    std::vector<double> s(static_cast<std::size_t>(n)), superb(static_cast<std::size_t>(n));
    Eigen::MatrixXcd vt(n, n);
    const lapack_int info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'N', 'A', ln, ln, a.data(), ln, s.data(), nullptr, 1,
                                           vt.data(), ln, superb.data());
    if (info != 0) {
        std::ostringstream os;
        os << "complex SVD failed (zgesvd info = " << info << ")";
        throw NumericalError(os.str());
    }
    SingularDirection out;
    out.sigmaMin = s.back();
    out.v = vt.row(n - 1).adjoint();
    normalize_phase(out.v);
    return out;
}

std::vector<cdouble> polynomial_roots(const std::vector<cdouble>& ascending) {
    if (ascending.size() < 2) return {};
    const cdouble lead = ascending.back();
    if (lead == cdouble(0.0)) throw ConfigError("polynomial leading coefficient is zero");
    const auto deg = static_cast<Eigen::Index>(ascending.size() - 1);
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(deg, deg);
    for (Eigen::Index i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    for (Eigen::Index i = 0; i < deg; ++i) comp(i, deg - 1) = -ascending[static_cast<std::size_t>(i)] / lead;
    const auto ln = static_cast<lapack_int>(deg);
    std::vector<cdouble> roots(static_cast<std::size_t>(deg));
    const lapack_int info =
        LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', ln, comp.data(), ln, roots.data(), nullptr, 1, nullptr, 1);
    if (info != 0) {
        std::ostringstream os;
        os << "companion eigensolver failed (zgeev info = " << info << ")";
        throw NumericalError(os.str());
    }
    return roots;
}

}  // namespace skinfx
