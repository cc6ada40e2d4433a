#include "skinfx/pseudomodes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/trigamma.hpp>

#include "skinfx/numeric.hpp"
#include "skinfx/spectra.hpp"

namespace skinfx {

int RootSet::total() const { return std::accumulate(multiplicity.begin(), multiplicity.end(), 0); }

const char* to_string(ModeSide side) { return side == ModeSide::left ? "left" : "right"; }

RootSet laurent_roots(const SymbolCoefficients& coeffs, cdouble lambda, double r) {
    if (!(r > 0.0)) throw ConfigError("root radius must be positive");
    int l = coeffs.halfBandwidth;
    while (l > 1 && coeffs.at(l - 1) == 0.0 && coeffs.at(-(l - 1)) == 0.0) --l;
    if (l == 1) throw ConfigError("symbol is constant; z^{l-1}(f - lambda) has no roots");
    if (coeffs.at(l - 1) == 0.0 || coeffs.at(-(l - 1)) == 0.0)
        throw ConfigError("degenerate band: outermost coefficients a_{l-1}, a_{-(l-1)} must both be nonzero");

    std::vector<cdouble> poly(static_cast<std::size_t>(2 * l - 1));
    for (int j = -(l - 1); j <= l - 1; ++j) poly[static_cast<std::size_t>(j + l - 1)] = coeffs.at(j);
    poly[static_cast<std::size_t>(l - 1)] -= lambda;
    const std::vector<cdouble> raw = polynomial_roots(poly);

    // Vieta: lead * prod (z - z_i) against the actual coefficients.
    std::vector<cdouble> recon{poly.back()};
    for (const auto& z : raw) {
        std::vector<cdouble> next(recon.size() + 1, 0.0);
        for (std::size_t q = 0; q < recon.size(); ++q) {
            next[q + 1] += recon[q];
            next[q] -= z * recon[q];
        }
        recon = std::move(next);
    }
    double scale = 0.0, err = 0.0;
    for (std::size_t q = 0; q < poly.size(); ++q) {
        scale = std::max(scale, std::abs(poly[q]));
        err = std::max(err, std::abs(recon[q] - poly[q]));
    }

    RootSet out;
    out.poleOrder = l - 1;
    out.radius = r;
    out.vietaError = err / scale;
    for (const auto& z : raw) {
        bool merged = false;
        for (std::size_t c = 0; c < out.roots.size(); ++c) {
            const cdouble rep = out.roots[c];
            if (std::abs(z - rep) <= kRootClusterTolerance * std::max(1.0, std::abs(rep))) {
                const int m = out.multiplicity[c];
                out.roots[c] = (rep * static_cast<double>(m) + z) / static_cast<double>(m + 1);
                out.multiplicity[c] = m + 1;
                merged = true;
                break;
            }
        }
        if (!merged) {
            out.roots.push_back(z);
            out.multiplicity.push_back(1);
        }
    }
    for (std::size_t c = 0; c < out.roots.size(); ++c)
        if (std::abs(out.roots[c]) < r) out.interiorCount += out.multiplicity[c];
    return out;
}

namespace {

std::vector<double> localized_magnitudes(const Eigen::VectorXcd& v, ModeSide side) {
    std::vector<double> a(static_cast<std::size_t>(v.size()));
    for (Eigen::Index j = 0; j < v.size(); ++j) {
        const Eigen::Index src = side == ModeSide::left ? j : v.size() - 1 - j;
        a[static_cast<std::size_t>(j)] = std::abs(v[src]);
    }
    return a;
}

// Binomial coefficient as a double; exact for the small orders used here.
double binomial(int n, int s) {
    if (s < 0 || s > n) return 0.0;
    double b = 1.0;
    for (int t = 1; t <= s; ++t) b = b * (n - s + t) / t;
    return b;
}

}  // namespace

double fitted_decay_rate(const Eigen::VectorXcd& v, ModeSide side) {
    const std::vector<double> a = localized_magnitudes(v, side);
    const double mx = *std::max_element(a.begin(), a.end());
    if (!(mx > 0.0)) throw ConfigError("decay rate of the zero vector is undefined");
    std::vector<double> x, y;
    for (std::size_t j = 0; j < a.size(); ++j)
        if (a[j] > 1e-13 * mx) {
            x.push_back(static_cast<double>(j));
            y.push_back(std::log(a[j]));
        }
    if (x.size() < 2) return 0.0;
    return std::exp(fit_line(x, y).slope);
}

double envelope_constant(const Eigen::VectorXcd& v, ModeSide side, double rho) {
    if (!(rho > 0.0)) throw ConfigError("envelope rate must be positive");
    const std::vector<double> a = localized_magnitudes(v, side);
    const double mx = *std::max_element(a.begin(), a.end());
    double c = 0.0;
    const double lr = std::log(rho);
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (a[j] == 0.0) continue;
        c = std::max(c, std::exp(std::log(a[j] / mx) - lr * static_cast<double>(j)));
    }
    return c;
}

PseudoMode construct_pseudomode(const Eigen::MatrixXd& banded, const SymbolCoefficients& coeffs, cdouble lambda,
                                double r) {
    const Eigen::Index n = banded.rows();
    if (banded.cols() != n) throw ConfigError("construct_pseudomode needs a square matrix");
    const int k = coeffs.halfBandwidth;
    if (n < 2 * k) throw ConfigError("construct_pseudomode needs N >= 2k");

    const int winding = winding_number(coeffs, lambda);
    if (winding == 0) {
        std::ostringstream os;
        os << "no decaying pseudomode at lambda = " << lambda << ": winding number is zero";
        throw ConfigError(os.str());
    }
    // With entry(i, j) = a_{i-j}, v_q = z^q solves the interior rows when
    // sum_m a_m z^{-m} = lambda. Negative winding puts l such roots inside
    // the disk for the matrix itself; positive winding does so for the
    // index-reversed matrix.
    const ModeSide side = winding < 0 ? ModeSide::left : ModeSide::right;
    const SymbolCoefficients rootSymbol = side == ModeSide::left ? coeffs.reversed() : coeffs;
    const Eigen::MatrixXd oriented = side == ModeSide::left ? banded : Eigen::MatrixXd(banded.reverse());

    const RootSet roots = laurent_roots(rootSymbol, lambda, r);
    const int l = roots.poleOrder + 1;

    std::vector<std::size_t> order(roots.roots.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(roots.roots[a]) < std::abs(roots.roots[b]); });
    std::vector<std::pair<cdouble, int>> chosen;
    int count = 0;
    for (std::size_t c : order) {
        if (count == l || !(std::abs(roots.roots[c]) < r)) break;
        const int take = std::min(roots.multiplicity[c], l - count);
        chosen.emplace_back(roots.roots[c], take);
        count += take;
    }
    if (count < l) {
        std::ostringstream os;
        os << "only " << count << " symbol roots inside |z| < " << r << ", need " << l;
        throw NumericalError(os.str());
    }

    // Confluent Vandermonde basis, each column scaled by its largest entry.
    Eigen::MatrixXcd u(n, l);
    Eigen::Index col = 0;
    for (const auto& [z, m] : chosen)
        for (int s = 0; s < m; ++s, ++col) {
            for (Eigen::Index q = 0; q < n; ++q)
                u(q, col) = q < s ? cdouble(0.0) : binomial(static_cast<int>(q), s) * std::pow(z, static_cast<int>(q) - s);
            const double mx = u.col(col).cwiseAbs().maxCoeff();
            if (mx > 0.0) u.col(col) /= mx;
        }

    const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(u);
    const Eigen::VectorXd rdiag = qr.matrixQR().diagonal().head(l).cwiseAbs();
    const double cond = rdiag.maxCoeff() / rdiag.minCoeff();
    if (!(rdiag.minCoeff() > 1e-14 * rdiag.maxCoeff())) {
        std::ostringstream os;
        os << "Vandermonde basis is numerically rank deficient (condition estimate " << cond << ")";
        throw NumericalError(os.str());
    }
    const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, l);

    Eigen::MatrixXcd shifted = -oriented.cast<cdouble>();
    shifted.diagonal().array() += lambda;
    const Eigen::MatrixXcd image = shifted * q;

    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(l);
    if (l == 1) {
        c[0] = 1.0;
    } else {
        const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(image.topRows(l - 1), Eigen::ComputeFullV);
        c = svd.matrixV().col(l - 1);
    }
    Eigen::VectorXcd v = q * c;
    if (side == ModeSide::right) v.reverseInPlace();
    normalize_phase(v);

    PseudoMode mode;
    mode.lambda = lambda;
    mode.vector = std::move(v);
    mode.residualBanded = residual(banded, lambda, mode.vector);
    mode.side = side;
    mode.winding = winding;
    mode.bandwidth = k;
    mode.n = static_cast<std::size_t>(n);
    mode.basisCondition = cond;
    mode.decayRate = fitted_decay_rate(mode.vector, side);
    if (mode.decayRate > 0.0) mode.envelopeConstant = envelope_constant(mode.vector, side, mode.decayRate);
    return mode;
}

PseudoMode construct_pseudomode(const GaugeCapacitanceMatrix& banded, const SymbolCoefficients& coeffs,
                                cdouble lambda, double r) {
    return construct_pseudomode(banded.entries, coeffs, lambda, r);
}

double bandwidth_tail_bound(int k, double tolerance) {
    if (k < 1) throw ConfigError("bandwidth k must be >= 1");
    if (!(tolerance > 0.0)) throw ConfigError("tail tolerance must be positive");
    // Term j is at most (2k-1)^2 / (j+2-k)^4, so the tail past J is at most
    // (2k-1)^2 / (3 (M-1)^3) with M = J + 3 - k.
    const double w = 2.0 * k - 1.0;
    const double mMinus1 = std::ceil(std::cbrt(w * w / (3.0 * tolerance)));
    const long J = std::max(static_cast<long>(k) + 1, static_cast<long>(mMinus1) + k - 2);
    const double remainder = w * w / (3.0 * std::pow(static_cast<double>(J + 2 - k), 3));
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(J - k));
    for (long j = k + 1; j <= J; ++j) {
        double xi = 0.0;
        for (long q = j + 2 - k; q <= j + k; ++q) xi += 1.0 / static_cast<double>(q);
        terms.push_back(xi * xi / ((1.0 + j) * (1.0 + j)));
    }
    return pairwise_sum(terms) + remainder;
}

int choose_bandwidth(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("choose_bandwidth needs 0 < epsilon < 1");
    for (int k = 1; k < 10'000'000; ++k) {
        if (1.0 / k > epsilon) continue;
        if (bandwidth_tail_bound(k, epsilon * 1e-5) <= epsilon) return k;
    }
    throw NumericalError("choose_bandwidth did not terminate");
}

double transfer_epsilon1(int k) {
    if (k < 1) throw ConfigError("bandwidth k must be >= 1");
    return std::max(1.0 / k, boost::math::trigamma(static_cast<double>(k)));
}

double fitted_decay_constant(const Eigen::MatrixXd& matrix, int k) {
    if (k < 1) throw ConfigError("bandwidth k must be >= 1");
    double dk = 0.0;
    for (Eigen::Index i = 0; i < matrix.rows(); ++i)
        for (Eigen::Index j = 0; j < matrix.cols(); ++j)
            if (std::abs(i - j) >= k) dk = std::max(dk, std::abs(matrix(i, j)) * static_cast<double>(std::abs(i - j)));
    return dk;
}

TransferCheck verify_transfer(const Eigen::MatrixXd& full, PseudoMode& mode) {
    if (full.rows() != mode.vector.size()) throw ConfigError("mode length does not match the matrix");
    TransferCheck t;
    t.epsilon1 = transfer_epsilon1(mode.bandwidth);
    t.epsilon2 = mode.residualBanded;
    t.rho = mode.decayRate;
    t.envelopeConstant = mode.envelopeConstant;
    t.deltaK = fitted_decay_constant(full, mode.bandwidth);
    t.residualFull = residual(full, mode.lambda, mode.vector);
    mode.residualFull = t.residualFull;
    t.hypothesisHolds = t.rho > 0.0 && t.rho < 1.0 - t.epsilon1;
    if (t.deltaK == 0.0) {
        // Nothing outside the band: the full matrix is the banded one.
        t.budget = t.epsilon2;
    } else if (t.hypothesisHolds) {
        const double e1 = t.epsilon1;
        const double rho = t.rho;
        t.budget = t.epsilon2 + t.deltaK * t.envelopeConstant *
                                    ((1.0 - e1) / (1.0 - e1 - rho) * std::sqrt(e1) +
                                     e1 * std::pow(rho, mode.bandwidth) / ((1.0 - rho) * std::sqrt(1.0 - rho * rho)));
    } else {
        t.budget = std::numeric_limits<double>::infinity();
    }
    t.withinBudget = std::isfinite(t.budget) && t.residualFull <= t.budget;
    return t;
}

TransferCheck verify_transfer(const GaugeCapacitanceMatrix& full, PseudoMode& mode) {
    return verify_transfer(full.entries, mode);
}

}  // namespace skinfx
