#include "skinfx/toeplitz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <sstream>

#include "skinfx/numeric.hpp"

namespace skinfx {

SymbolCoefficients::SymbolCoefficients(int k, std::vector<double> values)
    : halfBandwidth(k), coeffs(std::move(values)) {
    if (k < 1) throw ConfigError("symbol half-bandwidth must be >= 1");
    if (coeffs.size() != static_cast<std::size_t>(2 * k - 1))
        throw ConfigError("symbol needs 2k-1 coefficients");
}

double SymbolCoefficients::at(int j) const {
    if (std::abs(j) >= halfBandwidth) return 0.0;
    return coeffs[static_cast<std::size_t>(j + halfBandwidth - 1)];
}

double& SymbolCoefficients::at(int j) {
    if (std::abs(j) >= halfBandwidth) throw ConfigError("symbol index outside band");
    return coeffs[static_cast<std::size_t>(j + halfBandwidth - 1)];
}

SymbolCoefficients SymbolCoefficients::reversed() const {
    SymbolCoefficients out = *this;
    std::reverse(out.coeffs.begin(), out.coeffs.end());
    return out;
}

double SymbolCoefficients::max_abs() const {
    double m = 0.0;
    for (double a : coeffs) m = std::max(m, std::abs(a));
    return m;
}

SymbolCoefficients coefficients_from_matrix(const Eigen::MatrixXd& matrix, int k, std::size_t center) {
    const auto n = static_cast<std::size_t>(matrix.rows());
    if (matrix.cols() != matrix.rows()) throw ConfigError("matrix must be square");
    if (k < 1) throw ConfigError("bandwidth k must be >= 1");
    const auto kk = static_cast<std::size_t>(k);
    if (center + 1 < kk || center + kk > n) throw ConfigError("center too close to the boundary for bandwidth k");
    SymbolCoefficients out(k, std::vector<double>(static_cast<std::size_t>(2 * k - 1)));
    const auto c = static_cast<Eigen::Index>(center);
    for (int j = -(k - 1); j <= k - 1; ++j) out.at(j) = matrix(c + j, c);
    return out;
}

SymbolCoefficients limit_coefficients(const ChainTemplate& chain, const MaterialParams& params, int k, int R,
                                      const BasisSpec& basis, double tolerance) {
    if (k < 1) throw ConfigError("bandwidth k must be >= 1");
    if (R % 2 == 0) throw ConfigError("limit chain length R must be odd");
    if (R < 4 * k) throw ConfigError("limit chain length R must be at least 4k");
    if (R - 20 < 2 * k - 1) throw ConfigError("limit chain length R too small for the drift comparison");
    if (params.gamma.size() != 1 || params.delta.size() != 1 || params.speedInside.size() != 1)
        throw ConfigError("limit_coefficients needs translation-invariant (scalar) material parameters");

    auto center_column = [&](int len) {
        const SphereLayout layout = build_chain(len, chain.spacing, chain.radius);
        const GaugeCapacitanceMatrix c = compute_gauge_capacitance(layout, params, basis);
        return coefficients_from_matrix(c.entries, k, static_cast<std::size_t>((len - 1) / 2));
    };
    SymbolCoefficients big = center_column(R);
    const SymbolCoefficients small = center_column(R - 20);
    double drift = 0.0;
    for (int j = -(k - 1); j <= k - 1; ++j) drift = std::max(drift, std::abs(big.at(j) - small.at(j)));
    big.drift = drift;
    if (drift > tolerance * big.max_abs()) {
        std::ostringstream os;
        os << "limit chain R = " << R << " too short: coefficient drift " << drift << " exceeds "
           << tolerance << " * max|a_j|";
        throw ConfigError(os.str());
    }
    return big;
}

cdouble evaluate_symbol(const SymbolCoefficients& coeffs, cdouble z) {
    if (z == cdouble(0.0)) throw ConfigError("symbol is undefined at z = 0");
    const int k = coeffs.halfBandwidth;
    cdouble pos = 0.0;
    for (int j = k - 1; j >= 1; --j) pos = (pos + coeffs.at(j)) * z;
    const cdouble w = 1.0 / z;
    cdouble neg = 0.0;
    for (int j = k - 1; j >= 1; --j) neg = (neg + coeffs.at(-j)) * w;
    return coeffs.at(0) + pos + neg;
}

SymbolCurve sample_symbol_curve(const SymbolCoefficients& coeffs, double r, int M) {
    if (!(r > 0.0)) throw ConfigError("symbol curve radius must be positive");
    M = std::max(M, 64 * coeffs.halfBandwidth);
    SymbolCurve curve;
    curve.radius = r;
    curve.theta.resize(static_cast<std::size_t>(M));
    curve.values.resize(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) {
        const double th = 2.0 * std::numbers::pi * m / M;
        curve.theta[static_cast<std::size_t>(m)] = th;
        curve.values[static_cast<std::size_t>(m)] = evaluate_symbol(coeffs, std::polar(r, th));
    }
    return curve;
}

int winding_number(const SymbolCoefficients& coeffs, cdouble lambda, const WindingOptions& opt) {
    const int k = coeffs.halfBandwidth;
    int M = std::max(opt.initialSamples, 64 * k);
    for (;;) {
        const SymbolCurve curve = sample_symbol_curve(coeffs, opt.radius, M);
        const auto& f = curve.values;
        double scale = std::abs(lambda);
        for (const auto& v : f) scale = std::max(scale, std::abs(v));
        double minDist = std::numeric_limits<double>::infinity();
        double maxGap = 0.0;
        double maxStep = 0.0;
        std::vector<double> steps(f.size());
        for (std::size_t m = 0; m < f.size(); ++m) {
            const cdouble a = f[m] - lambda;
            const cdouble b = f[(m + 1) % f.size()] - lambda;
            minDist = std::min(minDist, std::abs(a));
            maxGap = std::max(maxGap, std::abs(b - a));
            steps[m] = std::arg(b / a);
            maxStep = std::max(maxStep, std::abs(steps[m]));
        }
        if (!(minDist > 1e-12 * std::max(scale, 1e-300))) {
            std::ostringstream os;
            os << "winding number undefined: lambda = " << lambda << " lies on the symbol curve";
            throw OnCurveError(os.str());
        }
        if (minDist > 10.0 * maxGap && maxStep < std::numbers::pi / 2) {
            const double turns = pairwise_sum(steps) / (2.0 * std::numbers::pi);
            return static_cast<int>(std::lround(turns));
        }
        if (M >= opt.maxSamples) {
            std::ostringstream os;
            os << "winding number undefined: lambda = " << lambda << " is within " << minDist
               << " of the symbol curve";
            throw OnCurveError(os.str());
        }
        M = std::min(2 * M, opt.maxSamples);
    }
}

namespace {

WindingSample probe(const SymbolCoefficients& coeffs, cdouble lambda, const WindingOptions& opt) {
    try {
        return {lambda, winding_number(coeffs, lambda, opt)};
    } catch (const OnCurveError&) {
        return {lambda, std::nullopt};
    }
}

}  // namespace

std::vector<WindingSample> winding_grid(const SymbolCoefficients& coeffs, const std::vector<cdouble>& probes,
                                        const WindingOptions& opt) {
    std::vector<WindingSample> out(probes.size());
    const auto n = static_cast<std::ptrdiff_t>(probes.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t p = 0; p < n; ++p)
        out[static_cast<std::size_t>(p)] = probe(coeffs, probes[static_cast<std::size_t>(p)], opt);
    return out;
}

std::vector<WindingSample> winding_grid_serial(const SymbolCoefficients& coeffs,
                                               const std::vector<cdouble>& probes, const WindingOptions& opt) {
    std::vector<WindingSample> out;
    out.reserve(probes.size());
    for (const auto& l : probes) out.push_back(probe(coeffs, l, opt));
    return out;
}

std::vector<cdouble> curve_bounding_grid(const SymbolCurve& curve, int nx, int ny) {
    if (nx < 1 || ny < 1 || curve.values.empty()) throw ConfigError("grid needs positive dimensions");
    double x0 = curve.values.front().real(), x1 = x0;
    double y0 = curve.values.front().imag(), y1 = y0;
    for (const auto& v : curve.values) {
        x0 = std::min(x0, v.real());
        x1 = std::max(x1, v.real());
        y0 = std::min(y0, v.imag());
        y1 = std::max(y1, v.imag());
    }
    // Pad by 5% of the larger extent so a degenerate (flat) curve still gets a 2D grid.
    const double pad = 0.05 * std::max({x1 - x0, y1 - y0, 1e-300});
    x0 -= pad;
    x1 += pad;
    y0 -= pad;
    y1 += pad;
    std::vector<cdouble> out;
    out.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix)
            out.emplace_back(x0 + (x1 - x0) * (ix + 0.5) / nx, y0 + (y1 - y0) * (iy + 0.5) / ny);
    return out;
}

DecayFit decay_fit(const Eigen::MatrixXd& matrix) {
    const Eigen::Index n = matrix.rows();
    if (n < 20) throw ConfigError("decay_fit needs N >= 20");
    DecayFit fit;
    fit.center = static_cast<std::size_t>((n - 1) / 2);
    fit.first = 2;
    fit.last = static_cast<int>(n / 2);
    const auto c = static_cast<Eigen::Index>(fit.center);
    std::vector<double> x, y;
    for (int j = fit.first; j <= fit.last; ++j) {
        const double e = std::abs(matrix(c, c + j));
        if (!(e > 0.0)) {
            std::ostringstream os;
            os << "decay_fit: zero entry at offset " << j;
            throw ConfigError(os.str());
        }
        x.push_back(std::log(static_cast<double>(j)));
        y.push_back(std::log(e));
    }
    const LineFit line = fit_line(x, y);
    fit.exponent = -line.slope;
    fit.intercept = line.intercept;
    fit.rSquared = line.rSquared;
    return fit;
}

DecayFit decay_fit(const GaugeCapacitanceMatrix& matrix) { return decay_fit(matrix.entries); }

ToeplitzDeviation toeplitz_deviation(const GaugeCapacitanceMatrix& matrix, const SymbolCoefficients& coeffs) {
    const auto n = static_cast<long>(matrix.size());
    const int k = coeffs.halfBandwidth;
    ToeplitzDeviation out;
    for (long i = 1; i <= n; ++i)
        for (long j = std::max(1L, i - k + 1); j <= std::min(n, i + k - 1); ++j) {
            const double d = std::abs(matrix.entries(i - 1, j - 1) - coeffs.at(static_cast<int>(i - j)));
            const double w = static_cast<double>(1 + std::min(i, n - i)) * static_cast<double>(1 + std::min(j, n - j));
            const double v = d * w / matrix.delta();
            if (v > out.constant) {
                out.constant = v;
                out.row = static_cast<std::size_t>(i - 1);
                out.col = static_cast<std::size_t>(j - 1);
            }
        }
    return out;
}

Eigen::MatrixXd toeplitz_matrix(const SymbolCoefficients& coeffs, std::size_t n) {
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nn, nn);
    for (Eigen::Index i = 0; i < nn; ++i)
        for (Eigen::Index j = 0; j < nn; ++j) a(i, j) = coeffs.at(static_cast<int>(i - j));
    return a;
}

}  // namespace skinfx
