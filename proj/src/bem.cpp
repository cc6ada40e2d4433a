#include "skinfx/bem.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <utility>

#include "skinfx/harmonics.hpp"

namespace skinfx {

void BasisSpec::validate() const {
    if (maxDegree < 0) throw ConfigError("basis maxDegree must be >= 0");
    if (quadratureOrder < maxDegree + 1)
        throw ConfigError("basis quadratureOrder must be at least maxDegree + 1");
}

std::size_t SingleLayerSystem::unknown(std::size_t sphere, int l, int m) const {
    return sphere * static_cast<std::size_t>(basis.per_sphere()) +
           static_cast<std::size_t>(harmonic_index(l, m));
}

std::string to_string(MatrixKind kind) {
    switch (kind) {
        case MatrixKind::plain: return "plain";
        case MatrixKind::gauge: return "gauge";
        case MatrixKind::banded: return "banded";
    }
    return "gauge";
}

MatrixKind matrix_kind_from_string(const std::string& s) {
    if (s == "plain") return MatrixKind::plain;
    if (s == "gauge") return MatrixKind::gauge;
    if (s == "banded") return MatrixKind::banded;
    throw ConfigError("unknown matrix kind '" + s + "'");
}

int cross_quadrature_order(double radius, double centerDistance, const BasisSpec& basis) {
    // The source field seen from the target sphere has harmonic content
    // decaying like (R/d)^n; pick the exact degree so the first neglected
    // term is below double precision.
    const double t = radius / centerDistance;
    const int L = basis.maxDegree;
    const double digits = -std::log10(t);
    const int degree = 2 * L + static_cast<int>(std::ceil(17.0 / std::max(digits, 1e-3)));
    const int order = (degree + 2) / 2;
    return std::clamp(order, L + 1, basis.quadratureOrder);
}

std::optional<std::pair<std::size_t, std::size_t>> too_close_pair(const SphereLayout& layout) {
    const double r = layout.radius();
    for (std::size_t i = 0; i < layout.size(); ++i)
        for (std::size_t j = i + 1; j < layout.size(); ++j)
            if (layout.gap(i, j) < kMinGapFraction * r) return std::pair{i, j};
    return std::nullopt;
}

namespace {

void check_separation(const SphereLayout& layout) {
    if (const auto pair = too_close_pair(layout)) {
        const auto [i, j] = *pair;
        std::ostringstream os;
        os << "spheres " << i << " and " << j << " are too close for the boundary solver: gap "
           << layout.gap(i, j) << " < " << kMinGapFraction << " * radius";
        throw ConfigError(os.str());
    }
}

// Harmonic values at every node of a rule, node-major.
std::vector<double> tabulate(const SphereRule& rule, int L) {
    const auto nb = static_cast<std::size_t>(harmonic_count(L));
    std::vector<double> out(rule.size() * nb);
    for (std::size_t q = 0; q < rule.size(); ++q)
        real_harmonics(L, rule.nodes[q], std::span<double>(out.data() + q * nb, nb));
    return out;
}

struct RuleCache {
    std::map<int, std::pair<SphereRule, std::vector<double>>> rules;
    int L;

    explicit RuleCache(int maxDegree) : L(maxDegree) {}

    const std::pair<SphereRule, std::vector<double>>& get(int order) {
        auto it = rules.find(order);
        if (it == rules.end()) {
            SphereRule rule = sphere_rule(order);
            std::vector<double> table = tabulate(rule, L);
            it = rules.emplace(order, std::make_pair(std::move(rule), std::move(table))).first;
        }
        return it->second;
    }
};

Eigen::MatrixXd block_with_rule(const Vec3& target, const Vec3& source, double radius, int L,
                                const SphereRule& rule, const std::vector<double>& table) {
    const int nb = harmonic_count(L);
    const auto nbs = static_cast<std::size_t>(nb);
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(nb, nb);
    std::vector<double> field(nbs);
    std::vector<double> yFar(nbs);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec3& n = rule.nodes[q];
        const Vec3 x{target[0] + radius * n[0], target[1] + radius * n[1], target[2] + radius * n[2]};
        const Vec3 rel{x[0] - source[0], x[1] - source[1], x[2] - source[2]};
        const double rho = std::sqrt(rel[0] * rel[0] + rel[1] * rel[1] + rel[2] * rel[2]);
        const Vec3 dir{rel[0] / rho, rel[1] / rho, rel[2] / rho};
        real_harmonics(L, dir, yFar);
        // Exterior potential of the single layer with density Y_lm on the source sphere.
        const double t = radius / rho;
        double tp = t;
        for (int l = 0; l <= L; ++l) {
            const double c = -radius / (2.0 * l + 1.0) * tp;
            for (int m = -l; m <= l; ++m) {
                const auto k = static_cast<std::size_t>(harmonic_index(l, m));
                field[k] = c * yFar[k];
            }
            tp *= t;
        }
        const double w = rule.weights[q];
        const double* yNear = table.data() + q * nbs;
        for (int a = 0; a < nb; ++a) {
            const double wy = w * yNear[a];
            for (int b = 0; b < nb; ++b) block(a, b) += wy * field[static_cast<std::size_t>(b)];
        }
    }
    return block;
}

void fill_self_blocks(Eigen::MatrixXd& a, std::size_t n, int L, double radius) {
    const int nb = harmonic_count(L);
    for (std::size_t i = 0; i < n; ++i)
        for (int l = 0; l <= L; ++l)
            for (int m = -l; m <= l; ++m) {
                const auto k = static_cast<Eigen::Index>(i) * nb + harmonic_index(l, m);
                a(k, k) = -radius / (2.0 * l + 1.0);
            }
}

}  // namespace

Eigen::MatrixXd interaction_block(const Vec3& target, const Vec3& source, double radius,
                                  const BasisSpec& basis) {
    basis.validate();
    const double d = distance(target, source);
    if (d <= 2.0 * radius) throw ConfigError("interaction_block requires disjoint spheres");
    const SphereRule rule = sphere_rule(cross_quadrature_order(radius, d, basis));
    return block_with_rule(target, source, radius, basis.maxDegree, rule,
                           tabulate(rule, basis.maxDegree));
}

SingleLayerSystem assemble_single_layer_serial(const SphereLayout& layout, const BasisSpec& basis) {
    basis.validate();
    check_separation(layout);
    const std::size_t n = layout.size();
    const int L = basis.maxDegree;
    const int nb = basis.per_sphere();
    const auto dim = static_cast<Eigen::Index>(n) * nb;
    SingleLayerSystem sys{Eigen::MatrixXd::Zero(dim, dim), basis, layout};
    fill_self_blocks(sys.matrix, n, L, layout.radius());
    RuleCache cache(L);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = layout.pair_distance(i, j);
            const auto& [rule, table] = cache.get(cross_quadrature_order(layout.radius(), d, basis));
            sys.matrix.block(static_cast<Eigen::Index>(i) * nb, static_cast<Eigen::Index>(j) * nb, nb, nb) =
                block_with_rule(layout.center(i), layout.center(j), layout.radius(), L, rule, table);
        }
    return sys;
}

SingleLayerSystem assemble_single_layer(const SphereLayout& layout, const BasisSpec& basis) {
    basis.validate();
    check_separation(layout);
    const std::size_t n = layout.size();
    const int L = basis.maxDegree;
    const int nb = basis.per_sphere();
    const auto dim = static_cast<Eigen::Index>(n) * nb;
    SingleLayerSystem sys{Eigen::MatrixXd::Zero(dim, dim), basis, layout};
    fill_self_blocks(sys.matrix, n, L, layout.radius());
    if (n < 2) return sys;

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(n * (n - 1) / 2);
    std::vector<int> orders;
    orders.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            pairs.emplace_back(i, j);
            orders.push_back(cross_quadrature_order(layout.radius(), layout.pair_distance(i, j), basis));
        }

    // Rules are built up front so the parallel region only reads them.
    RuleCache cache(L);
    for (int o : orders) cache.get(o);

    const auto count = static_cast<std::ptrdiff_t>(pairs.size());
    Eigen::MatrixXd& a = sys.matrix;
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t p = 0; p < count; ++p) {
        const auto [i, j] = pairs[static_cast<std::size_t>(p)];
        const auto& entry = cache.rules.at(orders[static_cast<std::size_t>(p)]);
        const Eigen::MatrixXd blk =
            block_with_rule(layout.center(i), layout.center(j), layout.radius(), L, entry.first, entry.second);
        const auto ri = static_cast<Eigen::Index>(i) * nb;
        const auto rj = static_cast<Eigen::Index>(j) * nb;
        a.block(ri, rj, nb, nb) = blk;
        a.block(rj, ri, nb, nb) = blk.transpose();
    }
    return sys;
}

DensitySet solve_densities(const SingleLayerSystem& system) {
    const std::size_t n = system.layout.size();
    const int nb = system.basis.per_sphere();
    auto singular = [&](const std::string& why) {
        std::ostringstream os;
        os << "single-layer system is singular (" << why << ")";
        if (n >= 2) {
            const auto [a, b] = system.layout.closest_pair();
            os << "; closest spheres " << a << " and " << b << " at center distance "
               << system.layout.pair_distance(a, b);
        }
        return NumericalError(os.str());
    };

    // -S is symmetric positive definite on the span of the basis.
    const Eigen::LLT<Eigen::MatrixXd> llt(-system.matrix);
    if (llt.info() != Eigen::Success) throw singular("Cholesky factorization failed");
    const double rcond = llt.rcond();
    if (!(rcond > 1e-13)) throw singular("reciprocal condition " + std::to_string(rcond));

    const double rhs = std::sqrt(4.0 * std::numbers::pi);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(system.matrix.rows(), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j)
        b(static_cast<Eigen::Index>(j) * nb, static_cast<Eigen::Index>(j)) = -rhs;
    Eigen::MatrixXd x = llt.solve(b);
    if (!x.allFinite()) throw singular("non-finite density");

    return DensitySet{std::move(x), system.basis, system.layout.hash(), rcond};
}

GaugeCapacitanceMatrix plain_capacitance(const DensitySet& densities, const SphereLayout& layout) {
    if (densities.layoutHash != layout.hash()) throw ConfigError("densities were computed for a different layout");
    const std::size_t n = layout.size();
    const int nb = densities.basis.per_sphere();
    const double r2 = layout.radius() * layout.radius();
    const double s = std::sqrt(4.0 * std::numbers::pi);
    GaugeCapacitanceMatrix out;
    out.kind = MatrixKind::plain;
    out.entries.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                -r2 * s * densities.coefficients(static_cast<Eigen::Index>(i) * nb, static_cast<Eigen::Index>(j));
    out.gamma.assign(n, 0.0);
    out.contrast.assign(n, 1.0);
    out.basis = densities.basis;
    out.layoutHash = layout.hash();
    return out;
}

double centered_gauge_volume(double gamma, double radius) {
    const double x = gamma * radius;
    if (std::abs(x) < 0.5) {
        // 4 pi R^3 sum_n x^{2n} / ((2n)! (2n+1)(2n+3))
        double term = 1.0;  // x^{2n}/(2n)!
        double sum = 0.0;
        for (int k = 0; k < 40; ++k) {
            const double c = term / ((2.0 * k + 1.0) * (2.0 * k + 3.0));
            sum += c;
            if (std::abs(c) < 1e-18 * std::abs(sum)) break;
            term *= x * x / ((2.0 * k + 1.0) * (2.0 * k + 2.0));
        }
        return 4.0 * std::numbers::pi * radius * radius * radius * sum;
    }
    return 4.0 * std::numbers::pi * (x * std::cosh(x) - std::sinh(x)) / (gamma * gamma * gamma);
}

double gauge_weight_volume(double gamma, double radius, const Vec3& center) {
    return std::exp(gamma * center[0]) * centered_gauge_volume(gamma, radius);
}

GaugeCapacitanceMatrix gauge_capacitance(const DensitySet& densities, const SphereLayout& layout,
                                         const MaterialParams& params) {
    if (densities.layoutHash != layout.hash()) throw ConfigError("densities were computed for a different layout");
    const std::size_t n = layout.size();
    params.validate(n);
    const int L = densities.basis.maxDegree;
    const int nb = densities.basis.per_sphere();
    const double r = layout.radius();

    // Moments of exp(gamma R n1) against the harmonics, keyed by gamma.
    const SphereRule rule = sphere_rule(densities.basis.quadratureOrder);
    const std::vector<double> table = tabulate(rule, L);
    std::map<double, Eigen::VectorXd> moments;
    auto moment = [&](double g) -> const Eigen::VectorXd& {
        auto it = moments.find(g);
        if (it != moments.end()) return it->second;
        Eigen::VectorXd w = Eigen::VectorXd::Zero(nb);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double e = rule.weights[q] * std::exp(g * r * rule.nodes[q][0]);
            const double* y = table.data() + q * static_cast<std::size_t>(nb);
            for (int k = 0; k < nb; ++k) w[k] += e * y[k];
        }
        return moments.emplace(g, std::move(w)).first->second;
    };

    GaugeCapacitanceMatrix out;
    out.kind = MatrixKind::gauge;
    out.entries.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    out.gamma.resize(n);
    out.contrast.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double g = params.gamma_at(i);
        out.gamma[i] = g;
        out.contrast[i] = params.contrast_weight(i);
        const Eigen::VectorXd& w = moment(g);
        const double pre = -out.contrast[i] * r * r / centered_gauge_volume(g, r);
        const auto row = densities.coefficients.middleRows(static_cast<Eigen::Index>(i) * nb, nb);
        out.entries.row(static_cast<Eigen::Index>(i)) = pre * (w.transpose() * row);
    }
    out.basis = densities.basis;
    out.layoutHash = layout.hash();
    return out;
}

GaugeCapacitanceMatrix k_banded(const GaugeCapacitanceMatrix& matrix, int k) {
    if (k < 1) throw ConfigError("bandwidth k must be >= 1");
    GaugeCapacitanceMatrix out = matrix;
    const Eigen::Index n = out.entries.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (std::abs(i - j) >= k) out.entries(i, j) = 0.0;
    out.kind = MatrixKind::banded;
    out.bandwidth = k;
    return out;
}

GaugeCapacitanceMatrix compute_gauge_capacitance(const SphereLayout& layout, const MaterialParams& params,
                                                 const BasisSpec& basis) {
    const SingleLayerSystem sys = assemble_single_layer(layout, basis);
    return gauge_capacitance(solve_densities(sys), layout, params);
}

}  // namespace skinfx
