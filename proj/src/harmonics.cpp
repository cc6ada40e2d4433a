#include "skinfx/harmonics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "skinfx/errors.hpp"

namespace skinfx {

void real_harmonics(int maxDegree, const Vec3& u, std::span<double> out) {
    // Normalized associated Legendre functions divided by sin^m(theta), so the
    // azimuthal factor sin^m(theta) * {cos, sin}(m phi) = {Re, Im}(x + i y)^m
    // stays regular at the poles.
    const double z = u[2];
    const int L = maxDegree;
    double re = 1.0;  // Re (x + i y)^m
    double im = 0.0;  // Im (x + i y)^m
    double qmm = 1.0 / std::sqrt(4.0 * std::numbers::pi);
    for (int m = 0; m <= L; ++m) {
        if (m > 0) {
            qmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m));
            const double nre = re * u[0] - im * u[1];
            im = re * u[1] + im * u[0];
            re = nre;
        }
        const double azc = (m == 0) ? 1.0 : std::numbers::sqrt2 * re;
        const double azs = std::numbers::sqrt2 * im;

        double qlm2 = 0.0;
        double qlm1 = qmm;
        for (int l = m; l <= L; ++l) {
            double q;
            if (l == m) {
                q = qmm;
            } else if (l == m + 1) {
                q = std::sqrt(2.0 * m + 3.0) * z * qmm;
            } else {
                const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - m * m));
                const double b = std::sqrt((static_cast<double>(l - 1) * (l - 1) - m * m) /
                                           (4.0 * (l - 1) * (l - 1) - 1.0));
                q = a * (z * qlm1 - b * qlm2);
            }
            if (l > m) {
                qlm2 = qlm1;
                qlm1 = q;
            }
            out[static_cast<std::size_t>(harmonic_index(l, m))] = q * azc;
            if (m > 0) out[static_cast<std::size_t>(harmonic_index(l, -m))] = q * azs;
        }
    }
}

GaussLegendre gauss_legendre(int n) {
    if (n < 1) throw ConfigError("Gauss-Legendre order must be positive");
    GaussLegendre rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Re-evaluate the derivative at the converged node.
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        rule.nodes[lo] = -x;
        rule.nodes[hi] = x;
        rule.weights[lo] = w;
        rule.weights[hi] = w;
    }
    if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return rule;
}

SphereRule sphere_rule(int polarOrder) {
    const GaussLegendre gl = gauss_legendre(polarOrder);
    const int nphi = 2 * polarOrder;
    SphereRule rule;
    rule.polarOrder = polarOrder;
    rule.nodes.reserve(static_cast<std::size_t>(polarOrder * nphi));
    rule.weights.reserve(static_cast<std::size_t>(polarOrder * nphi));
    for (int a = 0; a < polarOrder; ++a) {
        const double ct = gl.nodes[static_cast<std::size_t>(a)];
        const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (int b = 0; b < nphi; ++b) {
            const double phi = 2.0 * std::numbers::pi * (b + 0.5) / nphi;
            rule.nodes.push_back({st * std::cos(phi), st * std::sin(phi), ct});
            rule.weights.push_back(gl.weights[static_cast<std::size_t>(a)] * 2.0 * std::numbers::pi / nphi);
        }
    }
    return rule;
}

}  // namespace skinfx
