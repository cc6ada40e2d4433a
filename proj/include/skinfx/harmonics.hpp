#pragma once

#include <span>
#include <vector>

#include "skinfx/geometry.hpp"

namespace skinfx {

/// Number of real spherical harmonics with degree <= maxDegree.
constexpr int harmonic_count(int maxDegree) noexcept { return (maxDegree + 1) * (maxDegree + 1); }
/// Flat index of Y_lm, -l <= m <= l.
constexpr int harmonic_index(int l, int m) noexcept { return l * l + l + m; }

/// Real orthonormal spherical harmonics (polar axis = coordinate 2) evaluated at a
/// unit direction. m > 0 carries cos(m phi), m < 0 carries sin(|m| phi).
/// `out` must hold harmonic_count(maxDegree) values.
void real_harmonics(int maxDegree, const Vec3& unitDir, std::span<double> out);

struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton on the Legendre recurrence).
GaussLegendre gauss_legendre(int n);

/// Product rule on the unit sphere: Gauss-Legendre in cos(theta) with polarOrder
/// nodes, trapezoid in phi with 2*polarOrder nodes. Weights sum to 4*pi and the
/// rule integrates every harmonic of degree <= 2*polarOrder - 1 exactly.
struct SphereRule {
    int polarOrder = 0;
    std::vector<Vec3> nodes;
    std::vector<double> weights;

    std::size_t size() const noexcept { return nodes.size(); }
    int exact_degree() const noexcept { return 2 * polarOrder - 1; }
};

SphereRule sphere_rule(int polarOrder);

}  // namespace skinfx
