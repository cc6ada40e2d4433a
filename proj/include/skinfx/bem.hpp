#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "skinfx/geometry.hpp"

namespace skinfx {

/// Per-sphere discretization: real spherical harmonics up to maxDegree for the
/// density, and the polar order of the product surface rule used for the
/// cross-sphere projections. quadratureOrder is an upper bound; well separated
/// pairs use fewer nodes.
struct BasisSpec {
    int maxDegree = 4;
    int quadratureOrder = 24;

    int per_sphere() const noexcept { return (maxDegree + 1) * (maxDegree + 1); }
    void validate() const;
};

/// Projected single-layer operator on the union of spheres.
///
/// Unknowns are the coefficients of the density on each sphere in the real
/// harmonic basis; equations are the projections of the potential onto the
/// same harmonics (unit-sphere measure). The self block is diagonal with
/// entries -R/(2l+1); with equal radii the whole matrix is symmetric.
struct SingleLayerSystem {
    Eigen::MatrixXd matrix;
    BasisSpec basis;
    SphereLayout layout;

    std::size_t unknown(std::size_t sphere, int l, int m) const;
};

/// Solutions psi_j of S psi_j = chi_j, one column per source sphere j.
struct DensitySet {
    Eigen::MatrixXd coefficients;
    BasisSpec basis;
    std::uint64_t layoutHash = 0;
    /// Reciprocal condition number estimate of the factored system.
    double rcond = 0.0;
};

enum class MatrixKind { plain, gauge, banded };

std::string to_string(MatrixKind kind);
MatrixKind matrix_kind_from_string(const std::string& s);

/// Dense N x N capacitance-type matrix plus provenance.
struct GaugeCapacitanceMatrix {
    Eigen::MatrixXd entries;
    MatrixKind kind = MatrixKind::gauge;
    int bandwidth = 0;             // meaningful for kind == banded
    std::vector<double> gamma;     // per resonator
    std::vector<double> contrast;  // delta_i * v_i^2 per resonator
    BasisSpec basis;
    std::uint64_t layoutHash = 0;

    std::size_t size() const noexcept { return static_cast<std::size_t>(entries.rows()); }
    /// Representative contrast (first resonator); the delta in delta*K bounds.
    double delta() const { return contrast.empty() ? 1.0 : contrast.front(); }
};

/// Minimum surface gap as a fraction of the radius below which the smooth
/// cross-sphere quadrature is not trusted.
inline constexpr double kMinGapFraction = 0.2;

/// First pair (i < j) whose surface gap is below kMinGapFraction * radius.
std::optional<std::pair<std::size_t, std::size_t>> too_close_pair(const SphereLayout& layout);

/// Polar quadrature order used for the interaction of two spheres whose
/// centers are `centerDistance` apart.
int cross_quadrature_order(double radius, double centerDistance, const BasisSpec& basis);

/// Block coupling the harmonics on the target sphere (rows) to the harmonics of
/// the density on the source sphere (columns). Uses the closed-form exterior
/// field of each source harmonic and projects it on the target surface.
Eigen::MatrixXd interaction_block(const Vec3& target, const Vec3& source, double radius,
                                  const BasisSpec& basis);

/// OpenMP assembly over sphere pairs.
SingleLayerSystem assemble_single_layer(const SphereLayout& layout, const BasisSpec& basis);
/// Serial reference: fills every ordered pair independently.
SingleLayerSystem assemble_single_layer_serial(const SphereLayout& layout, const BasisSpec& basis);

DensitySet solve_densities(const SingleLayerSystem& system);

/// (C_N)_{ij} = -integral over sphere i of psi_j.
GaugeCapacitanceMatrix plain_capacitance(const DensitySet& densities, const SphereLayout& layout);

/// Integral of exp(gamma x1) over the ball of the given radius and center.
double gauge_weight_volume(double gamma, double radius, const Vec3& center);
/// Same integral with the weight measured from the ball center, exp(gamma (x1 - c1)).
double centered_gauge_volume(double gamma, double radius);

/// Gauge capacitance matrix with per-resonator gamma, delta and speed:
/// C_ij = -(delta_i v_i^2 / int_{D_i} e^{gamma_i x1}) int_{dD_i} e^{gamma_i x1} psi_j.
/// The common factor e^{gamma_i c1} cancels and is never formed.
GaugeCapacitanceMatrix gauge_capacitance(const DensitySet& densities, const SphereLayout& layout,
                                         const MaterialParams& params);

/// Entries with |i - j| < k kept, the rest zeroed.
GaugeCapacitanceMatrix k_banded(const GaugeCapacitanceMatrix& matrix, int k);

/// Assemble, solve and form the gauge matrix in one call.
GaugeCapacitanceMatrix compute_gauge_capacitance(const SphereLayout& layout,
                                                 const MaterialParams& params,
                                                 const BasisSpec& basis = {});

}  // namespace skinfx
