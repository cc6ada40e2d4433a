#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skinfx/errors.hpp"

namespace skinfx {

using Vec3 = std::array<double, 3>;

double distance(const Vec3& a, const Vec3& b) noexcept;

/// Thrown when a builder or a disorder draw produces touching spheres.
/// Monte Carlo drivers catch this and count the trial as rejected.
class OverlapError : public ConfigError {
public:
    OverlapError(std::size_t first, std::size_t second, double centerDistance, double radius);
    std::size_t first;
    std::size_t second;
};

/// Equal-radius spheres with the chain axis along coordinate 0 (x1).
///
/// Construction validates the non-overlap invariant and computes the x1
/// ordering: spheres are ranked by x1 with x2 as tie-break. Layouts are
/// immutable once built.
class SphereLayout {
public:
    SphereLayout(std::vector<Vec3> centers, double radius, double spacing);

    std::size_t size() const noexcept { return centers_.size(); }
    const std::vector<Vec3>& centers() const noexcept { return centers_; }
    const Vec3& center(std::size_t i) const { return centers_.at(i); }
    double radius() const noexcept { return radius_; }
    double spacing() const noexcept { return spacing_; }

    /// ordering()[r] is the storage index of the sphere with x1-rank r.
    const std::vector<std::size_t>& ordering() const noexcept { return ordering_; }
    /// rank()[i] is the x1-rank of storage index i.
    const std::vector<std::size_t>& rank() const noexcept { return rank_; }
    /// True when two centers share both x1 and x2; prefix-based metrics reject such layouts.
    bool has_prefix_ties() const noexcept { return prefixTies_; }

    double pair_distance(std::size_t i, std::size_t j) const;
    /// Minimal surface-to-surface distance between spheres i and j.
    double gap(std::size_t i, std::size_t j) const;
    /// Closest pair (by center distance); requires size() >= 2.
    std::pair<std::size_t, std::size_t> closest_pair() const;

    /// FNV-1a over radius, spacing and centers; used as provenance metadata.
    std::uint64_t hash() const noexcept;

private:
    std::vector<Vec3> centers_;
    double radius_;
    double spacing_;
    std::vector<std::size_t> ordering_;
    std::vector<std::size_t> rank_;
    bool prefixTies_ = false;
};

/// Physical coefficients. Per-resonator lists have length N, or length 1
/// to broadcast a scalar.
struct MaterialParams {
    std::vector<double> gamma{1.0};
    std::vector<double> delta{1e-3};
    std::vector<double> speedInside{1.0};
    // Background wave speed; enters the frequency scaling of the model,
    // not the matrix entries.
    double speedOutside = 1.0;

    static MaterialParams uniform(double gamma, double delta = 1e-3, double speedInside = 1.0,
                                  double speedOutside = 1.0);

    double gamma_at(std::size_t i) const;
    double delta_at(std::size_t i) const;
    double speed_at(std::size_t i) const;
    /// delta_i * v_i^2, the row prefactor of the gauge capacitance matrix.
    double contrast_weight(std::size_t i) const { return delta_at(i) * speed_at(i) * speed_at(i); }

    void validate(std::size_t n) const;
};

enum class DisorderTarget { positions, gamma };

/// How a relative position draw eps_i moves center i along x1.
enum class PositionDisorder {
    /// x1 += eps_i * spacing: each site moves by a fraction of the lattice step.
    site_relative,
    /// x1 *= (1 + eps_i): scaling of the absolute coordinate.
    absolute_scaling,
};

struct DisorderSpec {
    double epsilon = 0.0;
    DisorderTarget target = DisorderTarget::positions;
    int trials = 1;
    std::uint64_t seed = 0;
    PositionDisorder mode = PositionDisorder::site_relative;

    void validate() const;
};

SphereLayout build_chain(int n, double spacing = 1.0, double radius = 0.25);

/// `lines` parallel chains of `perLine` spheres; line m is shifted by m*lineGap along x2.
SphereLayout build_rectangle(int perLine, int lines, double spacing, double lineGap, double radius);

/// Odd number of lines; line m in [-(lines-1)/2, (lines-1)/2] holds baseLength - 2|m|
/// spheres centered on a common x1 midpoint. baseLength <= 0 selects 2*lines - 1,
/// lineGap <= 0 selects spacing.
SphereLayout build_rhombus(int lines, double spacing, double radius, int baseLength = 0,
                           double lineGap = 0.0);

/// Draws eps_i ~ U[-eps, eps] from the counter stream (seed, trialIndex, i)
/// and moves each x1 coordinate. Throws OverlapError if spheres collide.
SphereLayout perturb_positions(const SphereLayout& layout, const DisorderSpec& spec,
                               std::uint64_t trialIndex);

/// Per-resonator gamma_i = gamma * (1 + eps_i).
MaterialParams perturb_gamma(const MaterialParams& params, std::size_t n, const DisorderSpec& spec,
                             std::uint64_t trialIndex);

/// Mirror image under x1 -> (min x1 + max x1) - x1, stored in reversed order
/// so storage index i maps to original index N-1-i.
SphereLayout reflected(const SphereLayout& layout);

}  // namespace skinfx
