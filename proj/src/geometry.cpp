#include "skinfx/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <sstream>

#include "skinfx/rng.hpp"

namespace skinfx {

double distance(const Vec3& a, const Vec3& b) noexcept {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

namespace {

std::string overlap_message(std::size_t a, std::size_t b, double d, double r) {
    std::ostringstream os;
    os << "spheres " << a << " and " << b << " overlap: center distance " << d
       << " <= 2*radius = " << 2.0 * r;
    return os.str();
}

}  // namespace

OverlapError::OverlapError(std::size_t a, std::size_t b, double d, double r)
    : ConfigError(overlap_message(a, b, d, r)), first(a), second(b) {}

SphereLayout::SphereLayout(std::vector<Vec3> centers, double radius, double spacing)
    : centers_(std::move(centers)), radius_(radius), spacing_(spacing) {
    if (centers_.empty()) throw ConfigError("layout must contain at least one sphere");
    if (!(radius_ > 0.0) || !std::isfinite(radius_)) throw ConfigError("radius must be positive");
    if (!(spacing_ > 0.0) || !std::isfinite(spacing_)) throw ConfigError("spacing must be positive");
    for (const auto& c : centers_)
        for (double x : c)
            if (!std::isfinite(x)) throw ConfigError("non-finite sphere center");

    const std::size_t n = centers_.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = distance(centers_[i], centers_[j]);
            if (d <= 2.0 * radius_) throw OverlapError(i, j, d, radius_);
        }

    ordering_.resize(n);
    std::iota(ordering_.begin(), ordering_.end(), std::size_t{0});
    std::stable_sort(ordering_.begin(), ordering_.end(), [this](std::size_t a, std::size_t b) {
        const auto& ca = centers_[a];
        const auto& cb = centers_[b];
        if (ca[0] != cb[0]) return ca[0] < cb[0];
        return ca[1] < cb[1];
    });
    rank_.resize(n);
    for (std::size_t r = 0; r < n; ++r) rank_[ordering_[r]] = r;
    for (std::size_t r = 1; r < n; ++r) {
        const auto& a = centers_[ordering_[r - 1]];
        const auto& b = centers_[ordering_[r]];
        if (a[0] == b[0] && a[1] == b[1]) prefixTies_ = true;
    }
}

double SphereLayout::pair_distance(std::size_t i, std::size_t j) const {
    return distance(centers_.at(i), centers_.at(j));
}

double SphereLayout::gap(std::size_t i, std::size_t j) const {
    return pair_distance(i, j) - 2.0 * radius_;
}

std::pair<std::size_t, std::size_t> SphereLayout::closest_pair() const {
    if (size() < 2) throw ConfigError("closest_pair needs at least two spheres");
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> out{0, 1};
    for (std::size_t i = 0; i < size(); ++i)
        for (std::size_t j = i + 1; j < size(); ++j) {
            const double d = distance(centers_[i], centers_[j]);
            if (d < best) {
                best = d;
                out = {i, j};
            }
        }
    return out;
}

std::uint64_t SphereLayout::hash() const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](double x) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &x, sizeof(double));
        for (unsigned char b : bytes) {
            h ^= b;
            h *= 0x100000001b3ULL;
        }
    };
    mix(radius_);
    mix(spacing_);
    for (const auto& c : centers_)
        for (double x : c) mix(x);
    return h;
}

MaterialParams MaterialParams::uniform(double gamma, double delta, double speedInside,
                                       double speedOutside) {
    MaterialParams p;
    p.gamma = {gamma};
    p.delta = {delta};
    p.speedInside = {speedInside};
    p.speedOutside = speedOutside;
    return p;
}

namespace {

double broadcast_at(const std::vector<double>& v, std::size_t i, const char* name) {
    if (v.size() == 1) return v.front();
    if (i >= v.size()) throw ConfigError(std::string(name) + " list shorter than layout");
    return v[i];
}

void check_length(const std::vector<double>& v, std::size_t n, const char* name) {
    if (v.size() != 1 && v.size() != n) {
        std::ostringstream os;
        os << name << " has " << v.size() << " entries, expected 1 or " << n;
        throw ConfigError(os.str());
    }
}

}  // namespace

double MaterialParams::gamma_at(std::size_t i) const { return broadcast_at(gamma, i, "gamma"); }
double MaterialParams::delta_at(std::size_t i) const { return broadcast_at(delta, i, "delta"); }
double MaterialParams::speed_at(std::size_t i) const {
    return broadcast_at(speedInside, i, "speedInside");
}

void MaterialParams::validate(std::size_t n) const {
    check_length(gamma, n, "gamma");
    check_length(delta, n, "delta");
    check_length(speedInside, n, "speedInside");
    for (double g : gamma)
        if (!std::isfinite(g)) throw ConfigError("gamma must be finite");
    for (double d : delta)
        if (!(d > 0.0) || !std::isfinite(d)) throw ConfigError("delta must be positive");
    for (double v : speedInside)
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("speedInside must be positive");
    if (!(speedOutside > 0.0)) throw ConfigError("speedOutside must be positive");
}

void DisorderSpec::validate() const {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
        throw ConfigError("disorder epsilon must be nonnegative");
    if (target == DisorderTarget::positions && epsilon >= 1.0)
        throw ConfigError("position disorder requires epsilon < 1");
    if (trials < 1) throw ConfigError("disorder trials must be >= 1");
}

SphereLayout build_chain(int n, double spacing, double radius) {
    if (n < 1) throw ConfigError("chain length must be positive");
    if (!(spacing > 0.0) || !(radius > 0.0)) throw ConfigError("spacing and radius must be positive");
    if (2.0 * radius >= spacing) throw OverlapError(0, 1, spacing, radius);
    std::vector<Vec3> centers(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) centers[static_cast<std::size_t>(i)] = {(i + 1) * spacing, 0.0, 0.0};
    return SphereLayout(std::move(centers), radius, spacing);
}

SphereLayout build_rectangle(int perLine, int lines, double spacing, double lineGap, double radius) {
    if (perLine < 1 || lines < 1) throw ConfigError("rectangle dimensions must be positive");
    if (!(spacing > 0.0) || !(radius > 0.0)) throw ConfigError("spacing and radius must be positive");
    if (lines > 1 && !(lineGap > 0.0)) throw ConfigError("lineGap must be positive");
    std::vector<Vec3> centers;
    centers.reserve(static_cast<std::size_t>(perLine) * static_cast<std::size_t>(lines));
    for (int m = 0; m < lines; ++m)
        for (int i = 0; i < perLine; ++i) centers.push_back({(i + 1) * spacing, m * lineGap, 0.0});
    return SphereLayout(std::move(centers), radius, spacing);
}

SphereLayout build_rhombus(int lines, double spacing, double radius, int baseLength, double lineGap) {
    if (lines < 1 || lines % 2 == 0) throw ConfigError("rhombus needs an odd, positive line count");
    if (baseLength <= 0) baseLength = 2 * lines - 1;
    if (lineGap <= 0.0) lineGap = spacing;
    const int half = (lines - 1) / 2;
    if (baseLength - 2 * half < 1) throw ConfigError("rhombus base length too short for line count");
    std::vector<Vec3> centers;
    for (int m = -half; m <= half; ++m) {
        const int count = baseLength - 2 * std::abs(m);
        for (int q = 1; q <= count; ++q)
            centers.push_back({(std::abs(m) + q) * spacing, m * lineGap, 0.0});
    }
    return SphereLayout(std::move(centers), radius, spacing);
}

SphereLayout perturb_positions(const SphereLayout& layout, const DisorderSpec& spec,
                               std::uint64_t trialIndex) {
    spec.validate();
    if (spec.target != DisorderTarget::positions)
        throw ConfigError("perturb_positions requires a positions disorder spec");
    std::vector<Vec3> centers = layout.centers();
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const double eps = counter_symmetric(spec.epsilon, spec.seed, RngStream::positions, trialIndex, i);
        if (spec.mode == PositionDisorder::site_relative)
            centers[i][0] += eps * layout.spacing();
        else
            centers[i][0] *= 1.0 + eps;
    }
    SphereLayout out(std::move(centers), layout.radius(), layout.spacing());
    if (out.has_prefix_ties()) throw ConfigError("position disorder produced coincident x1 ordering keys");
    return out;
}

MaterialParams perturb_gamma(const MaterialParams& params, std::size_t n, const DisorderSpec& spec,
                             std::uint64_t trialIndex) {
    spec.validate();
    if (spec.target != DisorderTarget::gamma)
        throw ConfigError("perturb_gamma requires a gamma disorder spec");
    params.validate(n);
    MaterialParams out = params;
    out.gamma.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double eps = counter_symmetric(spec.epsilon, spec.seed, RngStream::gamma, trialIndex, i);
        out.gamma[i] = params.gamma_at(i) * (1.0 + eps);
    }
    return out;
}

SphereLayout reflected(const SphereLayout& layout) {
    double lo = layout.center(0)[0];
    double hi = lo;
    for (const auto& c : layout.centers()) {
        lo = std::min(lo, c[0]);
        hi = std::max(hi, c[0]);
    }
    std::vector<Vec3> centers(layout.centers().rbegin(), layout.centers().rend());
    for (auto& c : centers) c[0] = (lo + hi) - c[0];
    return SphereLayout(std::move(centers), layout.radius(), layout.spacing());
}

}  // namespace skinfx
