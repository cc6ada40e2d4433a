#include "skinfx/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

#include "skinfx/numeric.hpp"
#include "skinfx/pseudomodes.hpp"

namespace skinfx {

const char* to_string(HeadSide side) { return side == HeadSide::left ? "left" : "right"; }

std::size_t CondensationCriterion::head_size(std::size_t n) const {
    validate();
    if (headCount > 0) return std::min(n, static_cast<std::size_t>(headCount));
    const auto h = static_cast<std::size_t>(std::ceil(headFraction * static_cast<double>(n) - 1e-12));
    return std::clamp<std::size_t>(h, 1, n);
}

void CondensationCriterion::validate() const {
    if (!(headFraction > 0.0 && headFraction <= 1.0)) throw ConfigError("head fraction must lie in (0, 1]");
    if (!(massFraction >= 0.0 && massFraction < 1.0)) throw ConfigError("mass fraction must lie in [0, 1)");
    if (headCount < 0) throw ConfigError("head count must be nonnegative");
}

namespace {

// |v| in x1-rank order, counted from the requested side.
std::vector<double> ranked_magnitudes(const Eigen::VectorXcd& v, const SphereLayout& layout, HeadSide from) {
    if (static_cast<std::size_t>(v.size()) != layout.size())
        throw ConfigError("mode length does not match the layout");
    if (layout.has_prefix_ties())
        throw ConfigError("degree of condensation needs distinct x1 positions (two centers share x1 and x2)");
    const auto& ord = layout.ordering();
    const std::size_t n = ord.size();
    std::vector<double> a(n);
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t idx = from == HeadSide::left ? ord[r] : ord[n - 1 - r];
        a[r] = std::abs(v[static_cast<Eigen::Index>(idx)]);
    }
    return a;
}

}  // namespace

std::vector<double> degree_of_condensation(const Eigen::VectorXcd& v, const SphereLayout& layout, HeadSide from) {
    const std::vector<double> a = ranked_magnitudes(v, layout, from);
    // Scale first so the squares cannot under- or overflow.
    const double mx = *std::max_element(a.begin(), a.end());
    if (!(mx > 0.0)) throw ConfigError("degree of condensation of the zero vector is undefined");
    std::vector<double> prefix(a.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double s = a[i] / mx;
        acc += s * s;
        prefix[i] = acc;
    }
    for (double& p : prefix) p = std::min(1.0, std::sqrt(p / acc));
    prefix.back() = 1.0;
    return prefix;
}

bool is_condensated(const Eigen::VectorXcd& v, const SphereLayout& layout, const CondensationCriterion& criterion) {
    const std::vector<double> d = degree_of_condensation(v, layout, criterion.from);
    return d[criterion.head_size(d.size()) - 1] > criterion.massFraction;
}

std::size_t CondensationReport::condensated_count() const {
    return static_cast<std::size_t>(
        std::count_if(perMode.begin(), perMode.end(), [](const ModeCondensation& m) { return m.condensated; }));
}

CondensationReport condensation_proportion(const SpectralDecomposition& decomp, const SphereLayout& layout,
                                           const CondensationCriterion& criterion) {
    const std::size_t n = layout.size();
    if (static_cast<std::size_t>(decomp.eigenvectors.rows()) != n)
        throw ConfigError("decomposition does not match the layout size");
    CondensationReport report;
    report.n = n;
    report.layoutHash = layout.hash();
    report.criterion = criterion;
    const std::size_t head = criterion.head_size(n);
    for (std::size_t m = 0; m < decomp.size(); ++m) {
        const Eigen::VectorXcd v = decomp.eigenvectors.col(static_cast<Eigen::Index>(m));
        ModeCondensation mc;
        mc.modeIndex = m;
        mc.lambda = decomp.eigenvalues[m];
        mc.degree = degree_of_condensation(v, layout, criterion.from);
        mc.condensated = mc.degree[head - 1] > criterion.massFraction;
        const std::vector<double> a = ranked_magnitudes(v, layout, criterion.from);
        mc.decayRate = fitted_decay_rate(Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(n))
                                             .cast<cdouble>(),
                                         ModeSide::left);
        report.perMode.push_back(std::move(mc));
    }
    report.proportion = static_cast<double>(report.condensated_count()) / static_cast<double>(n);
    return report;
}

EnsembleMean average_condensation(const std::vector<std::optional<CondensationReport>>& reports) {
    if (reports.empty()) throw ConfigError("average_condensation needs at least one report");
    EnsembleMean out;
    const CondensationReport* first = nullptr;
    for (const auto& r : reports) {
        if (!r) {
            ++out.rejectedTrials;
            continue;
        }
        if (first && (r->n != first->n || r->perMode.size() != first->perMode.size()))
            throw ConfigError("average_condensation: reports differ in size");
        if (!first) first = &*r;
        ++out.acceptedTrials;
        out.proportions.push_back(r->proportion);
    }
    if (!first) {
        std::ostringstream os;
        os << "average_condensation: all " << out.rejectedTrials << " trials were rejected";
        throw ConfigError(os.str());
    }
    const std::size_t modes = first->perMode.size();
    const std::size_t n = first->n;
    out.meanCurves.assign(modes, std::vector<double>(n));
    std::vector<double> column(static_cast<std::size_t>(out.acceptedTrials));
    for (std::size_t m = 0; m < modes; ++m)
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t t = 0;
            for (const auto& r : reports)
                if (r) column[t++] = r->perMode[m].degree[i];
            out.meanCurves[m][i] = pairwise_sum(column) / static_cast<double>(column.size());
        }
    out.meanProportion = pairwise_sum(out.proportions) / static_cast<double>(out.proportions.size());
    return out;
}

std::optional<CondensationReport> ensemble_trial(const SphereLayout& layout, const MaterialParams& params,
                                                 const DisorderSpec& spec, const CondensationCriterion& criterion,
                                                 const BasisSpec& basis, std::uint64_t trial) {
    if (spec.target == DisorderTarget::positions) {
        std::optional<SphereLayout> moved;
        try {
            moved.emplace(perturb_positions(layout, spec, trial));
        } catch (const OverlapError&) {
            return std::nullopt;
        }
        if (too_close_pair(*moved)) return std::nullopt;
        const GaugeCapacitanceMatrix c = compute_gauge_capacitance(*moved, params, basis);
        return condensation_proportion(eigendecompose(c), *moved, criterion);
    }
    const MaterialParams drawn = perturb_gamma(params, layout.size(), spec, trial);
    const GaugeCapacitanceMatrix c = compute_gauge_capacitance(layout, drawn, basis);
    return condensation_proportion(eigendecompose(c), layout, criterion);
}

namespace {

EnsembleResult start_ensemble(const SphereLayout& layout, const MaterialParams& params, const DisorderSpec& spec,
                              const CondensationCriterion& criterion, const BasisSpec& basis) {
    spec.validate();
    criterion.validate();
    EnsembleResult out;
    out.unperturbed = condensation_proportion(eigendecompose(compute_gauge_capacitance(layout, params, basis)),
                                              layout, criterion);
    out.trials.resize(static_cast<std::size_t>(spec.trials));
    return out;
}

}  // namespace

EnsembleResult run_ensemble(const SphereLayout& layout, const MaterialParams& params, const DisorderSpec& spec,
                            const CondensationCriterion& criterion, const BasisSpec& basis) {
    EnsembleResult out = start_ensemble(layout, params, spec, criterion, basis);
    const auto trials = static_cast<std::ptrdiff_t>(spec.trials);
    std::vector<std::exception_ptr> errors(out.trials.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t t = 0; t < trials; ++t) {
        const auto idx = static_cast<std::size_t>(t);
        try {
            out.trials[idx] = ensemble_trial(layout, params, spec, criterion, basis, static_cast<std::uint64_t>(t));
        } catch (...) {
            errors[idx] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    out.mean = average_condensation(out.trials);
    return out;
}

EnsembleResult run_ensemble_serial(const SphereLayout& layout, const MaterialParams& params,
                                   const DisorderSpec& spec, const CondensationCriterion& criterion,
                                   const BasisSpec& basis) {
    EnsembleResult out = start_ensemble(layout, params, spec, criterion, basis);
    for (std::size_t t = 0; t < out.trials.size(); ++t)
        out.trials[t] = ensemble_trial(layout, params, spec, criterion, basis, t);
    out.mean = average_condensation(out.trials);
    return out;
}

}  // namespace skinfx
