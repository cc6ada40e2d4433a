#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "skinfx/bem.hpp"
#include "skinfx/geometry.hpp"
#include "skinfx/spectra.hpp"

namespace skinfx {

enum class HeadSide { left, right };
const char* to_string(HeadSide side);

/// A mode is condensated when the share of its 2-norm carried by the head
/// exceeds massFraction. The head is the first ceil(headFraction * N) x1-ranks,
/// or the first headCount ranks when headCount > 0.
struct CondensationCriterion {
    double headFraction = 0.2;
    double massFraction = 0.8;
    HeadSide from = HeadSide::left;
    int headCount = 0;

    std::size_t head_size(std::size_t n) const;
    void validate() const;
};

/// d_i = || v restricted to the i lowest x1-ranks || / || v ||, ranks taken
/// from the left or from the right. Nondecreasing with d_N = 1.
std::vector<double> degree_of_condensation(const Eigen::VectorXcd& v, const SphereLayout& layout,
                                           HeadSide from = HeadSide::left);

bool is_condensated(const Eigen::VectorXcd& v, const SphereLayout& layout, const CondensationCriterion& criterion = {});

struct ModeCondensation {
    std::size_t modeIndex = 0;
    cdouble lambda;
    std::vector<double> degree;
    bool condensated = false;
    double decayRate = 0.0;  // log-linear |v| envelope along x1-rank from the head side
};

struct CondensationReport {
    std::vector<ModeCondensation> perMode;
    double proportion = 0.0;
    std::size_t n = 0;
    std::uint64_t layoutHash = 0;
    CondensationCriterion criterion;

    std::size_t condensated_count() const;
};

CondensationReport condensation_proportion(const SpectralDecomposition& decomp, const SphereLayout& layout,
                                           const CondensationCriterion& criterion = {});

struct EnsembleMean {
    /// meanCurves[m] is the mean degree vector of mode rank m over accepted trials.
    std::vector<std::vector<double>> meanCurves;
    std::vector<double> proportions;  // one per accepted trial, in trial order
    double meanProportion = 0.0;
    int acceptedTrials = 0;
    int rejectedTrials = 0;
};

/// Mode-rank-aligned mean over trials; std::nullopt marks a rejected trial.
/// Throws ConfigError when no trial was accepted or sizes differ.
EnsembleMean average_condensation(const std::vector<std::optional<CondensationReport>>& reports);

struct EnsembleResult {
    CondensationReport unperturbed;
    std::vector<std::optional<CondensationReport>> trials;
    EnsembleMean mean;
};

/// Seeded disorder ensemble over positions or gamma. Every trial is a pure
/// function of (seed, trial index), so the parallel and serial drivers agree
/// exactly. Trials whose draw makes spheres collide are rejected and counted.
EnsembleResult run_ensemble(const SphereLayout& layout, const MaterialParams& params, const DisorderSpec& spec,
                            const CondensationCriterion& criterion = {}, const BasisSpec& basis = {});
EnsembleResult run_ensemble_serial(const SphereLayout& layout, const MaterialParams& params,
                                   const DisorderSpec& spec, const CondensationCriterion& criterion = {},
                                   const BasisSpec& basis = {});

/// One trial of the ensemble; std::nullopt when the draw is rejected.
std::optional<CondensationReport> ensemble_trial(const SphereLayout& layout, const MaterialParams& params,
                                                 const DisorderSpec& spec, const CondensationCriterion& criterion,
                                                 const BasisSpec& basis, std::uint64_t trial);

}  // namespace skinfx
