#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skinfx/bem.hpp"
#include "skinfx/geometry.hpp"
#include "skinfx/metrics.hpp"

namespace skinfx {

enum class Scenario { chain, rectangle, rhombus };
const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

/// Every knob of one experiment. Zero-valued sizes select the per-command
/// default (N = 100 for capmat/condense/disorder, N = 50 for symbol/pseudomode).
struct ExperimentConfig {
    Scenario scenario = Scenario::chain;
    int n = 0;
    int perLine = 100;
    int lines = 0;           // 0: 2 for rectangle, 9 for rhombus
    double lineGap = 0.0;    // 0: spacing
    int rhombusBase = 0;     // 0: 2 * lines - 1
    double gamma = 1.0;
    double delta = 1e-3;
    double speedInside = 1.0;
    double radius = 0.25;
    double spacing = 1.0;
    int basisL = 4;
    int quadrature = 24;
    int bandK = 10;
    int limitR = 101;
    int modes = 20;
    double epsilon = 0.1;
    DisorderTarget target = DisorderTarget::positions;
    PositionDisorder positionMode = PositionDisorder::site_relative;
    int trials = 100;
    std::uint64_t seed = 1;
    double headFraction = 0.2;
    double massFraction = 0.8;
    int headCount = 0;  // 0: 10 per line for rectangles, headFraction otherwise
    std::vector<double> gammas{0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<int> sizes{20, 40, 60, 80, 100};
    std::vector<double> modeGammas{0.5, 1.0, -1.0};
    int threads = 0;
    std::filesystem::path out = "skinfx-out";

    void validate() const;
    int n_or(int fallback) const { return n > 0 ? n : fallback; }
    /// All fields that influence results (not out, not threads), with sorted keys.
    nlohmann::json to_json() const;
    /// FNV-1a of "<command>:" + to_json().dump(), as 16 hex digits.
    std::string hash(const std::string& command) const;
};

SphereLayout build_layout(const ExperimentConfig& cfg, int defaultN);
MaterialParams material_params(const ExperimentConfig& cfg);
BasisSpec basis_spec(const ExperimentConfig& cfg);
CondensationCriterion condensation_criterion(const ExperimentConfig& cfg);

struct CommandResult {
    std::vector<std::filesystem::path> files;  // relative to cfg.out
    nlohmann::json summary;
};

CommandResult cmd_capmat(const ExperimentConfig& cfg);
CommandResult cmd_symbol(const ExperimentConfig& cfg);
CommandResult cmd_pseudomode(const ExperimentConfig& cfg);
CommandResult cmd_condense(const ExperimentConfig& cfg);
CommandResult cmd_disorder(const ExperimentConfig& cfg);
/// Regenerates the ten figure datasets under cfg.out/figNN and writes manifest.json.
CommandResult cmd_figures(const ExperimentConfig& cfg);

/// Exit codes: 0 success, 2 configuration or validation error, 3 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace skinfx
