// Acceptance run: one PASS/FAIL line per primary criterion.
// The process exits 0 whenever every criterion was evaluated; a red line is a
// result, not a crash.

#include <algorithm>
#include <complex>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "skinfx/bem.hpp"
#include "skinfx/cli.hpp"
#include "skinfx/io.hpp"
#include "skinfx/metrics.hpp"
#include "skinfx/pseudomodes.hpp"
#include "skinfx/spectra.hpp"
#include "skinfx/toeplitz.hpp"

using namespace skinfx;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
    bool warnOnly = false;
};

int failures = 0;
std::ofstream report("acceptance_report.txt");

void emit(const std::string& line) {
    std::cout << line << std::endl;
    report << line << std::endl;
}

void criterion(const std::string& name, double budgetSeconds, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream time;
    time.precision(3);
    time << secs << " s of " << budgetSeconds << " s";
    if (secs > budgetSeconds) {
        o.pass = false;
        o.detail += "; over the runtime budget";
    }
    const char* tag = o.pass ? "PASS" : (o.warnOnly ? "FAIL (warning only)" : "FAIL");
    if (!o.pass && !o.warnOnly) ++failures;
    emit(std::string(tag) + "  " + name + "  [" + time.str() + "]  " + o.detail);
}

std::string num(double x, int digits = 4) {
    std::ostringstream os;
    os.precision(digits);
    os << x;
    return os.str();
}

GaugeCapacitanceMatrix chain_matrix(int n, double gamma) {
    return compute_gauge_capacitance(build_chain(n), MaterialParams::uniform(gamma));
}

// Two equal spheres of radius a at center distance d, bispherical image series.
double mutual_image_series(double a, double d) {
    const double beta = std::acosh(d / (2.0 * a));
    double sum = 0.0;
    for (int n = 1;; ++n) {
        const double t = 1.0 / std::sinh(2 * n * beta);
        sum += t;
        if (t < 1e-8 * sum) break;
    }
    return -4.0 * pi * a * std::sinh(beta) * sum;
}

Outcome bem_correctness() {
    const SphereLayout one({{0.0, 0.0, 0.0}}, 1.0, 4.0);
    const double cap = plain_capacitance(solve_densities(assemble_single_layer(one, {})), one).entries(0, 0);
    const SphereLayout two({{0.0, 0.0, 0.0}, {4.0, 0.0, 0.0}}, 1.0, 4.0);
    const double mutual = plain_capacitance(solve_densities(assemble_single_layer(two, {})), two).entries(0, 1);
    const double ref = mutual_image_series(1.0, 4.0);
    const double e1 = std::abs(cap - 4.0 * pi) / (4.0 * pi);
    const double e2 = std::abs(mutual - ref) / std::abs(ref);
    return {e1 <= 0.005 && e2 <= 0.02,
            "isolated sphere rel. error " + num(e1) + " (<= 0.005); mutual " + num(mutual, 8) + " vs series " +
                num(ref, 8) + ", rel. error " + num(e2) + " (<= 0.02)"};
}

Outcome gamma_zero_reduction() {
    const SphereLayout l = build_chain(20);
    const DensitySet d = solve_densities(assemble_single_layer(l, {}));
    const MaterialParams p = MaterialParams::uniform(0.0);
    const Eigen::MatrixXd plain = plain_capacitance(d, l).entries;
    const Eigen::MatrixXd gauge = gauge_capacitance(d, l, p).entries;
    const double vol = 4.0 / 3.0 * pi * std::pow(l.radius(), 3);
    const Eigen::MatrixXd expect = (p.contrast_weight(0) / vol) * plain;
    const double rel = (gauge - expect).cwiseAbs().maxCoeff() / expect.cwiseAbs().maxCoeff();
    return {rel <= 1e-10, "max relative deviation " + num(rel) + " (<= 1e-10)"};
}

Outcome entry_decay(const GaugeCapacitanceMatrix& c100) {
    const DecayFit f = decay_fit(c100);
    const bool ok = f.exponent >= 1.5 && f.exponent <= 2.5 && f.rSquared >= 0.95 && f.first == 2 && f.last == 50;
    return {ok, "exponent " + num(f.exponent) + " (want [1.5, 2.5]), R^2 " + num(f.rSquared) + " (>= 0.95), window [" +
                    std::to_string(f.first) + ", " + std::to_string(f.last) + "], center row " + std::to_string(f.center)};
}

Outcome toeplitz_deviation_uniformity() {
    const MaterialParams p = MaterialParams::uniform(1.0);
    const SymbolCoefficients s = limit_coefficients({}, p, 10, 101);
    std::vector<double> k;
    std::string detail = "K at N = 40, 70, 100:";
    for (int n : {40, 70, 100}) {
        k.push_back(toeplitz_deviation(chain_matrix(n, 1.0), s).constant);
        detail += " " + num(k.back());
    }
    const auto [lo, hi] = std::minmax_element(k.begin(), k.end());
    const double ratio = *hi / *lo;
    return {ratio < 2.0, detail + "; max/min " + num(ratio) + " (< 2)"};
}

Outcome winding() {
    std::string detail;
    bool ok = true;
    for (double g : {1.0, -1.0}) {
        const SpectralDecomposition d = eigendecompose(chain_matrix(50, g));
        const SymbolCoefficients s = limit_coefficients({}, MaterialParams::uniform(g), 10, 101);
        const double f1 = evaluate_symbol(s, 1.0).real();
        const double fm1 = evaluate_symbol(s, -1.0).real();
        const double lo = std::min(f1, fm1), hi = std::max(f1, fm1);
        WindingOptions opt;
        opt.maxSamples = 1 << 16;
        const int want = g > 0 ? -1 : 1;
        int interior = 0, matched = 0, exterior = 0, exteriorZero = 0;
        for (const auto& lambda : d.eigenvalues) {
            const bool inside = lambda.real() > lo && lambda.real() < hi;
            std::optional<int> w;
            try {
                w = winding_number(s, lambda, opt);
            } catch (const OnCurveError&) {
            }
            if (inside) {
                ++interior;
                if (w == want) ++matched;
            } else {
                ++exterior;
                if (w == 0) ++exteriorZero;
            }
        }
        // A ring well outside the curve.
        double radius = 0.0;
        for (const auto& v : sample_symbol_curve(s).values) radius = std::max(radius, std::abs(v));
        for (int m = 0; m < 32; ++m) {
            ++exterior;
            if (winding_number(s, std::polar(2.0 * radius, 2.0 * pi * m / 32), opt) == 0) ++exteriorZero;
        }
        const double share = interior > 0 ? static_cast<double>(matched) / interior : 0.0;
        ok = ok && interior > 0 && share >= 0.95 && exteriorZero == exterior;
        detail += (g > 0 ? "gamma=+1: " : "; gamma=-1: ") + std::to_string(matched) + "/" + std::to_string(interior) +
                  " interior eigenvalues wind " + std::to_string(want) + ", " + std::to_string(exteriorZero) + "/" +
                  std::to_string(exterior) + " exterior probes wind 0";
    }
    return {ok, detail};
}

Outcome realness(const GaugeCapacitanceMatrix& c100) {
    double worst = 0.0;
    std::string detail = "max|Im|/max|Re|:";
    for (int n : {50, 100})
        for (double g : {0.5, 1.0}) {
            const SpectralDecomposition d =
                eigendecompose(n == 100 && g == 1.0 ? c100 : chain_matrix(n, g));
            double im = 0.0, re = 0.0;
            for (const auto& e : d.eigenvalues) {
                im = std::max(im, std::abs(e.imag()));
                re = std::max(re, std::abs(e.real()));
            }
            worst = std::max(worst, im / re);
            detail += " N=" + std::to_string(n) + ",gamma=" + num(g, 2) + ": " + num(im / re);
        }
    Outcome o{worst <= 1e-6, detail + " (<= 1e-6)"};
    o.warnOnly = true;
    return o;
}

struct PseudomodeRun {
    GaugeCapacitanceMatrix full;
    GaugeCapacitanceMatrix banded;
    SpectralDecomposition dFull;
    SpectralDecomposition dBand;
    SymbolCoefficients symbol;
    std::vector<std::pair<std::size_t, PseudoMode>> modes;  // (eigen index, mode)
};

PseudomodeRun build_pseudomodes() {
    PseudomodeRun r;
    r.full = chain_matrix(50, 1.0);
    r.banded = k_banded(r.full, 10);
    r.dFull = eigendecompose(r.full);
    r.dBand = eigendecompose(r.banded);
    r.symbol = limit_coefficients({}, MaterialParams::uniform(1.0), 10, 101);
    for (std::size_t m = 0; m < r.dFull.size(); ++m) {
        try {
            r.modes.emplace_back(m, construct_pseudomode(r.banded, r.symbol, r.dFull.eigenvalues[m]));
        } catch (const ConfigError&) {
            // zero winding: no decaying pseudomode
        } catch (const OnCurveError&) {
        }
    }
    return r;
}

Outcome pseudomode_quality(const PseudomodeRun& r) {
    // Synthetic tridiagonal Toeplitz: a_{-1} = 2, a_0 = 0, a_1 = 1/2 at lambda = 1.
    const SymbolCoefficients tri(2, {2.0, 0.0, 0.5});
    auto residual_at = [&](int n) {
        const Eigen::MatrixXd a = toeplitz_matrix(tri, static_cast<std::size_t>(n));
        const PseudoMode m = construct_pseudomode(a, tri, 1.0);
        return std::pair{m.residualBanded, smallest_singular_direction(a, 1.0).sigmaMin};
    };
    const auto [r30, s30] = residual_at(30);
    const auto [r60, s60] = residual_at(60);
    const bool quality = r30 <= 100.0 * s30 && r60 <= 100.0 * s60;
    const double ratio = r60 / r30;
    const bool decay = ratio <= std::pow(0.9, 30);

    int aligned = 0, considered = 0, alignedBanded = 0, eigClose = 0;
    for (const auto& [m, mode] : r.modes) {
        if (considered == 20) break;
        ++considered;
        const auto col = static_cast<Eigen::Index>(m);
        if (vector_angle(mode.vector, r.dFull.eigenvectors.col(col)) <= 5.0) ++aligned;
        if (vector_angle(r.dBand.eigenvectors.col(col), r.dFull.eigenvectors.col(col)) <= 5.0) ++eigClose;
        const PseudoMode atBanded = construct_pseudomode(r.banded, r.symbol, r.dBand.eigenvalues[m]);
        if (vector_angle(atBanded.vector, r.dBand.eigenvectors.col(col)) <= 5.0) ++alignedBanded;
    }
    const bool overlay = considered == 20 && aligned >= 15;
    return {quality && decay && overlay,
            "synthetic: residual/sigma_min " + num(r30 / s30) + " (N=30), " + num(r60 / s60) +
                " (N=60) (<= 100); residual ratio N=60/N=30 " + num(ratio) + " (<= " + num(std::pow(0.9, 30)) +
                "); gauge N=50 k=10: " + std::to_string(aligned) + "/" + std::to_string(considered) +
                " constructed modes within 5 deg of full-matrix eigenvectors (>= 15). Diagnostics: " +
                std::to_string(alignedBanded) + "/" + std::to_string(considered) +
                " at banded eigenvalues match banded eigenvectors; banded vs full eigenvectors within 5 deg: " +
                std::to_string(eigClose) + "/" + std::to_string(considered)};
}

Outcome transfer_bound(PseudomodeRun& r) {
    int qualifying = 0, within = 0, hypothesis = 0, hypothesisWithin = 0;
    double minRho = 1.0;
    for (auto& [m, mode] : r.modes) {
        const TransferCheck t = verify_transfer(r.full, mode);
        minRho = std::min(minRho, mode.decayRate);
        if (t.hypothesisHolds) {
            ++hypothesis;
            if (t.withinBudget) ++hypothesisWithin;
        }
        if (mode.decayRate > 0.0 && mode.decayRate <= 0.5) {
            ++qualifying;
            if (t.withinBudget) ++within;
        }
    }
    std::string detail = std::to_string(qualifying) + " of " + std::to_string(r.modes.size()) +
                         " constructed modes have rho <= 0.5 (min rho " + num(minRho) + "), " +
                         std::to_string(within) + " within budget; theorem hypothesis holds for " +
                         std::to_string(hypothesis) + ", of which " + std::to_string(hypothesisWithin) +
                         " within budget";
    if (qualifying == 0) return {false, "not exercised: " + detail};
    return {within == qualifying, detail};
}

bool nondecreasing_one_step(const std::vector<double>& p, const std::vector<int>& n) {
    for (std::size_t i = 1; i < p.size(); ++i)
        if (p[i] < p[i - 1] - 1.0 / n[i] - 1e-12) return false;
    return true;
}

Outcome condensation_trends() {
    std::vector<double> byGamma;
    std::string detail = "gamma 0.25..1 (N=100):";
    const SphereLayout l100 = build_chain(100);
    for (double g : {0.25, 0.5, 0.75, 1.0}) {
        byGamma.push_back(condensation_proportion(eigendecompose(chain_matrix(100, g)), l100).proportion);
        detail += " " + num(byGamma.back(), 3);
    }
    std::vector<double> byN;
    const std::vector<int> sizes{20, 40, 60, 80, 100};
    detail += "; N 20..100 (gamma=1):";
    for (int n : sizes) {
        byN.push_back(condensation_proportion(eigendecompose(chain_matrix(n, 1.0)), build_chain(n)).proportion);
        detail += " " + num(byN.back(), 3);
    }
    const double zero = condensation_proportion(eigendecompose(chain_matrix(100, 0.0)), l100).proportion;
    detail += "; gamma=0: " + num(zero, 3) + " (<= 0.1)";
    const bool ok = nondecreasing_one_step(byGamma, {100, 100, 100, 100}) && nondecreasing_one_step(byN, sizes) &&
                    zero <= 0.1;
    return {ok, detail};
}

Outcome rectangle() {
    const SphereLayout l = build_rectangle(100, 2, 1.0, 1.0, 0.25);
    CondensationCriterion c;
    c.headCount = 20;  // first 10 x1-ranks of each of the two lines
    const CondensationReport r =
        condensation_proportion(eigendecompose(compute_gauge_capacitance(l, MaterialParams::uniform(1.0))), l, c);
    return {r.proportion >= 0.9, std::to_string(r.condensated_count()) + "/" + std::to_string(r.n) +
                                     " modes condensated, proportion " + num(r.proportion, 3) + " (>= 0.9)"};
}

Outcome disorder() {
    const SphereLayout l = build_chain(100);
    const MaterialParams p = MaterialParams::uniform(1.0);
    bool ok = true;
    std::string detail;
    for (DisorderTarget target : {DisorderTarget::positions, DisorderTarget::gamma})
        for (double eps : {0.1, 0.2}) {
            DisorderSpec spec;
            spec.target = target;
            spec.epsilon = eps;
            spec.trials = 100;
            spec.seed = 1;
            const EnsembleResult e = run_ensemble(l, p, spec);
            const double gap = std::abs(e.mean.meanProportion - e.unperturbed.proportion);
            ok = ok && gap <= 0.15;
            // Determinism: the first trials recomputed on their own reproduce the ensemble bit for bit.
            for (std::uint64_t t = 0; t < 2; ++t) {
                const auto again = ensemble_trial(l, p, spec, {}, {}, t);
                const auto& orig = e.trials[t];
                const bool same = again.has_value() == orig.has_value() &&
                                  (!again || (again->proportion == orig->proportion &&
                                              again->perMode.back().degree == orig->perMode.back().degree));
                ok = ok && same;
                if (!same) detail += " [trial " + std::to_string(t) + " not reproducible]";
            }
            detail += std::string(detail.empty() ? "" : "; ") +
                      (target == DisorderTarget::positions ? "positions" : "gamma") + " eps=" + num(eps, 2) +
                      ": mean " + num(e.mean.meanProportion, 3) + " vs unperturbed " +
                      num(e.unperturbed.proportion, 3) + " (|diff| " + num(gap, 3) + ", want <= 0.15; accepted " +
                      std::to_string(e.mean.acceptedTrials) + "/100)";
        }

    // Byte-identical reruns of the file outputs.
    const fs::path root = fs::temp_directory_path() / "skinfx-acceptance-disorder";
    fs::remove_all(root);
    ExperimentConfig cfg;
    cfg.n = 40;
    cfg.trials = 4;
    cfg.epsilon = 0.2;
    cfg.seed = 3;
    std::vector<std::string> contents[2];
    for (int rep = 0; rep < 2; ++rep) {
        cfg.out = root / std::to_string(rep);
        const CommandResult r = cmd_disorder(cfg);
        for (const auto& f : r.files) contents[rep].push_back(read_file(cfg.out / f));
    }
    fs::remove_all(root);
    const bool identical = contents[0] == contents[1];
    ok = ok && identical;
    detail += identical ? "; reruns byte-identical" : "; reruns differ";
    return {ok, detail};
}

}  // namespace

int main() {
    emit("skinfx acceptance (" + std::string(kToolVersion) + ")");
    criterion("bem-correctness", 1.0, bem_correctness);
    criterion("gamma-zero-reduction", 5.0, gamma_zero_reduction);

    const GaugeCapacitanceMatrix c100 = chain_matrix(100, 1.0);
    criterion("entry-decay", 120.0, [&] { return entry_decay(c100); });
    criterion("toeplitz-deviation", 300.0, toeplitz_deviation_uniformity);
    criterion("winding", 30.0 + 10.0, winding);
    criterion("eigenvalue-realness", 120.0, [&] { return realness(c100); });

    PseudomodeRun pm;
    criterion("pseudomode-quality", 120.0, [&] {
        pm = build_pseudomodes();
        return pseudomode_quality(pm);
    });
    criterion("transfer-bound", 60.0, [&] { return transfer_bound(pm); });
    criterion("condensation-trends", 900.0, condensation_trends);
    criterion("rectangle", 600.0, rectangle);
    criterion("disorder-stability", 2700.0, disorder);

    emit(std::to_string(failures) + " criteria red");
    return 0;
}
