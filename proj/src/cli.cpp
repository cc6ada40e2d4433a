#include "skinfx/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <omp.h>

#include <CLI11.hpp>

#include "skinfx/io.hpp"
#include "skinfx/pseudomodes.hpp"
#include "skinfx/spectra.hpp"
#include "skinfx/toeplitz.hpp"

namespace skinfx {

namespace fs = std::filesystem;

const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::chain: return "chain";
        case Scenario::rectangle: return "rectangle";
        case Scenario::rhombus: return "rhombus";
    }
    return "chain";
}

Scenario scenario_from_string(const std::string& s) {
    if (s == "chain") return Scenario::chain;
    if (s == "rectangle") return Scenario::rectangle;
    if (s == "rhombus") return Scenario::rhombus;
    throw ConfigError("unknown scenario '" + s + "' (chain, rectangle, rhombus)");
}

namespace {

const char* target_name(DisorderTarget t) { return t == DisorderTarget::positions ? "positions" : "gamma"; }
const char* position_mode_name(PositionDisorder m) {
    return m == PositionDisorder::site_relative ? "site_relative" : "absolute";
}

}  // namespace

void ExperimentConfig::validate() const {
    if (n < 0) throw ConfigError("--n must be positive");
    if (perLine < 1) throw ConfigError("--per-line must be positive");
    if (lines < 0) throw ConfigError("--lines must be positive");
    if (scenario == Scenario::rhombus && lines > 0 && lines % 2 == 0)
        throw ConfigError("rhombus needs an odd number of lines");
    if (!std::isfinite(gamma)) throw ConfigError("--gamma must be finite");
    if (!(delta > 0.0)) throw ConfigError("--delta must be positive");
    if (!(speedInside > 0.0)) throw ConfigError("inside wave speed must be positive");
    if (!(radius > 0.0)) throw ConfigError("--radius must be positive");
    if (!(spacing > 0.0)) throw ConfigError("--spacing must be positive");
    if (lineGap < 0.0) throw ConfigError("--line-gap must be nonnegative");
    basis_spec(*this).validate();
    if (bandK < 1) throw ConfigError("--band-k must be >= 1");
    if (modes < 1) throw ConfigError("--modes must be >= 1");
    if (trials < 1) throw ConfigError("--trials must be >= 1");
    if (threads < 0) throw ConfigError("--threads must be nonnegative");
    DisorderSpec{epsilon, target, trials, seed, positionMode}.validate();
    condensation_criterion(*this).validate();
    for (int s : sizes)
        if (s < 1) throw ConfigError("sweep sizes must be positive");
}

nlohmann::json ExperimentConfig::to_json() const {
    // nlohmann::json objects keep keys sorted, so the dump is canonical.
    return {
        {"scenario", to_string(scenario)},
        {"n", n},
        {"per_line", perLine},
        {"lines", lines},
        {"line_gap", lineGap},
        {"rhombus_base", rhombusBase},
        {"gamma", gamma},
        {"delta", delta},
        {"speed_inside", speedInside},
        {"radius", radius},
        {"spacing", spacing},
        {"basis_l", basisL},
        {"quadrature", quadrature},
        {"band_k", bandK},
        {"limit_r", limitR},
        {"modes", modes},
        {"epsilon", epsilon},
        {"target", target_name(target)},
        {"position_mode", position_mode_name(positionMode)},
        {"trials", trials},
        {"seed", seed},
        {"head_fraction", headFraction},
        {"mass_fraction", massFraction},
        {"head_count", headCount},
        {"gammas", gammas},
        {"sizes", sizes},
        {"mode_gammas", modeGammas},
    };
}

std::string ExperimentConfig::hash(const std::string& command) const {
    return hex64(fnv1a(command + ":" + to_json().dump()));
}

SphereLayout build_layout(const ExperimentConfig& cfg, int defaultN) {
    const double gap = cfg.lineGap > 0.0 ? cfg.lineGap : cfg.spacing;
    switch (cfg.scenario) {
        case Scenario::chain: return build_chain(cfg.n_or(defaultN), cfg.spacing, cfg.radius);
        case Scenario::rectangle:
            return build_rectangle(cfg.perLine, cfg.lines > 0 ? cfg.lines : 2, cfg.spacing, gap, cfg.radius);
        case Scenario::rhombus:
            return build_rhombus(cfg.lines > 0 ? cfg.lines : 9, cfg.spacing, cfg.radius, cfg.rhombusBase, gap);
    }
    throw ConfigError("unknown scenario");
}

MaterialParams material_params(const ExperimentConfig& cfg) {
    return MaterialParams::uniform(cfg.gamma, cfg.delta, cfg.speedInside);
}

BasisSpec basis_spec(const ExperimentConfig& cfg) {
    BasisSpec b;
    b.maxDegree = cfg.basisL;
    b.quadratureOrder = cfg.quadrature;
    return b;
}

CondensationCriterion condensation_criterion(const ExperimentConfig& cfg) {
    CondensationCriterion c;
    c.headFraction = cfg.headFraction;
    c.massFraction = cfg.massFraction;
    c.headCount = cfg.headCount;
    if (c.headCount == 0 && cfg.scenario == Scenario::rectangle) c.headCount = 10 * (cfg.lines > 0 ? cfg.lines : 2);
    return c;
}

namespace {

std::string fmt(double x) { return format_double(x); }

class Emitter {
public:
    Emitter(const ExperimentConfig& cfg, std::string command)
        : root_(cfg.out), prov_{cfg.hash(command), std::move(command)} {}

    const Provenance& provenance() const { return prov_; }

    void table(const fs::path& name, CsvTable t) {
        t.comments.insert(t.comments.begin(), prov_.comment_line().substr(2));
        raw(name, t.str());
    }

    void json(const fs::path& name, nlohmann::json doc) {
        doc["provenance"] = {{"tool", std::string(kToolName)},
                             {"version", std::string(kToolVersion)},
                             {"command", prov_.command},
                             {"config", prov_.configHash}};
        raw(name, doc.dump(2) + "\n");
    }

    void raw(const fs::path& name, const std::string& contents) {
        write_atomic(root_ / name, contents);
        result_.files.push_back(name);
    }

    CommandResult finish(nlohmann::json summary) {
        summary["config"] = prov_.configHash;
        json("summary.json", summary);
        result_.summary = std::move(summary);
        return std::move(result_);
    }

private:
    fs::path root_;
    Provenance prov_;
    CommandResult result_;
};

void require_chain(const ExperimentConfig& cfg, const char* command) {
    if (cfg.scenario != Scenario::chain)
        throw ConfigError(std::string(command) + " needs the chain scenario (a translation-invariant symbol)");
}

std::string mode_name(std::size_t m) {
    std::ostringstream os;
    os << "mode_" << m;
    return os.str();
}

std::string numbered(const std::string& stem, std::size_t i, const std::string& ext) {
    std::ostringstream os;
    os << stem << std::setw(2) << std::setfill('0') << i << ext;
    return os.str();
}

// |v_j| per mode, one column per mode, rows in storage order.
CsvTable magnitude_table(const Eigen::MatrixXcd& vectors, std::size_t modes, const std::string& comment) {
    CsvTable t;
    t.comments.push_back(comment);
    t.columns.push_back("j");
    for (std::size_t m = 0; m < modes; ++m) t.columns.push_back(mode_name(m));
    for (Eigen::Index j = 0; j < vectors.rows(); ++j) {
        std::vector<std::string> row{std::to_string(j + 1)};
        for (std::size_t m = 0; m < modes; ++m) row.push_back(fmt(std::abs(vectors(j, static_cast<Eigen::Index>(m)))));
        t.add_row(std::move(row));
    }
    return t;
}

CsvTable layout_table(const SphereLayout& layout) {
    CsvTable t;
    t.columns = {"index", "rank", "x1", "x2", "x3"};
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const Vec3& c = layout.center(i);
        t.add_row({std::to_string(i), std::to_string(layout.rank()[i]), fmt(c[0]), fmt(c[1]), fmt(c[2])});
    }
    return t;
}

CsvTable report_table(const CondensationReport& r) {
    CsvTable t;
    t.comments.push_back("proportion=" + fmt(r.proportion) + " head=" + std::to_string(r.criterion.head_size(r.n)) +
                         " mass=" + fmt(r.criterion.massFraction) + " from=" + to_string(r.criterion.from));
    t.columns = {"mode_index", "re_lambda", "condensated", "decay_rate"};
    for (const auto& m : r.perMode)
        t.add_row({std::to_string(m.modeIndex), fmt(m.lambda.real()), m.condensated ? "1" : "0", fmt(m.decayRate)});
    return t;
}

// Wide table: row i is the x1-rank prefix length, one column per mode.
CsvTable degree_table(const std::vector<std::vector<double>>& curves, std::size_t n, const std::string& comment) {
    CsvTable t;
    t.comments.push_back(comment);
    t.columns.push_back("i");
    for (std::size_t m = 0; m < curves.size(); ++m) t.columns.push_back(mode_name(m));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> row{std::to_string(i + 1)};
        for (const auto& c : curves) row.push_back(fmt(c[i]));
        t.add_row(std::move(row));
    }
    return t;
}

std::vector<std::vector<double>> report_curves(const CondensationReport& r) {
    std::vector<std::vector<double>> out;
    for (const auto& m : r.perMode) out.push_back(m.degree);
    return out;
}

nlohmann::json report_summary(const CondensationReport& r) {
    return {{"n", r.n},
            {"proportion", r.proportion},
            {"condensated", r.condensated_count()},
            {"head", r.criterion.head_size(r.n)},
            {"mass_fraction", r.criterion.massFraction}};
}

}  // namespace

CommandResult cmd_capmat(const ExperimentConfig& cfg) {
    cfg.validate();
    Emitter e(cfg, "capmat");
    const SphereLayout layout = build_layout(cfg, 100);
    const GaugeCapacitanceMatrix c = compute_gauge_capacitance(layout, material_params(cfg), basis_spec(cfg));
    const std::size_t n = c.size();

    e.json("layout.json", layout_to_json(layout));
    e.raw("capmat_full.csv", matrix_to_csv(c, e.provenance()));
    e.raw("capmat_full.json", matrix_to_json(c, e.provenance()).dump() + "\n");
    const int k = std::min<int>(cfg.bandK, static_cast<int>(n));
    e.raw("capmat_banded.csv", matrix_to_csv(k_banded(c, k), e.provenance()));

    const double scale = c.entries.cwiseAbs().maxCoeff();
    const double asym = (c.entries - c.entries.transpose()).cwiseAbs().maxCoeff();
    nlohmann::json summary = {{"n", n},
                              {"scenario", to_string(cfg.scenario)},
                              {"gamma", cfg.gamma},
                              {"band_k", k},
                              {"max_abs_entry", scale},
                              {"asymmetry", asym},
                              {"symmetric", asym <= 1e-10 * scale}};

    if (cfg.scenario == Scenario::chain && n >= 20) {
        const DecayFit fit = decay_fit(c);
        const auto ctr = static_cast<Eigen::Index>(fit.center);
        CsvTable t;
        t.comments.push_back("row=" + std::to_string(fit.center) + " exponent=" + fmt(fit.exponent) +
                             " r2=" + fmt(fit.rSquared) + " window=" + std::to_string(fit.first) + ".." +
                             std::to_string(fit.last));
        t.columns = {"offset", "abs_entry", "fit"};
        for (Eigen::Index j = 1; ctr + j < static_cast<Eigen::Index>(n); ++j) {
            const double model = std::exp(fit.intercept) * std::pow(static_cast<double>(j), -fit.exponent);
            t.add_row({std::to_string(j), fmt(std::abs(c.entries(ctr, ctr + j))), fmt(model)});
        }
        e.table("decay.csv", std::move(t));
        summary["decay"] = {{"exponent", fit.exponent},
                            {"intercept", fit.intercept},
                            {"r_squared", fit.rSquared},
                            {"center", fit.center},
                            {"window", {fit.first, fit.last}}};
    }
    return e.finish(std::move(summary));
}

CommandResult cmd_symbol(const ExperimentConfig& cfg) {
    cfg.validate();
    require_chain(cfg, "symbol");
    Emitter e(cfg, "symbol");
    const SphereLayout layout = build_layout(cfg, 50);
    const MaterialParams params = material_params(cfg);
    const GaugeCapacitanceMatrix c = compute_gauge_capacitance(layout, params, basis_spec(cfg));
    const SpectralDecomposition d = eigendecompose(c);
    const SymbolCoefficients coeffs =
        limit_coefficients({cfg.spacing, cfg.radius}, params, cfg.bandK, cfg.limitR, basis_spec(cfg));

    CsvTable ct;
    ct.comments.push_back("k=" + std::to_string(cfg.bandK) + " limit_r=" + std::to_string(cfg.limitR) +
                          " drift=" + fmt(coeffs.drift));
    ct.columns = {"j", "a_j"};
    for (int j = -(cfg.bandK - 1); j <= cfg.bandK - 1; ++j) ct.add_row({std::to_string(j), fmt(coeffs.at(j))});
    e.table("symbol_coefficients.csv", std::move(ct));

    const SymbolCurve curve = sample_symbol_curve(coeffs, 1.0, std::max(1024, 64 * cfg.bandK));
    CsvTable st;
    st.columns = {"theta", "re", "im"};
    for (std::size_t m = 0; m < curve.theta.size(); ++m)
        st.add_row({fmt(curve.theta[m]), fmt(curve.values[m].real()), fmt(curve.values[m].imag())});
    e.table("symbol_curve.csv", std::move(st));

    WindingOptions probeOpts;
    probeOpts.maxSamples = 1 << 16;
    const std::vector<WindingSample> atEigen = winding_grid(coeffs, d.eigenvalues, probeOpts);
    CsvTable sp;
    sp.columns = {"index", "re_lambda", "im_lambda", "re_omega", "im_omega", "winding"};
    int interior = 0, onCurve = 0;
    double maxIm = 0.0, maxRe = 0.0;
    for (std::size_t m = 0; m < d.size(); ++m) {
        const cdouble w = resonant_frequency(d.eigenvalues[m]);
        const auto& ws = atEigen[m].winding;
        if (!ws) ++onCurve;
        else if (*ws != 0) ++interior;
        maxIm = std::max(maxIm, std::abs(d.eigenvalues[m].imag()));
        maxRe = std::max(maxRe, std::abs(d.eigenvalues[m].real()));
        sp.add_row({std::to_string(m), fmt(d.eigenvalues[m].real()), fmt(d.eigenvalues[m].imag()), fmt(w.real()),
                    fmt(w.imag()), ws ? std::to_string(*ws) : "nan"});
    }
    e.table("spectrum.csv", std::move(sp));
    e.table("eigenvectors.csv", magnitude_table(d.eigenvectors, d.size(), "|v_j| of every eigenvector, sorted by Re(lambda)"));

    const std::vector<WindingSample> grid = winding_grid(coeffs, curve_bounding_grid(curve, 64, 64), probeOpts);
    CsvTable gt;
    gt.columns = {"re_lambda", "im_lambda", "winding"};
    for (const auto& s : grid)
        gt.add_row({fmt(s.lambda.real()), fmt(s.lambda.imag()), s.winding ? std::to_string(*s.winding) : "nan"});
    e.table("winding_grid.csv", std::move(gt));

    std::map<int, int> windings;
    for (const auto& s : atEigen)
        if (s.winding) ++windings[*s.winding];
    nlohmann::json wj = nlohmann::json::object();
    for (const auto& [w, count] : windings) wj[std::to_string(w)] = count;
    return e.finish({{"n", d.size()},
                     {"gamma", cfg.gamma},
                     {"band_k", cfg.bandK},
                     {"coefficient_drift", coeffs.drift},
                     {"eigenvalue_windings", wj},
                     {"nonzero_winding", interior},
                     {"on_curve", onCurve},
                     {"max_abs_imag_over_real", maxRe > 0.0 ? maxIm / maxRe : 0.0}});
}

CommandResult cmd_pseudomode(const ExperimentConfig& cfg) {
    cfg.validate();
    require_chain(cfg, "pseudomode");
    Emitter e(cfg, "pseudomode");
    const SphereLayout layout = build_layout(cfg, 50);
    const MaterialParams params = material_params(cfg);
    const GaugeCapacitanceMatrix c = compute_gauge_capacitance(layout, params, basis_spec(cfg));
    const std::size_t n = c.size();
    const GaugeCapacitanceMatrix banded = k_banded(c, std::min<int>(cfg.bandK, static_cast<int>(n)));
    const SpectralDecomposition dFull = eigendecompose(c);
    const SpectralDecomposition dBand = eigendecompose(banded);
    const SymbolCoefficients coeffs =
        limit_coefficients({cfg.spacing, cfg.radius}, params, cfg.bandK, cfg.limitR, basis_spec(cfg));
    const std::size_t modes = std::min<std::size_t>(static_cast<std::size_t>(cfg.modes), n);

    CsvTable summary;
    summary.columns = {"mode",         "re_lambda",     "im_lambda",      "status",   "winding",
                       "side",         "angle_full_deg", "eig_banded_vs_full_deg", "residual_banded",
                       "residual_full", "sigma_min",    "rho",            "envelope_c", "budget",
                       "hypothesis",   "within_budget"};
    int aligned = 0, constructed = 0;
    for (std::size_t m = 0; m < modes; ++m) {
        const auto col = static_cast<Eigen::Index>(m);
        const cdouble lambda = dFull.eigenvalues[m];
        const double eigAngle = vector_angle(dBand.eigenvectors.col(col), dFull.eigenvectors.col(col));
        const double sigma = smallest_singular_direction(banded.entries, lambda).sigmaMin;
        nlohmann::json side = {{"mode", m},
                               {"re_lambda", lambda.real()},
                               {"im_lambda", lambda.imag()},
                               {"k", banded.bandwidth},
                               {"n", n},
                               {"sigma_min", sigma},
                               {"eig_banded_vs_full_deg", eigAngle}};
        try {
            PseudoMode pm = construct_pseudomode(banded, coeffs, lambda);
            const TransferCheck tc = verify_transfer(c, pm);
            const double angle = vector_angle(pm.vector, dFull.eigenvectors.col(col));
            ++constructed;
            if (angle <= 5.0) ++aligned;

            CsvTable mt;
            mt.comments.push_back("lambda=" + fmt(lambda.real()) + " side=" + to_string(pm.side) +
                                  " rho=" + fmt(pm.decayRate) + " c3=" + fmt(pm.envelopeConstant));
            mt.columns = {"j", "abs_vj", "envelope_bound", "abs_eigvec"};
            const double mx = pm.vector.cwiseAbs().maxCoeff();
            for (std::size_t j = 0; j < n; ++j) {
                const double dist = pm.side == ModeSide::left ? static_cast<double>(j) : static_cast<double>(n - 1 - j);
                const double bound = mx * pm.envelopeConstant * std::pow(pm.decayRate, dist);
                const auto jj = static_cast<Eigen::Index>(j);
                mt.add_row({std::to_string(j + 1), fmt(std::abs(pm.vector[jj])), fmt(bound),
                            fmt(std::abs(dFull.eigenvectors(jj, col)))});
            }
            e.table(numbered("pseudomode_m", m, ".csv"), std::move(mt));
            side.update({{"status", "constructed"},
                         {"side", to_string(pm.side)},
                         {"winding", pm.winding},
                         {"residual_banded", pm.residualBanded},
                         {"residual_full", tc.residualFull},
                         {"rho", pm.decayRate},
                         {"envelope_c", pm.envelopeConstant},
                         {"basis_condition", pm.basisCondition},
                         {"epsilon1", tc.epsilon1},
                         {"delta_k", tc.deltaK},
                         {"budget", std::isfinite(tc.budget) ? nlohmann::json(tc.budget) : nlohmann::json("inf")},
                         {"hypothesis", tc.hypothesisHolds},
                         {"within_budget", tc.withinBudget},
                         {"angle_full_deg", angle}});
            summary.add_row({std::to_string(m), fmt(lambda.real()), fmt(lambda.imag()), "constructed",
                             std::to_string(pm.winding), to_string(pm.side), fmt(angle), fmt(eigAngle),
                             fmt(pm.residualBanded), fmt(tc.residualFull), fmt(sigma), fmt(pm.decayRate),
                             fmt(pm.envelopeConstant), fmt(tc.budget), tc.hypothesisHolds ? "1" : "0",
                             tc.withinBudget ? "1" : "0"});
        } catch (const std::exception& ex) {
            // Winding zero or an on-curve probe: no decaying pseudomode at this lambda.
            side.update({{"status", "none"}, {"reason", ex.what()}});
            summary.add_row({std::to_string(m), fmt(lambda.real()), fmt(lambda.imag()), "none", "0", "-", "nan",
                             fmt(eigAngle), "nan", "nan", fmt(sigma), "nan", "nan", "nan", "0", "0"});
        }
        e.json(numbered("pseudomode_m", m, ".json"), side);
    }
    e.table("pseudomode_summary.csv", std::move(summary));

    // Nearest-neighbour comparison: eigenvectors of the tridiagonal part against the full matrix.
    const GaugeCapacitanceMatrix tri = k_banded(c, 2);
    const SpectralDecomposition dTri = eigendecompose(tri);
    CsvTable tt;
    tt.columns = {"mode", "re_lambda_full", "re_lambda_tridiagonal", "angle_deg"};
    Eigen::MatrixXcd overlay(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(2 * modes));
    for (std::size_t m = 0; m < modes; ++m) {
        const auto col = static_cast<Eigen::Index>(m);
        tt.add_row({std::to_string(m), fmt(dFull.eigenvalues[m].real()), fmt(dTri.eigenvalues[m].real()),
                    fmt(vector_angle(dTri.eigenvectors.col(col), dFull.eigenvectors.col(col)))});
        overlay.col(2 * col) = dFull.eigenvectors.col(col);
        overlay.col(2 * col + 1) = dTri.eigenvectors.col(col);
    }
    e.table("tridiagonal.csv", std::move(tt));
    e.table("tridiagonal_modes.csv",
            magnitude_table(overlay, 2 * modes, "columns alternate: full-matrix mode m, tridiagonal mode m"));

    return e.finish({{"n", n},
                     {"gamma", cfg.gamma},
                     {"band_k", banded.bandwidth},
                     {"modes", modes},
                     {"constructed", constructed},
                     {"aligned_within_5deg", aligned}});
}

CommandResult cmd_condense(const ExperimentConfig& cfg) {
    cfg.validate();
    Emitter e(cfg, "condense");
    const CondensationCriterion crit = condensation_criterion(cfg);
    const BasisSpec basis = basis_spec(cfg);
    auto report_for = [&](const SphereLayout& layout, double gamma) {
        ExperimentConfig g = cfg;
        g.gamma = gamma;
        const GaugeCapacitanceMatrix c = compute_gauge_capacitance(layout, material_params(g), basis);
        return std::pair{eigendecompose(c), layout};
    };

    if (cfg.scenario != Scenario::chain) {
        const SphereLayout layout = build_layout(cfg, 100);
        const auto [d, lay] = report_for(layout, cfg.gamma);
        const CondensationReport r = condensation_proportion(d, lay, crit);
        e.json("layout.json", layout_to_json(layout));
        e.table("layout.csv", layout_table(layout));
        e.table("report.csv", report_table(r));
        e.table("degrees.csv", degree_table(report_curves(r), r.n, "degree of condensation along x1-rank"));
        nlohmann::json s = report_summary(r);
        s["scenario"] = to_string(cfg.scenario);
        s["gamma"] = cfg.gamma;
        return e.finish(std::move(s));
    }

    const int n = cfg.n_or(100);
    const SphereLayout chain = build_chain(n, cfg.spacing, cfg.radius);
    CsvTable gt;
    gt.comments.push_back("n=" + std::to_string(n));
    gt.columns = {"gamma", "proportion", "condensated"};
    nlohmann::json gj = nlohmann::json::array();
    for (std::size_t i = 0; i < cfg.gammas.size(); ++i) {
        const auto [d, lay] = report_for(chain, cfg.gammas[i]);
        const CondensationReport r = condensation_proportion(d, lay, crit);
        gt.add_row({fmt(cfg.gammas[i]), fmt(r.proportion), std::to_string(r.condensated_count())});
        gj.push_back({{"gamma", cfg.gammas[i]}, {"proportion", r.proportion}});
        e.table(numbered("report_gamma_", i, ".csv"), report_table(r));
        e.table(numbered("degrees_gamma_", i, ".csv"),
                degree_table(report_curves(r), r.n, "gamma=" + fmt(cfg.gammas[i])));
    }
    e.table("condense_gamma.csv", std::move(gt));

    CsvTable nt;
    nt.comments.push_back("gamma=" + fmt(cfg.gamma));
    nt.columns = {"n", "proportion", "condensated"};
    nlohmann::json nj = nlohmann::json::array();
    for (int size : cfg.sizes) {
        const auto [d, lay] = report_for(build_chain(size, cfg.spacing, cfg.radius), cfg.gamma);
        const CondensationReport r = condensation_proportion(d, lay, crit);
        nt.add_row({std::to_string(size), fmt(r.proportion), std::to_string(r.condensated_count())});
        nj.push_back({{"n", size}, {"proportion", r.proportion}});
    }
    e.table("condense_n.csv", std::move(nt));

    for (std::size_t i = 0; i < cfg.modeGammas.size(); ++i) {
        const auto [d, lay] = report_for(chain, cfg.modeGammas[i]);
        CsvTable mt = magnitude_table(d.eigenvectors, d.size(), "gamma=" + fmt(cfg.modeGammas[i]));
        mt.columns.push_back("mean_abs");
        for (std::size_t j = 0; j < mt.rows.size(); ++j)
            mt.rows[j].push_back(fmt(d.eigenvectors.row(static_cast<Eigen::Index>(j)).cwiseAbs().mean()));
        e.table(numbered("modes_gamma_", i, ".csv"), std::move(mt));
    }
    return e.finish({{"n", n}, {"gamma_sweep", gj}, {"n_sweep", nj}});
}

CommandResult cmd_disorder(const ExperimentConfig& cfg) {
    cfg.validate();
    Emitter e(cfg, "disorder");
    const SphereLayout layout = build_layout(cfg, 100);
    const DisorderSpec spec{cfg.epsilon, cfg.target, cfg.trials, cfg.seed, cfg.positionMode};
    const EnsembleResult res =
        run_ensemble(layout, material_params(cfg), spec, condensation_criterion(cfg), basis_spec(cfg));

    CsvTable tt;
    tt.columns = {"trial", "accepted", "proportion"};
    for (std::size_t t = 0; t < res.trials.size(); ++t)
        tt.add_row({std::to_string(t), res.trials[t] ? "1" : "0",
                    res.trials[t] ? fmt(res.trials[t]->proportion) : "nan"});
    e.table("disorder_trials.csv", std::move(tt));
    const std::string tag = std::string("target=") + target_name(cfg.target) + " epsilon=" + fmt(cfg.epsilon) +
                            " accepted=" + std::to_string(res.mean.acceptedTrials) +
                            " rejected=" + std::to_string(res.mean.rejectedTrials);
    e.table("disorder_mean.csv", degree_table(res.mean.meanCurves, layout.size(), "mean degree of condensation " + tag));
    e.table("disorder_unperturbed.csv",
            degree_table(report_curves(res.unperturbed), layout.size(), "unperturbed degree of condensation"));
    return e.finish({{"n", layout.size()},
                     {"target", target_name(cfg.target)},
                     {"position_mode", position_mode_name(cfg.positionMode)},
                     {"epsilon", cfg.epsilon},
                     {"trials", cfg.trials},
                     {"accepted", res.mean.acceptedTrials},
                     {"rejected", res.mean.rejectedTrials},
                     {"mean_proportion", res.mean.meanProportion},
                     {"unperturbed_proportion", res.unperturbed.proportion}});
}

namespace {

std::string shortest(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

}  // namespace

CommandResult cmd_figures(const ExperimentConfig& cfg) {
    cfg.validate();
    CommandResult all;
    nlohmann::json figures = nlohmann::json::array();

    auto run = [&](int id, const std::string& title, const std::string& sub, ExperimentConfig c,
                   CommandResult (*cmd)(const ExperimentConfig&), const std::string& command, nlohmann::json axes) {
        std::ostringstream dir;
        dir << "fig" << std::setw(2) << std::setfill('0') << id;
        const fs::path rel = sub.empty() ? fs::path(dir.str()) : fs::path(dir.str()) / sub;
        c.out = cfg.out / rel;
        const CommandResult r = cmd(c);
        nlohmann::json files = nlohmann::json::array();
        for (const auto& f : r.files) {
            files.push_back((rel / f).generic_string());
            all.files.push_back(rel / f);
        }
        nlohmann::json* entry = nullptr;
        for (auto& f : figures)
            if (f["id"] == id) entry = &f;
        if (!entry) {
            figures.push_back({{"id", id}, {"title", title}, {"dir", dir.str()}, {"axes", axes}, {"runs", nlohmann::json::array()}});
            entry = &figures.back();
        }
        (*entry)["runs"].push_back({{"command", command}, {"subdir", sub}, {"config", c.hash(command)}, {"files", files}});
    };

    ExperimentConfig base = cfg;
    base.scenario = Scenario::chain;
    base.n = 0;
    base.lines = 0;
    base.headCount = 0;

    ExperimentConfig f1 = base;
    f1.gamma = 1.0;
    run(1, "entry decay, N=100, gamma=1", "", f1, cmd_capmat, "capmat", {{"x", "log"}, {"y", "log"}, {"data", "decay.csv"}});

    ExperimentConfig f2 = base;
    f2.gamma = 1.0;
    f2.bandK = 10;
    run(2, "symbol curve and eigenvalues, N=50, gamma=1, k=10", "", f2, cmd_symbol, "symbol",
        {{"x", "re"}, {"y", "im"}, {"data", "symbol_curve.csv"}, {"overlay", "spectrum.csv"}});
    ExperimentConfig f3 = f2;
    f3.gamma = -1.0;
    run(3, "symbol curve and eigenvalues, N=50, gamma=-1, k=10", "", f3, cmd_symbol, "symbol",
        {{"x", "re"}, {"y", "im"}, {"data", "symbol_curve.csv"}, {"overlay", "spectrum.csv"}});

    ExperimentConfig f4 = f2;
    f4.modes = 20;
    run(4, "pseudomodes of the 10-banded matrix against eigenmodes, N=50, gamma=1", "", f4, cmd_pseudomode,
        "pseudomode", {{"x", "j"}, {"y", "abs"}, {"data", "pseudomode_summary.csv"}});

    ExperimentConfig f5 = base;
    f5.gamma = 1.0;
    run(5, "proportion of condensated eigenmodes", "", f5, cmd_condense, "condense",
        {{"x", "gamma|n"}, {"y", "proportion"}, {"data", "condense_gamma.csv"}});

    for (const auto target : {DisorderTarget::positions, DisorderTarget::gamma}) {
        const int id = target == DisorderTarget::positions ? 6 : 7;
        for (const double eps : {0.1, 0.2}) {
            ExperimentConfig fd = base;
            fd.gamma = 1.0;
            fd.target = target;
            fd.epsilon = eps;
            run(id,
                std::string("average degrees of condensation under ") + target_name(target) + " disorder",
                "eps" + shortest(eps), fd, cmd_disorder, "disorder",
                {{"x", "i"}, {"y", "degree"}, {"data", "disorder_mean.csv"}, {"reference", "disorder_unperturbed.csv"}});
        }
    }

    ExperimentConfig rect = cfg;
    rect.scenario = Scenario::rectangle;
    rect.perLine = 100;
    rect.lines = 2;
    rect.gamma = 1.0;
    rect.headCount = 0;
    {
        // The structure alone: the layout files of the rectangle run.
        const SphereLayout layout = build_layout(rect, 0);
        ExperimentConfig f8 = rect;
        f8.out = cfg.out / "fig08";
        Emitter e(f8, "layout");
        e.json("layout.json", layout_to_json(layout));
        e.table("layout.csv", layout_table(layout));
        const CommandResult r = e.finish({{"n", layout.size()}, {"scenario", "rectangle"}});
        nlohmann::json files = nlohmann::json::array();
        for (const auto& f : r.files) {
            files.push_back(("fig08" / f).generic_string());
            all.files.push_back("fig08" / f);
        }
        figures.push_back({{"id", 8},
                           {"title", "rectangle structure, two lines of 100"},
                           {"dir", "fig08"},
                           {"axes", {{"x", "x1"}, {"y", "x2"}, {"data", "layout.csv"}}},
                           {"runs", {{{"command", "layout"}, {"subdir", ""}, {"config", f8.hash("layout")}, {"files", files}}}}});
    }
    run(9, "degrees of condensation on the rectangle, gamma=1", "", rect, cmd_condense, "condense",
        {{"x", "i"}, {"y", "degree"}, {"data", "degrees.csv"}});

    ExperimentConfig rh = cfg;
    rh.scenario = Scenario::rhombus;
    rh.lines = 9;
    rh.gamma = 2.0;
    rh.headCount = 0;
    run(10, "degrees of condensation on the nine-line rhombus, gamma=2", "", rh, cmd_condense, "condense",
        {{"x", "i"}, {"y", "degree"}, {"data", "degrees.csv"}});

    const std::string hash = cfg.hash("figures");
    nlohmann::json manifest = {{"tool", std::string(kToolName)},
                               {"version", std::string(kToolVersion)},
                               {"config", hash},
                               {"figures", figures}};
    write_atomic(cfg.out / "manifest.json", manifest.dump(2) + "\n");
    all.files.emplace_back("manifest.json");
    all.summary = {{"figures", figures.size()}, {"config", hash}};
    return all;
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return s;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg;
    std::string scenario = "chain", target = "positions", positionMode = "site_relative", outDir = cfg.out.string();

    CLI::App app{"Gauge capacitance matrices and the non-Hermitian skin effect in chains of spherical resonators"};
    app.set_config("--config", "", "TOML file with option values (command-line flags take precedence)");
    app.require_subcommand(1, 1);
    app.add_option("--scenario", scenario, "chain, rectangle or rhombus");
    app.add_option("--n", cfg.n, "number of resonators in a chain (default per command)");
    app.add_option("--per-line", cfg.perLine, "resonators per line (rectangle)");
    app.add_option("--lines", cfg.lines, "number of lines (rectangle 2, rhombus 9)");
    app.add_option("--line-gap", cfg.lineGap, "distance between lines along x2 (default: spacing)");
    app.add_option("--rhombus-base", cfg.rhombusBase, "resonators on the middle rhombus line");
    app.add_option("--gamma", cfg.gamma, "imaginary gauge potential");
    app.add_option("--delta", cfg.delta, "material contrast");
    app.add_option("--radius", cfg.radius, "sphere radius");
    app.add_option("--spacing", cfg.spacing, "center-to-center spacing along x1");
    app.add_option("--basis-l", cfg.basisL, "maximal spherical-harmonic degree per sphere");
    app.add_option("--quadrature", cfg.quadrature, "maximal polar quadrature order");
    app.add_option("--band-k", cfg.bandK, "bandwidth k of the banded approximation");
    app.add_option("--limit-r", cfg.limitR, "odd chain length used for the limiting symbol");
    app.add_option("--modes", cfg.modes, "number of pseudomodes to construct");
    app.add_option("--epsilon", cfg.epsilon, "disorder half-width");
    app.add_option("--target", target, "disorder target: positions or gamma");
    app.add_option("--position-mode", positionMode, "site_relative (x1 += eps*spacing) or absolute (x1 *= 1+eps)");
    app.add_option("--trials", cfg.trials, "disorder trials");
    app.add_option("--seed", cfg.seed, "random seed");
    app.add_option("--head-fraction", cfg.headFraction, "head share of resonators for condensation");
    app.add_option("--mass-fraction", cfg.massFraction, "norm share the head must exceed");
    app.add_option("--head-count", cfg.headCount, "explicit head size (overrides head fraction)");
    app.add_option("--gammas", cfg.gammas, "gamma sweep for condense")->delimiter(',');
    app.add_option("--sizes", cfg.sizes, "N sweep for condense")->delimiter(',');
    app.add_option("--mode-gammas", cfg.modeGammas, "gammas whose eigenmodes condense writes")->delimiter(',');
    app.add_option("--threads", cfg.threads, "worker thread cap (0: runtime default)");
    app.add_option("--out", outDir, "output directory (SKINFX_OUT overrides)");

    struct Command {
        const char* name;
        const char* help;
        CommandResult (*fn)(const ExperimentConfig&);
    };
    const Command commands[] = {
        {"capmat", "full and banded gauge capacitance matrices with the entry-decay fit", cmd_capmat},
        {"symbol", "symbol curve, eigenvalues and winding numbers", cmd_symbol},
        {"pseudomode", "pseudomodes of the banded matrix and the transfer check", cmd_pseudomode},
        {"condense", "proportion of condensated eigenmodes", cmd_condense},
        {"disorder", "seeded disorder ensembles", cmd_disorder},
        {"figures", "every figure dataset plus a manifest", cmd_figures},
    };
    std::vector<CLI::App*> subs;
    for (const auto& c : commands) subs.push_back(app.add_subcommand(c.name, c.help)->fallthrough());

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        cfg.scenario = scenario_from_string(lower(scenario));
        target = lower(target);
        if (target == "positions") cfg.target = DisorderTarget::positions;
        else if (target == "gamma") cfg.target = DisorderTarget::gamma;
        else throw ConfigError("unknown disorder target '" + target + "' (positions, gamma)");
        positionMode = lower(positionMode);
        if (positionMode == "site_relative") cfg.positionMode = PositionDisorder::site_relative;
        else if (positionMode == "absolute") cfg.positionMode = PositionDisorder::absolute_scaling;
        else throw ConfigError("unknown position mode '" + positionMode + "' (site_relative, absolute)");
        const char* env = std::getenv("SKINFX_OUT");
        cfg.out = env && *env ? fs::path(env) : fs::path(outDir);
        if (cfg.threads > 0) omp_set_num_threads(cfg.threads);

        for (std::size_t i = 0; i < subs.size(); ++i) {
            if (!subs[i]->parsed()) continue;
            const CommandResult r = commands[i].fn(cfg);
            out << commands[i].name << ": wrote " << r.files.size() << " files to " << cfg.out.string() << '\n';
            out << r.summary.dump() << '\n';
        }
        return 0;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::bad_alloc&) {
        err << "numerical failure: out of memory\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace skinfx
