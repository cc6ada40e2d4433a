#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "skinfx/cli.hpp"
#include "skinfx/io.hpp"

using namespace skinfx;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "skinfx");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("skinfx-test-cli-" + name);
    fs::remove_all(p);
    return p;
}

bool has_provenance(const fs::path& file, const std::string& command) {
    return read_file(file).find("# skinfx 0.1.0 command=" + command + " config=") != std::string::npos;
}

nlohmann::json summary_of(const Run& r) {
    const auto nl = r.out.find('\n');
    return nlohmann::json::parse(r.out.substr(nl + 1));
}

}  // namespace

TEST_CASE("exit codes for help and bad usage") {
    CHECK(run({"--help"}).code == 0);
    CHECK(run({}).code == 2);
    CHECK(run({"capmat", "--no-such-flag"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"capmat", "--n", "many"}).code == 2);
    const fs::path dir = scratch_dir("usage");
    CHECK(run({"capmat", "--scenario", "torus", "--out", dir.string()}).code == 2);
    CHECK(run({"disorder", "--target", "radius", "--out", dir.string()}).code == 2);
    CHECK(run({"capmat", "--basis-l", "-1", "--out", dir.string()}).code == 2);
}

TEST_CASE("overlapping spheres exit with code 2 naming the pair") {
    const Run r = run({"capmat", "--n", "5", "--radius", "0.5", "--out", scratch_dir("overlap").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("0 and 1") != std::string::npos);
}

TEST_CASE("capmat writes matrices, decay data and provenance, byte-identically") {
    const fs::path a = scratch_dir("capmat-a"), b = scratch_dir("capmat-b");
    const Run ra = run({"capmat", "--n", "24", "--out", a.string()});
    REQUIRE(ra.code == 0);
    REQUIRE(run({"capmat", "--n", "24", "--out", b.string(), "--threads", "1"}).code == 0);
    for (const char* f : {"capmat_full.csv", "capmat_full.json", "capmat_banded.csv", "decay.csv", "layout.json",
                          "summary.json"}) {
        CAPTURE(f);
        REQUIRE(fs::exists(a / f));
        CHECK(read_file(a / f) == read_file(b / f));
    }
    CHECK(has_provenance(a / "decay.csv", "capmat"));
    const GaugeCapacitanceMatrix m = matrix_from_csv(read_file(a / "capmat_full.csv"));
    CHECK(m.size() == 24);
    CHECK(m.kind == MatrixKind::gauge);
    const GaugeCapacitanceMatrix j = matrix_from_json(nlohmann::json::parse(read_file(a / "capmat_full.json")));
    CHECK(j.entries == m.entries);
    const nlohmann::json s = summary_of(ra);
    CHECK(s.at("n") == 24);
    CHECK(s.at("decay").at("exponent").get<double>() > 0.0);
    CHECK(s.at("symmetric") == false);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("capmat at gamma = 0 reports a symmetric matrix") {
    const fs::path d = scratch_dir("capmat-g0");
    const Run r = run({"capmat", "--n", "20", "--gamma", "0", "--out", d.string()});
    REQUIRE(r.code == 0);
    CHECK(summary_of(r).at("symmetric") == true);
    fs::remove_all(d);
}

TEST_CASE("SKINFX_OUT overrides --out") {
    const fs::path env = scratch_dir("env"), flag = scratch_dir("flag");
    ::setenv("SKINFX_OUT", env.string().c_str(), 1);
    const Run r = run({"capmat", "--n", "20", "--out", flag.string()});
    ::unsetenv("SKINFX_OUT");
    REQUIRE(r.code == 0);
    CHECK(fs::exists(env / "capmat_full.csv"));
    CHECK_FALSE(fs::exists(flag));
    fs::remove_all(env);
}

TEST_CASE("TOML config supplies values and flags take precedence") {
    const fs::path d = scratch_dir("toml");
    fs::create_directories(d);
    write_atomic(d / "run.toml", "n = 22\ngamma = 0.5\nband-k = 3\n");
    const Run r = run({"capmat", "--config", (d / "run.toml").string(), "--gamma", "0.75", "--out", (d / "o").string()});
    REQUIRE(r.code == 0);
    const GaugeCapacitanceMatrix m = matrix_from_csv(read_file(d / "o" / "capmat_full.csv"));
    CHECK(m.size() == 22);
    CHECK(m.gamma.front() == 0.75);
    CHECK(matrix_from_csv(read_file(d / "o" / "capmat_banded.csv")).bandwidth == 3);
    CHECK(run({"capmat", "--config", (d / "missing.toml").string(), "--out", (d / "o").string()}).code == 2);
    fs::remove_all(d);
}

TEST_CASE("config hash distinguishes commands and result-relevant fields only") {
    ExperimentConfig a, b;
    b.out = "elsewhere";
    b.threads = 3;
    CHECK(a.hash("capmat") == b.hash("capmat"));
    CHECK(a.hash("capmat") != a.hash("symbol"));
    b.gamma = 0.5;
    CHECK(a.hash("capmat") != b.hash("capmat"));
    CHECK(a.hash("capmat").size() == 16);
}

TEST_CASE("symbol writes the curve, spectrum and winding data") {
    const fs::path d = scratch_dir("symbol");
    const Run r = run({"symbol", "--n", "30", "--band-k", "4", "--limit-r", "41", "--out", d.string()});
    REQUIRE(r.code == 0);
    const CsvTable spec = parse_csv(read_file(d / "spectrum.csv"));
    CHECK(spec.rows.size() == 30);
    int negative = 0;
    for (std::size_t i = 0; i < spec.rows.size(); ++i) {
        const std::string& w = spec.rows[i][spec.column("winding")];
        if (w == "-1") ++negative;
        CHECK((w == "-1" || w == "0" || w == "nan" || w == "none"));
    }
    CHECK(negative > 0);
    CHECK(parse_csv(read_file(d / "winding_grid.csv")).rows.size() == 64 * 64);
    for (const char* f : {"symbol_coefficients.csv", "symbol_curve.csv", "eigenvectors.csv"}) CHECK(has_provenance(d / f, "symbol"));
    fs::remove_all(d);
}

TEST_CASE("pseudomode writes one file per mode plus the summary") {
    const fs::path d = scratch_dir("pseudo");
    const Run r = run({"pseudomode", "--n", "30", "--band-k", "4", "--modes", "4", "--out", d.string()});
    REQUIRE(r.code == 0);
    const CsvTable s = parse_csv(read_file(d / "pseudomode_summary.csv"));
    CHECK(s.rows.size() == 4);
    for (std::size_t m = 0; m < 4; ++m) {
        const std::string stem = "pseudomode_m0" + std::to_string(m);
        CHECK(fs::exists(d / (stem + ".json")));
        // Modes at zero winding have no vector, only the sidecar.
        CHECK(fs::exists(d / (stem + ".csv")) == (s.rows[m][s.column("status")] == "constructed"));
    }
    CHECK(fs::exists(d / "tridiagonal.csv"));
    fs::remove_all(d);
}

TEST_CASE("condense sweeps and disorder reruns are reproducible") {
    const fs::path d = scratch_dir("condense");
    REQUIRE(run({"condense", "--n", "20", "--gammas", "0,1", "--sizes", "20,30", "--mode-gammas", "1", "--out",
                 d.string()})
                .code == 0);
    const CsvTable g = parse_csv(read_file(d / "condense_gamma.csv"));
    CHECK(g.rows.size() == 2);
    CHECK(g.number(0, "proportion") < g.number(1, "proportion"));
    CHECK(parse_csv(read_file(d / "condense_n.csv")).rows.size() == 2);

    const fs::path a = scratch_dir("disorder-a"), b = scratch_dir("disorder-b");
    for (const fs::path& p : {a, b})
        REQUIRE(run({"disorder", "--n", "20", "--trials", "3", "--epsilon", "0.2", "--target", "gamma", "--seed", "5",
                     "--out", p.string()})
                    .code == 0);
    for (const char* f : {"disorder_trials.csv", "disorder_mean.csv", "disorder_unperturbed.csv", "summary.json"})
        CHECK(read_file(a / f) == read_file(b / f));
    const fs::path c = scratch_dir("disorder-c");
    REQUIRE(run({"disorder", "--n", "20", "--trials", "3", "--epsilon", "0.2", "--target", "gamma", "--seed", "6",
                 "--out", c.string()})
                .code == 0);
    CHECK(read_file(a / "disorder_trials.csv") != read_file(c / "disorder_trials.csv"));
    for (const fs::path& p : {d, a, b, c}) fs::remove_all(p);
}

TEST_CASE("figures regenerates ten datasets with a manifest") {
    const fs::path d = scratch_dir("figures");
    const Run r = run({"figures", "--trials", "2", "--out", d.string()});
    REQUIRE(r.code == 0);
    const nlohmann::json m = nlohmann::json::parse(read_file(d / "manifest.json"));
    REQUIRE(m.at("figures").size() == 10);
    CHECK(m.at("version") == "0.1.0");
    for (int id = 1; id <= 10; ++id) {
        const nlohmann::json& f = m.at("figures")[static_cast<std::size_t>(id - 1)];
        CHECK(f.at("id") == id);
        for (const auto& run : f.at("runs")) {
            CHECK(run.at("config").get<std::string>().size() == 16);
            for (const auto& file : run.at("files")) CHECK(fs::exists(d / file.get<std::string>()));
        }
    }
    CHECK(fs::exists(d / "fig06" / "eps0.1" / "disorder_mean.csv"));
    CHECK(fs::exists(d / "fig07" / "eps0.2" / "disorder_mean.csv"));
    fs::remove_all(d);
}
