#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "skinfx/bem.hpp"
#include "skinfx/geometry.hpp"

namespace skinfx {

inline constexpr std::string_view kToolName = "skinfx";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// 17 significant digits, '.' decimal point, independent of the C locale.
/// Round-trips every finite double exactly; inf and nan print as inf, -inf, nan.
std::string format_double(double x);
/// Inverse of format_double. Throws ConfigError on malformed input.
double parse_double(std::string_view text);

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t x);

/// Stamped into every output so a file can be traced to the run that made it.
struct Provenance {
    std::string configHash;
    std::string command;

    /// "# skinfx <version> command=<command> config=<hash>"
    std::string comment_line() const;
};

struct CsvTable {
    std::vector<std::string> comments;  // without the leading "# "
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells);
    std::string str() const;
    std::size_t column(std::string_view name) const;
    double number(std::size_t row, std::string_view name) const;
};

/// Lines starting with '#' are comments; the first other line holds the column names.
CsvTable parse_csv(std::string_view text);

/// Writes to a sibling temporary file and renames it over `path`, creating
/// parent directories as needed.
void write_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

/// Row-major CSV with header
/// "# gauge-capacitance N=.. gamma=.. delta=.. kind=.. k=.. basis_l=.. quad=.. layout=..";
/// per-resonator gamma and contrast lists follow as comment lines when nonuniform.
std::string matrix_to_csv(const GaugeCapacitanceMatrix& matrix, const Provenance& provenance);
GaugeCapacitanceMatrix matrix_from_csv(std::string_view text);

/// JSON envelope {"format", "version", "provenance", "metadata", "data"} with
/// the entries as nested row arrays.
nlohmann::json matrix_to_json(const GaugeCapacitanceMatrix& matrix, const Provenance& provenance);
GaugeCapacitanceMatrix matrix_from_json(const nlohmann::json& doc);

/// {"radius": r, "spacing": s, "centers": [[x, y, z], ...]}
nlohmann::json layout_to_json(const SphereLayout& layout);
SphereLayout layout_from_json(const nlohmann::json& doc);

}  // namespace skinfx
