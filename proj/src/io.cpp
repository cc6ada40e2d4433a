#include "skinfx/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <system_error>

namespace skinfx {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
    if (text == "nan") return std::nan("");
    if (text == "inf") return INFINITY;
    if (text == "-inf") return -INFINITY;
    double x = 0.0;
    const char* first = text.data();
    if (!text.empty() && text.front() == '+') ++first;
    const auto res = std::from_chars(first, text.data() + text.size(), x);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ConfigError("malformed number '" + std::string(text) + "'");
    return x;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t x) {
    char buf[17];
    const auto res = std::to_chars(buf, buf + 16, x, 16);
    std::string s(buf, res.ptr);
    return std::string(16 - s.size(), '0') + s;
}

std::string Provenance::comment_line() const {
    std::string s = "# ";
    s += kToolName;
    s += ' ';
    s += kToolVersion;
    s += " command=" + (command.empty() ? std::string("-") : command);
    s += " config=" + (configHash.empty() ? std::string("-") : configHash);
    return s;
}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (!columns.empty() && cells.size() != columns.size())
        throw ConfigError("CSV row width does not match the header");
    rows.push_back(std::move(cells));
}

std::string CsvTable::str() const {
    std::string out;
    for (const auto& c : comments) out += "# " + c + "\n";
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    if (!columns.empty()) line(columns);
    for (const auto& r : rows) line(r);
    return out;
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw ConfigError("CSV has no column '" + std::string(name) + "'");
}

double CsvTable::number(std::size_t row, std::string_view name) const {
    return parse_double(rows.at(row).at(column(name)));
}

namespace {

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(sep, start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    while (!text.empty()) {
        const std::size_t pos = text.find('\n');
        std::string_view l = text.substr(0, pos);
        if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
        out.push_back(l);
        if (pos == std::string_view::npos) break;
        text.remove_prefix(pos + 1);
    }
    return out;
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
    CsvTable t;
    bool header = false;
    for (std::string_view l : lines_of(text)) {
        if (l.empty()) continue;
        if (l.front() == '#') {
            l.remove_prefix(1);
            if (!l.empty() && l.front() == ' ') l.remove_prefix(1);
            t.comments.emplace_back(l);
        } else if (!header) {
            t.columns = split(l, ',');
            header = true;
        } else {
            t.add_row(split(l, ','));
        }
    }
    return t;
}

void write_atomic(const std::filesystem::path& path, std::string_view contents) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw ConfigError("cannot open " + tmp.string() + " for writing");
        os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!os) throw ConfigError("write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw ConfigError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open " + path.string());
    return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

namespace {

bool uniform(const std::vector<double>& v) {
    for (double x : v)
        if (x != v.front()) return false;
    return true;
}

std::string joined(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ';';
        s += format_double(v[i]);
    }
    return s;
}

std::vector<double> per_resonator(std::string_view listed, std::size_t n) {
    std::vector<double> out;
    for (const auto& part : split(listed, ';')) out.push_back(parse_double(part));
    if (out.size() == 1) out.assign(n, out.front());
    if (out.size() != n) throw ConfigError("per-resonator list has the wrong length");
    return out;
}

std::map<std::string, std::string> key_values(std::string_view line) {
    std::map<std::string, std::string> kv;
    for (const auto& tok : split(line, ' ')) {
        const std::size_t eq = tok.find('=');
        if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return kv;
}

const std::string& need(const std::map<std::string, std::string>& kv, const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError("matrix header lacks '" + key + "'");
    return it->second;
}

int to_int(const std::string& s) {
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("malformed integer '" + s + "'");
    return v;
}

std::uint64_t from_hex(const std::string& s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v, 16);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("malformed hash '" + s + "'");
    return v;
}

}  // namespace

std::string matrix_to_csv(const GaugeCapacitanceMatrix& m, const Provenance& provenance) {
    const std::size_t n = m.size();
    std::ostringstream os;
    os << "# gauge-capacitance N=" << n << " gamma=" << (m.gamma.empty() ? "0" : format_double(m.gamma.front()))
       << " delta=" << format_double(m.delta()) << " kind=" << to_string(m.kind) << " k=" << m.bandwidth
       << " basis_l=" << m.basis.maxDegree << " quad=" << m.basis.quadratureOrder << " layout=" << hex64(m.layoutHash)
       << '\n';
    if (!m.gamma.empty() && !uniform(m.gamma)) os << "# gamma_i=" << joined(m.gamma) << '\n';
    if (!m.contrast.empty() && !uniform(m.contrast)) os << "# contrast_i=" << joined(m.contrast) << '\n';
    os << provenance.comment_line() << '\n';
    std::string body = os.str();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j) body += ',';
            body += format_double(m.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        }
        body += '\n';
    }
    return body;
}

GaugeCapacitanceMatrix matrix_from_csv(std::string_view text) {
    const std::vector<std::string_view> lines = lines_of(text);
    if (lines.empty() || lines.front().rfind("# gauge-capacitance ", 0) != 0)
        throw ConfigError("not a gauge-capacitance CSV (missing header)");
    const auto kv = key_values(lines.front());
    GaugeCapacitanceMatrix m;
    const int n = to_int(need(kv, "N"));
    if (n < 1) throw ConfigError("matrix header has N < 1");
    const auto nn = static_cast<std::size_t>(n);
    m.kind = matrix_kind_from_string(need(kv, "kind"));
    m.bandwidth = to_int(need(kv, "k"));
    m.basis.maxDegree = to_int(need(kv, "basis_l"));
    m.basis.quadratureOrder = to_int(need(kv, "quad"));
    m.layoutHash = from_hex(need(kv, "layout"));
    m.gamma.assign(nn, parse_double(need(kv, "gamma")));
    m.contrast.assign(nn, parse_double(need(kv, "delta")));
    m.entries.resize(n, n);
    Eigen::Index row = 0;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::string_view l = lines[li];
        if (l.empty()) continue;
        if (l.front() == '#') {
            if (l.rfind("# gamma_i=", 0) == 0) m.gamma = per_resonator(l.substr(10), nn);
            if (l.rfind("# contrast_i=", 0) == 0) m.contrast = per_resonator(l.substr(13), nn);
            continue;
        }
        if (row >= n) throw ConfigError("matrix CSV has more than N rows");
        const auto cells = split(l, ',');
        if (cells.size() != nn) throw ConfigError("matrix CSV row has the wrong number of entries");
        for (std::size_t j = 0; j < nn; ++j) m.entries(row, static_cast<Eigen::Index>(j)) = parse_double(cells[j]);
        ++row;
    }
    if (row != n) throw ConfigError("matrix CSV has fewer than N rows");
    return m;
}

nlohmann::json matrix_to_json(const GaugeCapacitanceMatrix& m, const Provenance& provenance) {
    nlohmann::json data = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.entries.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.entries.cols(); ++j) row.push_back(m.entries(i, j));
        data.push_back(std::move(row));
    }
    return {
        {"format", "gauge-capacitance"},
        {"version", std::string(kToolVersion)},
        {"provenance", {{"command", provenance.command}, {"config", provenance.configHash}}},
        {"metadata",
         {{"N", m.size()},
          {"kind", to_string(m.kind)},
          {"k", m.bandwidth},
          {"gamma", m.gamma},
          {"contrast", m.contrast},
          {"basis_l", m.basis.maxDegree},
          {"quad", m.basis.quadratureOrder},
          {"layout", hex64(m.layoutHash)}}},
        {"data", std::move(data)},
    };
}

GaugeCapacitanceMatrix matrix_from_json(const nlohmann::json& doc) {
    try {
        if (doc.at("format") != "gauge-capacitance") throw ConfigError("JSON is not a gauge-capacitance envelope");
        const auto& meta = doc.at("metadata");
        GaugeCapacitanceMatrix m;
        const auto n = meta.at("N").get<std::size_t>();
        m.kind = matrix_kind_from_string(meta.at("kind").get<std::string>());
        m.bandwidth = meta.at("k").get<int>();
        m.gamma = meta.at("gamma").get<std::vector<double>>();
        m.contrast = meta.at("contrast").get<std::vector<double>>();
        m.basis.maxDegree = meta.at("basis_l").get<int>();
        m.basis.quadratureOrder = meta.at("quad").get<int>();
        m.layoutHash = from_hex(meta.at("layout").get<std::string>());
        const auto& data = doc.at("data");
        if (data.size() != n) throw ConfigError("matrix JSON has the wrong number of rows");
        const auto nn = static_cast<Eigen::Index>(n);
        m.entries.resize(nn, nn);
        for (Eigen::Index i = 0; i < nn; ++i) {
            const auto& row = data.at(static_cast<std::size_t>(i));
            if (row.size() != n) throw ConfigError("matrix JSON row has the wrong length");
            for (Eigen::Index j = 0; j < nn; ++j) m.entries(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed matrix JSON: ") + e.what());
    }
}

nlohmann::json layout_to_json(const SphereLayout& layout) {
    nlohmann::json centers = nlohmann::json::array();
    for (const auto& c : layout.centers()) centers.push_back({c[0], c[1], c[2]});
    return {{"radius", layout.radius()}, {"spacing", layout.spacing()}, {"centers", std::move(centers)}};
}

SphereLayout layout_from_json(const nlohmann::json& doc) {
    try {
        std::vector<Vec3> centers;
        for (const auto& c : doc.at("centers")) {
            if (c.size() != 3) throw ConfigError("layout center must have three coordinates");
            centers.push_back({c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()});
        }
        return SphereLayout(std::move(centers), doc.at("radius").get<double>(), doc.at("spacing").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed layout JSON: ") + e.what());
    }
}

}  // namespace skinfx
