#include "qtn/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace qtn {

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_snapshot(std::ostream& out, const Snapshot& s) {
    const Index cols = s.ny > 0 ? s.ny : s.nx;
    const Index rows = s.ny > 0 ? s.nx : 1;
    if (s.values.size() != rows * cols) throw ShapeError("write_snapshot: value count does not match nx, ny");
    out << "# t=" << format_real(s.time) << " nx=" << s.nx;
    if (s.ny > 0) out << " ny=" << s.ny;
    out << '\n';
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            if (c) out << ' ';
            out << format_real(s.values(r * cols + c));
        }
        out << '\n';
    }
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& s) {
    std::ostringstream ss;
    write_snapshot(ss, s);
    write_text_file(path, ss.str());
}

Snapshot read_snapshot(std::istream& in) {
    std::string header;
    if (!std::getline(in, header) || header.rfind("# ", 0) != 0)
        throw ShapeError("read_snapshot: missing '# t=... nx=...' header");
    Snapshot s;
    bool has_t = false;
    std::istringstream hs(header.substr(2));
    std::string field;
    while (hs >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) throw ShapeError("read_snapshot: bad header field '" + field + "'");
        const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
        if (key == "t") {
            s.time = std::strtod(value.c_str(), nullptr);
            has_t = true;
        } else if (key == "nx") {
            s.nx = std::stol(value);
        } else if (key == "ny") {
            s.ny = std::stol(value);
        } else {
            throw ShapeError("read_snapshot: unknown header field '" + key + "'");
        }
    }
    if (!has_t || s.nx <= 0) throw ShapeError("read_snapshot: header needs t and nx");
    const Index count = s.ny > 0 ? s.nx * s.ny : s.nx;
    s.values.resize(count);
    std::string token;
    for (Index i = 0; i < count; ++i) {
        if (!(in >> token)) throw ShapeError("read_snapshot: expected " + std::to_string(count) + " values");
        s.values(i) = std::strtod(token.c_str(), nullptr);
    }
    if (in >> token) throw ShapeError("read_snapshot: trailing values");
    return s;
}

Snapshot read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    return read_snapshot(in);
}

Snapshot make_snapshot(const GridSpec& grid, double time, const Eigen::VectorXd& values) {
    if (values.size() != grid.size()) throw ShapeError("make_snapshot: field size does not match grid");
    return Snapshot{time, grid.points(0), grid.spatial_dim() == 2 ? grid.points(1) : 0, values};
}

std::string snapshot_file_name(Index step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "step_%06ld.txt", static_cast<long>(step));
    return buf;
}

void write_horizon_csv(std::ostream& out, const HorizonCurve& curve) {
    out << kHorizonHeader << '\n';
    for (std::size_t i = 0; i < curve.horizons.size(); ++i)
        out << curve.horizons[i] << ',' << format_real(curve.mean[i]) << ',' << format_real(curve.std_dev[i]) << ','
            << curve.restarts[i] << '\n';
}

void write_diagnostics_csv(std::ostream& out, const std::vector<StepDiagnostics>& rows) {
    out << kDiagnosticsHeader << '\n';
    for (const auto& r : rows)
        out << r.step << ',' << format_real(r.time) << ',' << r.max_bond << ',' << format_real(r.discarded_weight)
            << ',' << format_real(r.wall_ms) << '\n';
}

void write_bound_csv(std::ostream& out, const ErrorBoundReport& report) {
    out << kBoundHeader << '\n';
    for (std::size_t m = 0; m < report.delta.size(); ++m)
        out << m << ',' << format_real(report.delta[m]) << ',' << format_real(report.bound[m]) << ','
            << format_real(report.lipschitz) << ',' << format_real(report.one_step_error) << '\n';
}

void write_summary_csv(std::ostream& out, const std::vector<std::pair<std::string, double>>& rows) {
    out << kSummaryHeader << '\n';
    for (const auto& [name, value] : rows) out << name << ',' << format_real(value) << '\n';
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw ShapeError("csv: no column '" + name + "'");
}

CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(s);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        return cells;
    };
    if (!std::getline(in, line)) throw ShapeError("csv: empty input");
    t.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != t.header.size()) throw ShapeError("csv: row width differs from header");
        std::vector<double> row;
        for (const auto& c : cells) {
            char* end = nullptr;
            const double v = std::strtod(c.c_str(), &end);
            row.push_back(end == c.c_str() ? std::numeric_limits<double>::quiet_NaN() : v);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    return read_csv(in);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace qtn
