#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "qtn/metrics.hpp"
#include "qtn/stepper.hpp"

namespace qtn {

/// One field at one time. `ny` is 0 for 1D fields.
struct Snapshot {
    double time{0.0};
    Index nx{0};
    Index ny{0};
    Eigen::VectorXd values; // flat, x outer

    bool operator==(const Snapshot& o) const {
        return time == o.time && nx == o.nx && ny == o.ny && values.size() == o.values.size() &&
               values == o.values;
    }
};

/// `%.17g` text, so every double survives a write/read cycle exactly.
std::string format_real(double v);

/// Header `# t=<time> nx=<nx> [ny=<ny>]`, then nx lines of ny values (2D) or
/// a single line of nx values (1D), separated by single spaces.
void write_snapshot(std::ostream& out, const Snapshot& s);
void write_snapshot(const std::filesystem::path& path, const Snapshot& s);
Snapshot read_snapshot(std::istream& in);
Snapshot read_snapshot(const std::filesystem::path& path);

Snapshot make_snapshot(const GridSpec& grid, double time, const Eigen::VectorXd& values);

/// `step_NNNNNN.txt`, zero padded to six digits.
std::string snapshot_file_name(Index step);

// Column headers; every writer emits exactly these, in this order.
inline constexpr const char* kHorizonHeader = "m,mean_rel_l2,std_rel_l2,n_restarts";
inline constexpr const char* kDiagnosticsHeader = "step,time,max_bond,discarded_weight,wall_ms";
inline constexpr const char* kBoundHeader = "m,delta_m,bound_m,L,e";
inline constexpr const char* kSummaryHeader = "quantity,value";

void write_horizon_csv(std::ostream& out, const HorizonCurve& curve);
void write_diagnostics_csv(std::ostream& out, const std::vector<StepDiagnostics>& rows);
void write_bound_csv(std::ostream& out, const ErrorBoundReport& report);
void write_summary_csv(std::ostream& out, const std::vector<std::pair<std::string, double>>& rows);

/// Parsed CSV: header names and numeric rows. Non-numeric cells become NaN.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

} // namespace qtn
