#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qtn/config.hpp"
#include "qtn/manifest.hpp"
#include "qtn/metrics.hpp"

namespace qtn {

struct ExperimentOptions {
    bool write_files{true};
    std::function<void(const std::string&)> log; // progress lines, may be empty
};

struct ExperimentResult {
    RunManifest manifest;
    std::filesystem::path output_dir;
    HorizonCurve horizon;
    std::optional<ErrorBoundReport> bound;
    std::vector<std::pair<std::string, double>> summary;
    int exit_code{0}; // 0 ok, 2 numerical failure

    bool completed() const noexcept { return exit_code == 0; }
};

/// Least-squares slope of the mean curve against log10(m), over m >= 1.
double log_horizon_slope(const HorizonCurve& curve);

/// Runs the compressed rollout, the dense Euler and RK45 references, the
/// restart sweep and (linear kinds) the error bound, and writes
///   manifest.json, summary.csv, diagnostics.csv, horizon.csv, bound.csv,
///   snapshots/{reference,qtn,diff}/step_NNNNNN.txt
/// under config.output_dir. A numerical failure stops the run, records the
/// step in the manifest and sets exit_code 2.
ExperimentResult run_experiment(const RunConfig& config, const ExperimentOptions& options = {});

} // namespace qtn
