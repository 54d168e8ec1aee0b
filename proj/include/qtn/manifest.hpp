#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qtn/config.hpp"

namespace qtn {

inline constexpr const char* kCodeVersion = "qtn 0.1.0";

/// Reproducibility record written next to every run.
struct RunManifest {
    RunConfig config;
    double dt{0.0};
    Index num_steps{0};
    Index snapshot_stride{1};
    int chain_length{0};
    std::vector<int> axis_digits;
    std::map<std::string, std::string> design_decisions;
    std::string code_version{kCodeVersion};
    std::map<std::string, std::vector<Index>> operator_bonds;
    std::string status{"completed"}; // completed | numerical_failure
    std::optional<Index> failed_step;
    std::string failure;
    std::map<std::string, double> results; // finite values only
    std::map<std::string, double> wall_seconds;

    bool operator==(const RunManifest&) const = default;
};

/// Every modelling choice the run depends on, as tag -> value.
std::map<std::string, std::string> design_decisions(const RunConfig& config);

/// Resolved config, derived dt/K/stride and layout, decision tags.
RunManifest make_manifest(const RunConfig& config);

/// JSON text; parses back to an equal manifest. Throws ConfigError on
/// malformed input.
std::string to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);

} // namespace qtn
