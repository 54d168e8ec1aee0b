#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qtn/problem.hpp"
#include "qtn/reference.hpp"
#include "qtn/stepper.hpp"

namespace qtn {

/// Fully specified experiment. Fields left as std::nullopt are resolved from
/// the problem (dt, K, snapshot stride, horizon cap).
struct RunConfig {
    std::string experiment{"custom"};
    PdeProblem problem{};
    std::vector<Axis> axes{Axis{}};
    int d{2};
    LayoutVariant layout{LayoutVariant::interleaved};

    std::optional<double> dt;
    std::optional<Index> num_steps;
    double safety{0.4};
    TruncationParams state_truncation{};
    TruncationParams mask_truncation{};
    std::optional<Index> snapshot_stride;

    Rk45Options reference{};

    std::optional<Index> horizon_max_m;
    Index restart_stride{1};
    unsigned threads{0};
    bool bound_enabled{true};

    std::string output_dir;
    std::uint64_t seed{0};

    GridSpec grid() const;
    // dt, K and snapshot stride after applying the stability rule.
    StepperConfig stepper() const;

    bool operator==(const RunConfig&) const = default;
};

struct ConfigIssue {
    std::string field; // dotted key, empty for syntax errors
    int line{0};       // 0 when not tied to a line
    std::string message;
};

std::string to_string(const ConfigIssue& issue);

struct ConfigResult {
    std::optional<RunConfig> config;
    std::vector<ConfigIssue> issues;

    bool ok() const noexcept { return config.has_value(); }
};

/// `key = value` lines; `#` starts a comment; keys are dotted and unique.
/// Every issue in the text is collected before returning.
ConfigResult parse_config(const std::string& text, const std::vector<std::string>& overrides = {});
ConfigResult load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Canonical text with every key, parseable back to an equal RunConfig.
std::string to_config_text(const RunConfig& config);
std::map<std::string, std::string> to_key_values(const RunConfig& config);

std::filesystem::path presets_dir();
std::vector<std::string> list_presets();
// A preset name (file stem in presets_dir()) or a path to a config file.
std::filesystem::path resolve_config_path(const std::string& name_or_path);

} // namespace qtn
