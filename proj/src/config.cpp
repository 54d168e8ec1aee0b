#include "qtn/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace qtn {

namespace {

struct BadValue {
    std::string message;
};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double to_double(std::string_view s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw BadValue{"expected a number, got '" + std::string(s) + "'"};
    return v;
}

long long to_int(std::string_view s) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw BadValue{"expected an integer, got '" + std::string(s) + "'"};
    return v;
}

bool to_bool(std::string_view s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw BadValue{"expected true or false, got '" + std::string(s) + "'"};
}

Index to_bond(std::string_view s) {
    if (s == "inf" || s == "unbounded") return kUnboundedBond;
    return static_cast<Index>(to_int(s));
}

std::string format_bond(Index b) { return b == kUnboundedBond ? "inf" : std::to_string(b); }

template <typename T, typename Parse>
std::optional<T> to_optional(std::string_view s, Parse&& parse) {
    if (s == "auto") return std::nullopt;
    return static_cast<T>(parse(s));
}

template <typename T, typename Format>
std::string format_optional(const std::optional<T>& v, Format&& format) {
    return v ? format(*v) : std::string("auto");
}

template <typename Enum>
Enum to_enum(std::string_view s, Enum (*parse)(std::string_view)) {
    try {
        return parse(s);
    } catch (const ConfigError&) {
        throw BadValue{"unknown value '" + std::string(s) + "'"};
    }
}

// Axis fields are parsed before the dimension is known; they live here until
// the config is assembled.
struct Draft {
    RunConfig config;
    Axis x{0, 0.0, 1.0};
    std::optional<Index> y_points;
    double y_lo{0.0}, y_hi{1.0};
};

struct Key {
    const char* name;
    bool required;
    std::function<void(Draft&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
    bool only_2d{false};
};

const std::vector<Key>& keys() {
    static const std::vector<Key> table = {
        {"experiment", false, [](Draft& d, std::string_view v) { d.config.experiment = std::string(v); },
         [](const RunConfig& c) { return c.experiment; }},
        {"problem.kind", true,
         [](Draft& d, std::string_view v) { d.config.problem.kind = to_enum(v, pde_kind_from_string); },
         [](const RunConfig& c) { return std::string(to_string(c.problem.kind)); }},
        {"problem.dim", false,
         [](Draft& d, std::string_view v) { d.config.problem.spatial_dim = static_cast<int>(to_int(v)); },
         [](const RunConfig& c) { return std::to_string(c.problem.spatial_dim); }},
        {"problem.velocity_x", false, [](Draft& d, std::string_view v) { d.config.problem.velocity[0] = to_double(v); },
         [](const RunConfig& c) { return format_double(c.problem.velocity[0]); }},
        {"problem.velocity_y", false, [](Draft& d, std::string_view v) { d.config.problem.velocity[1] = to_double(v); },
         [](const RunConfig& c) { return format_double(c.problem.velocity[1]); }, true},
        {"problem.viscosity", true, [](Draft& d, std::string_view v) { d.config.problem.viscosity = to_double(v); },
         [](const RunConfig& c) { return format_double(c.problem.viscosity); }},
        {"problem.boundary", true,
         [](Draft& d, std::string_view v) { d.config.problem.boundary = to_enum(v, boundary_from_string); },
         [](const RunConfig& c) { return std::string(to_string(c.problem.boundary)); }},
        {"problem.final_time", true, [](Draft& d, std::string_view v) { d.config.problem.final_time = to_double(v); },
         [](const RunConfig& c) { return format_double(c.problem.final_time); }},
        {"ic.shape", true,
         [](Draft& d, std::string_view v) {
             d.config.problem.initial_condition.shape = to_enum(v, initial_shape_from_string);
         },
         [](const RunConfig& c) { return std::string(to_string(c.problem.initial_condition.shape)); }},
        {"ic.center_x", false,
         [](Draft& d, std::string_view v) { d.config.problem.initial_condition.center[0] = to_double(v); },
         [](const RunConfig& c) { return format_double(c.problem.initial_condition.center[0]); }},
        {"ic.center_y", false,
         [](Draft& d, std::string_view v) { d.config.problem.initial_condition.center[1] = to_double(v); },
         [](const RunConfig& c) { return format_double(c.problem.initial_condition.center[1]); }, true},
        {"ic.width", false, [](Draft& d, std::string_view v) { d.config.problem.initial_condition.width = to_double(v); },
         [](const RunConfig& c) { return format_double(c.problem.initial_condition.width); }},
        {"ic.offset", false,
         [](Draft& d, std::string_view v) { d.config.problem.initial_condition.offset = to_double(v); },
         [](const RunConfig& c) { return format_double(c.problem.initial_condition.offset); }},
        {"ic.amplitude", false,
         [](Draft& d, std::string_view v) { d.config.problem.initial_condition.amplitude = to_double(v); },
         [](const RunConfig& c) { return format_double(c.problem.initial_condition.amplitude); }},
        {"grid.points_x", true, [](Draft& d, std::string_view v) { d.x.points = static_cast<Index>(to_int(v)); },
         [](const RunConfig& c) { return std::to_string(c.axes.at(0).points); }},
        {"grid.points_y", false, [](Draft& d, std::string_view v) { d.y_points = static_cast<Index>(to_int(v)); },
         [](const RunConfig& c) { return std::to_string(c.axes.at(1).points); }, true},
        {"grid.x_min", false, [](Draft& d, std::string_view v) { d.x.lo = to_double(v); },
         [](const RunConfig& c) { return format_double(c.axes.at(0).lo); }},
        {"grid.x_max", false, [](Draft& d, std::string_view v) { d.x.hi = to_double(v); },
         [](const RunConfig& c) { return format_double(c.axes.at(0).hi); }},
        {"grid.y_min", false, [](Draft& d, std::string_view v) { d.y_lo = to_double(v); },
         [](const RunConfig& c) { return format_double(c.axes.at(1).lo); }, true},
        {"grid.y_max", false, [](Draft& d, std::string_view v) { d.y_hi = to_double(v); },
         [](const RunConfig& c) { return format_double(c.axes.at(1).hi); }, true},
        {"grid.d", false, [](Draft& d, std::string_view v) { d.config.d = static_cast<int>(to_int(v)); },
         [](const RunConfig& c) { return std::to_string(c.d); }},
        {"layout.variant", false,
         [](Draft& d, std::string_view v) { d.config.layout = to_enum(v, layout_variant_from_string); },
         [](const RunConfig& c) { return std::string(to_string(c.layout)); }},
        {"stepper.dt", false, [](Draft& d, std::string_view v) { d.config.dt = to_optional<double>(v, to_double); },
         [](const RunConfig& c) { return format_optional(c.dt, format_double); }},
        {"stepper.num_steps", false,
         [](Draft& d, std::string_view v) { d.config.num_steps = to_optional<Index>(v, to_int); },
         [](const RunConfig& c) { return format_optional(c.num_steps, [](Index k) { return std::to_string(k); }); }},
        {"stepper.safety", false, [](Draft& d, std::string_view v) { d.config.safety = to_double(v); },
         [](const RunConfig& c) { return format_double(c.safety); }},
        {"stepper.chi_max", false, [](Draft& d, std::string_view v) { d.config.state_truncation.chi_max = to_bond(v); },
         [](const RunConfig& c) { return format_bond(c.state_truncation.chi_max); }},
        {"stepper.eps_svd", false,
         [](Draft& d, std::string_view v) { d.config.state_truncation.eps_svd = to_double(v); },
         [](const RunConfig& c) { return format_double(c.state_truncation.eps_svd); }},
        {"stepper.mask_chi_max", false,
         [](Draft& d, std::string_view v) { d.config.mask_truncation.chi_max = to_bond(v); },
         [](const RunConfig& c) { return format_bond(c.mask_truncation.chi_max); }},
        {"stepper.mask_eps_svd", false,
         [](Draft& d, std::string_view v) { d.config.mask_truncation.eps_svd = to_double(v); },
         [](const RunConfig& c) { return format_double(c.mask_truncation.eps_svd); }},
        {"stepper.snapshot_stride", false,
         [](Draft& d, std::string_view v) { d.config.snapshot_stride = to_optional<Index>(v, to_int); },
         [](const RunConfig& c) {
             return format_optional(c.snapshot_stride, [](Index k) { return std::to_string(k); });
         }},
        {"reference.rtol", false, [](Draft& d, std::string_view v) { d.config.reference.rtol = to_double(v); },
         [](const RunConfig& c) { return format_double(c.reference.rtol); }},
        {"reference.atol", false, [](Draft& d, std::string_view v) { d.config.reference.atol = to_double(v); },
         [](const RunConfig& c) { return format_double(c.reference.atol); }},
        {"horizon.max_m", false,
         [](Draft& d, std::string_view v) { d.config.horizon_max_m = to_optional<Index>(v, to_int); },
         [](const RunConfig& c) {
             return format_optional(c.horizon_max_m, [](Index k) { return std::to_string(k); });
         }},
        {"horizon.restart_stride", false,
         [](Draft& d, std::string_view v) { d.config.restart_stride = static_cast<Index>(to_int(v)); },
         [](const RunConfig& c) { return std::to_string(c.restart_stride); }},
        {"horizon.threads", false,
         [](Draft& d, std::string_view v) {
             const long long t = to_int(v);
             if (t < 0) throw BadValue{"must be >= 0"};
             d.config.threads = static_cast<unsigned>(t);
         },
         [](const RunConfig& c) { return std::to_string(c.threads); }},
        {"bound.enabled", false, [](Draft& d, std::string_view v) { d.config.bound_enabled = to_bool(v); },
         [](const RunConfig& c) { return std::string(c.bound_enabled ? "true" : "false"); }},
        {"output.dir", false, [](Draft& d, std::string_view v) { d.config.output_dir = std::string(v); },
         [](const RunConfig& c) { return c.output_dir; }},
        {"seed", false,
         [](Draft& d, std::string_view v) {
             const long long s = to_int(v);
             if (s < 0) throw BadValue{"must be >= 0"};
             d.config.seed = static_cast<std::uint64_t>(s);
         },
         [](const RunConfig& c) { return std::to_string(c.seed); }},
    };
    return table;
}

const Key* find_key(std::string_view name) {
    for (const auto& k : keys())
        if (name == k.name) return &k;
    return nullptr;
}

struct Entry {
    std::string value;
    int line;
};

void semantic_checks(const RunConfig& c, std::vector<ConfigIssue>& issues) {
    auto issue = [&](const char* field, std::string msg) { issues.push_back({field, 0, std::move(msg)}); };
    const PdeProblem& p = c.problem;
    if (p.spatial_dim != 1 && p.spatial_dim != 2) issue("problem.dim", "must be 1 or 2");
    if (!(p.viscosity >= 0.0) || !std::isfinite(p.viscosity)) issue("problem.viscosity", "must be finite and >= 0");
    if (!(p.final_time > 0.0) || !std::isfinite(p.final_time)) issue("problem.final_time", "must be > 0");
    if (p.initial_condition.shape == InitialShape::gaussian && !(p.initial_condition.width > 0.0))
        issue("ic.width", "must be > 0");
    if (c.d < 2) issue("grid.d", "must be >= 2");
    for (std::size_t a = 0; a < c.axes.size() && c.d >= 2; ++a) {
        const char* field = a == 0 ? "grid.points_x" : "grid.points_y";
        if (exact_log(c.axes[a].points, c.d) < 1)
            issue(field, std::to_string(c.axes[a].points) + " is not a power of " + std::to_string(c.d));
        else if (p.boundary == Boundary::dirichlet_zero && c.axes[a].points < 3)
            issue(field, "Dirichlet axes need at least 3 points");
        if (!(c.axes[a].hi > c.axes[a].lo)) issue(a == 0 ? "grid.x_max" : "grid.y_max", "must exceed the minimum");
    }
    if (c.axes.size() == 2 && c.layout == LayoutVariant::interleaved && c.d >= 2 &&
        exact_log(c.axes[0].points, c.d) != exact_log(c.axes[1].points, c.d))
        issue("layout.variant", "interleaved layout needs equal point counts on both axes");
    if (c.dt && !(*c.dt > 0.0)) issue("stepper.dt", "must be > 0");
    if (c.num_steps && *c.num_steps < 0) issue("stepper.num_steps", "must be >= 0");
    if (c.dt && c.num_steps && *c.dt > 0.0 &&
        std::abs(*c.dt * static_cast<double>(*c.num_steps) - p.final_time) > *c.dt)
        issue("stepper.num_steps", "dt * num_steps must equal final_time within one step");
    if (!(c.safety > 0.0)) issue("stepper.safety", "must be > 0");
    if (c.state_truncation.chi_max < 1) issue("stepper.chi_max", "must be >= 1");
    if (!(c.state_truncation.eps_svd >= 0.0)) issue("stepper.eps_svd", "must be >= 0");
    if (c.mask_truncation.chi_max < 1) issue("stepper.mask_chi_max", "must be >= 1");
    if (!(c.mask_truncation.eps_svd >= 0.0)) issue("stepper.mask_eps_svd", "must be >= 0");
    if (c.snapshot_stride && *c.snapshot_stride < 1) issue("stepper.snapshot_stride", "must be >= 1");
    if (!(c.reference.rtol > 0.0)) issue("reference.rtol", "must be > 0");
    if (!(c.reference.atol > 0.0)) issue("reference.atol", "must be > 0");
    if (c.horizon_max_m && *c.horizon_max_m < 0) issue("horizon.max_m", "must be >= 0");
    if (c.restart_stride < 1) issue("horizon.restart_stride", "must be >= 1");
}

} // namespace

std::string to_string(const ConfigIssue& issue) {
    std::string s;
    if (issue.line > 0) s += "line " + std::to_string(issue.line) + ": ";
    if (!issue.field.empty()) s += issue.field + ": ";
    return s + issue.message;
}

GridSpec RunConfig::grid() const { return GridSpec(axes, problem.boundary, d); }

StepperConfig RunConfig::stepper() const {
    const GridSpec g = grid();
    StepperConfig s;
    if (dt) {
        s.dt = *dt;
        s.num_steps = num_steps ? *num_steps : static_cast<Index>(std::llround(problem.final_time / *dt));
    } else if (num_steps) {
        s.num_steps = *num_steps;
        s.dt = *num_steps > 0 ? problem.final_time / static_cast<double>(*num_steps) : 0.0;
    } else {
        const TimeGrid tg = stable_time_grid(problem, g, safety);
        s.dt = tg.dt;
        s.num_steps = tg.steps;
    }
    s.state_truncation = state_truncation;
    s.mask_truncation = mask_truncation;
    s.snapshot_stride = snapshot_stride ? *snapshot_stride : std::max<Index>(1, (s.num_steps + 9) / 10);
    s.layout = layout;
    return s;
}

ConfigResult parse_config(const std::string& text, const std::vector<std::string>& overrides) {
    ConfigResult result;
    std::map<std::string, Entry> entries;
    auto add_entry = [&](std::string_view line, int line_no, bool is_override) {
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            result.issues.push_back({"", line_no, "expected 'key = value', got '" + std::string(line) + "'"});
            return;
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) {
            result.issues.push_back({"", line_no, "missing key before '='"});
            return;
        }
        if (!find_key(key)) {
            result.issues.push_back({key, line_no, "unknown key"});
            return;
        }
        if (!is_override && entries.count(key)) {
            result.issues.push_back({key, line_no, "duplicate key (first set on line " +
                                                       std::to_string(entries[key].line) + ")"});
            return;
        }
        entries[key] = {value, line_no};
    };

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line(raw);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        add_entry(line, line_no, false);
    }
    for (const auto& o : overrides) add_entry(trim(o), 0, true);

    Draft draft;
    draft.config.mask_truncation = {kUnboundedBond, 1e-12};
    for (const auto& k : keys()) {
        const auto it = entries.find(k.name);
        if (it == entries.end()) {
            if (k.required) result.issues.push_back({k.name, 0, "required key is missing"});
            continue;
        }
        try {
            k.set(draft, it->second.value);
        } catch (const BadValue& e) {
            result.issues.push_back({k.name, it->second.line, e.message});
        }
    }

    RunConfig& c = draft.config;
    c.axes = {draft.x};
    if (c.problem.spatial_dim == 2) {
        c.axes.push_back(Axis{draft.y_points.value_or(draft.x.points), draft.y_lo, draft.y_hi});
    } else {
        for (const char* y : {"problem.velocity_y", "ic.center_y", "grid.points_y", "grid.y_min", "grid.y_max"})
            if (entries.count(y)) result.issues.push_back({y, entries[y].line, "only valid when problem.dim = 2"});
    }
    if (c.output_dir.empty()) c.output_dir = "runs/" + c.experiment;
    semantic_checks(c, result.issues);
    if (result.issues.empty()) result.config = std::move(c);
    return result;
}

ConfigResult load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) {
        ConfigResult r;
        r.issues.push_back({"", 0, "cannot read " + path.string()});
        return r;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), overrides);
}

std::map<std::string, std::string> to_key_values(const RunConfig& config) {
    std::map<std::string, std::string> kv;
    for (const auto& k : keys()) {
        if (k.only_2d && config.problem.spatial_dim != 2) continue;
        kv[k.name] = k.get(config);
    }
    return kv;
}

std::string to_config_text(const RunConfig& config) {
    std::string out;
    for (const auto& k : keys()) {
        if (k.only_2d && config.problem.spatial_dim != 2) continue;
        out += std::string(k.name) + " = " + k.get(config) + "\n";
    }
    return out;
}

std::filesystem::path presets_dir() {
    if (const char* env = std::getenv("QTN_PRESETS_DIR"); env && *env) return env;
    return QTN_PRESETS_DIR;
}

std::vector<std::string> list_presets() {
    std::vector<std::string> names;
    std::error_code ec;
    for (const auto& e : std::filesystem::directory_iterator(presets_dir(), ec))
        if (e.path().extension() == ".cfg") names.push_back(e.path().stem().string());
    std::sort(names.begin(), names.end());
    return names;
}

std::filesystem::path resolve_config_path(const std::string& name_or_path) {
    const std::filesystem::path p(name_or_path);
    if (std::filesystem::exists(p)) return p;
    const auto preset = presets_dir() / (name_or_path + ".cfg");
    if (std::filesystem::exists(preset)) return preset;
    throw ConfigError("config", "no config file or preset named '" + name_or_path + "'");
}

} // namespace qtn
