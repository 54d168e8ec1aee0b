// qtn: run, validate and list experiment configs.
//
//   qtn run <config|preset> [--out DIR] [--override key=value]...
//   qtn validate <config|preset> [--override key=value]...
//   qtn presets list
//
// Exit status: 0 success, 1 configuration error, 2 numerical failure.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qtn/config.hpp"
#include "qtn/experiment.hpp"
#include "qtn/io.hpp"

namespace {

std::optional<qtn::RunConfig> load(const std::string& name, const std::vector<std::string>& overrides) {
    std::filesystem::path path;
    try {
        path = qtn::resolve_config_path(name);
    } catch (const qtn::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return std::nullopt;
    }
    qtn::ConfigResult r = qtn::load_config(path, overrides);
    if (!r.ok()) {
        for (const auto& issue : r.issues) std::cerr << path.string() << ": " << qtn::to_string(issue) << '\n';
        return std::nullopt;
    }
    return r.config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compressed tensor-network PDE time stepping"};
    app.require_subcommand(1);

    std::string config_name;
    std::string out_dir;
    std::vector<std::string> overrides;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "Run an experiment and write its artifacts");
    run->add_option("config", config_name, "Config file or preset name")->required();
    run->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    run->add_option("--override", overrides, "key=value, applied after the file")->take_all();
    run->add_flag("-q,--quiet", quiet, "No progress output");

    auto* validate = app.add_subcommand("validate", "Check a config and print it with defaults filled in");
    validate->add_option("config", config_name, "Config file or preset name")->required();
    validate->add_option("--override", overrides, "key=value, applied after the file")->take_all();

    auto* presets = app.add_subcommand("presets", "Built-in experiment presets");
    presets->require_subcommand(1);
    auto* presets_list = presets->add_subcommand("list", "List preset names");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*presets_list) {
            for (const auto& name : qtn::list_presets()) std::cout << name << '\n';
            return 0;
        }
        auto config = load(config_name, overrides);
        if (!config) return 1;

        if (*validate) {
            const qtn::StepperConfig s = config->stepper();
            std::cout << qtn::to_config_text(*config);
            std::cout << "# resolved: dt = " << qtn::format_real(s.dt) << ", num_steps = " << s.num_steps
                      << ", snapshot_stride = " << s.snapshot_stride << '\n';
            return 0;
        }

        if (!out_dir.empty()) config->output_dir = out_dir;
        qtn::ExperimentOptions opts;
        if (!quiet) opts.log = [](const std::string& line) { std::cerr << "[qtn] " << line << '\n'; };
        const qtn::ExperimentResult res = qtn::run_experiment(*config, opts);
        for (const auto& [name, value] : res.summary) std::cout << name << " = " << qtn::format_real(value) << '\n';
        if (!res.completed()) {
            std::cerr << "run failed";
            if (res.manifest.failed_step) std::cerr << " at step " << *res.manifest.failed_step;
            std::cerr << ": " << res.manifest.failure << '\n';
        }
        std::cout << "artifacts: " << res.output_dir.string() << '\n';
        return res.exit_code;
    } catch (const qtn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
