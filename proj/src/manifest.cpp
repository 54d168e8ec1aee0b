#include "qtn/manifest.hpp"

#include <nlohmann/json.hpp>

#include "qtn/io.hpp"

namespace qtn {

using nlohmann::json;

std::map<std::string, std::string> design_decisions(const RunConfig& c) {
    const auto& ref = c.reference;
    std::string restarts = c.restart_stride == 1 ? "every_k" : "stride_" + std::to_string(c.restart_stride);
    if (c.horizon_max_m) restarts += ",max_m_" + std::to_string(*c.horizon_max_m);
    return {
        {"tensorization.layout", std::string(to_string(c.layout))},
        {"tensorization.digit_order", "big_endian_msb_at_site_0"},
        {"tensorization.grid_sizes", "powers_of_d_only"},
        {"mps.truncation_rule", "relative:sigma_i<=eps_svd*sigma_1_discarded"},
        {"mps.min_kept", "1"},
        {"mps.sweep_order", "qr_left_to_right_then_svd_right_to_left"},
        {"mps.svd_backend", "eigen_jacobisvd_descending_stable_order"},
        {"mps.center_convention", "absorbed_into_cores_with_stored_bond_copy"},
        {"mpo.shift", "analytic_carry_bond_2"},
        {"mpo.dirichlet", "open_stencil_plus_boundary_mask_hadamard"},
        {"mpo.periodic", "wrapped_stencil"},
        {"mpo.composition", "none"},
        {"mpo.operator_compression", "eps_1e-14_relative"},
        {"stepper.dt_rule", "safety*min(h/speed,h^2/(2*nu*dim)),K=ceil(T/dt),dt=T/K"},
        {"stepper.nonlinearity", "hadamard_product_immediate_truncation"},
        {"stepper.operation_order", "operator,mask,truncate"},
        {"stepper.burgers_2d", "u*(d1x+d1y)u"},
        {"stepper.intermediate_truncation", "state_truncation"},
        {"stepper.dirichlet_initial_condition", "boundary_zeroed"},
        {"reference.integrator", "dormand_prince_5(4)"},
        {"reference.tolerances", "rtol=" + format_real(ref.rtol) + ",atol=" + format_real(ref.atol)},
        {"reference.sampling", "steps_clipped_to_sample_times"},
        {"reference.initial_condition", "pointwise"},
        {"metrics.lipschitz", "spectral_norm_of_dense_euler_map"},
        {"metrics.time_alignment", "reference_sampled_at_euler_times"},
        {"metrics.horizon_grid", "0,1,2,5,10,20,50,..."},
        {"metrics.std", "population_over_restarts"},
        {"metrics.restarts", restarts},
    };
}

RunManifest make_manifest(const RunConfig& config) {
    RunManifest m;
    m.config = config;
    const StepperConfig s = config.stepper();
    m.dt = s.dt;
    m.num_steps = s.num_steps;
    m.snapshot_stride = s.snapshot_stride;
    const GridSpec g = config.grid();
    m.chain_length = g.chain_length();
    for (int a = 0; a < g.spatial_dim(); ++a) m.axis_digits.push_back(g.digits(a));
    m.design_decisions = design_decisions(config);
    return m;
}

std::string to_json(const RunManifest& m) {
    json j;
    j["code_version"] = m.code_version;
    j["experiment"] = m.config.experiment;
    j["config"] = to_key_values(m.config);
    j["derived"] = {{"dt", m.dt},
                    {"num_steps", m.num_steps},
                    {"snapshot_stride", m.snapshot_stride},
                    {"chain_length", m.chain_length},
                    {"axis_digits", m.axis_digits}};
    j["design_decisions"] = m.design_decisions;
    j["operator_bonds"] = m.operator_bonds;
    j["status"] = m.status;
    j["failed_step"] = m.failed_step ? json(*m.failed_step) : json(nullptr);
    j["failure"] = m.failure;
    j["results"] = m.results;
    j["wall_seconds"] = m.wall_seconds;
    return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
    RunManifest m;
    try {
        const json j = json::parse(text);
        const auto kv = j.at("config").get<std::map<std::string, std::string>>();
        std::string cfg;
        for (const auto& [k, v] : kv) cfg += k + " = " + v + "\n";
        ConfigResult r = parse_config(cfg);
        if (!r.ok()) throw ConfigError("manifest.config", to_string(r.issues.front()));
        m.config = std::move(*r.config);
        const json& d = j.at("derived");
        m.dt = d.at("dt").get<double>();
        m.num_steps = d.at("num_steps").get<Index>();
        m.snapshot_stride = d.at("snapshot_stride").get<Index>();
        m.chain_length = d.at("chain_length").get<int>();
        m.axis_digits = d.at("axis_digits").get<std::vector<int>>();
        m.design_decisions = j.at("design_decisions").get<std::map<std::string, std::string>>();
        m.code_version = j.at("code_version").get<std::string>();
        m.operator_bonds = j.at("operator_bonds").get<std::map<std::string, std::vector<Index>>>();
        m.status = j.at("status").get<std::string>();
        if (!j.at("failed_step").is_null()) m.failed_step = j.at("failed_step").get<Index>();
        m.failure = j.at("failure").get<std::string>();
        m.results = j.at("results").get<std::map<std::string, double>>();
        m.wall_seconds = j.at("wall_seconds").get<std::map<std::string, double>>();
    } catch (const json::exception& e) {
        throw ConfigError("manifest", e.what());
    }
    return m;
}

} // namespace qtn
