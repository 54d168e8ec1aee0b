#include "qtn/experiment.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "qtn/io.hpp"

namespace qtn {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename Write>
void write_csv(const std::filesystem::path& path, Write&& write) {
    std::ostringstream ss;
    write(ss);
    write_text_file(path, ss.str());
}

double max_on_boundary(const Eigen::VectorXd& u, const Eigen::VectorXd& mask) {
    double m = 0.0;
    for (Index i = 0; i < u.size(); ++i)
        if (mask(i) == 0.0) m = std::max(m, std::abs(u(i)));
    return m;
}

} // namespace

double log_horizon_slope(const HorizonCurve& curve) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (std::size_t i = 0; i < curve.horizons.size(); ++i) {
        if (curve.horizons[i] < 1) continue;
        const double x = std::log10(static_cast<double>(curve.horizons[i]));
        const double y = curve.mean[i];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count < 2) return 0.0;
    const double denom = count * sxx - sx * sx;
    return denom == 0.0 ? 0.0 : (count * sxy - sx * sy) / denom;
}

ExperimentResult run_experiment(const RunConfig& config, const ExperimentOptions& options) {
    auto log = [&](const std::string& s) {
        if (options.log) options.log(s);
    };
    const auto t_total = Clock::now();
    ExperimentResult res;
    res.output_dir = config.output_dir;
    RunManifest& man = res.manifest;
    man = make_manifest(config);

    const PdeProblem& problem = config.problem;
    const GridSpec grid = config.grid();
    const StepperConfig sc = config.stepper();
    const StepPlan plan = make_step_plan(problem, grid, sc);
    const Index K = sc.num_steps;
    const bool dirichlet = grid.boundary() == Boundary::dirichlet_zero;
    const bool linear = problem.kind == PdeKind::advection_diffusion;
    const std::filesystem::path out = config.output_dir;

    man.operator_bonds["linear"] = plan.linear.bond_dims();
    if (!linear) man.operator_bonds["convection"] = plan.convection.bond_dims();
    if (plan.mask) man.operator_bonds["mask"] = plan.mask->bond_dims();

    log("dt = " + format_real(sc.dt) + ", K = " + std::to_string(K));
    const Eigen::VectorXd u0 = sample_initial_condition(problem, grid);
    const MolSystem sys(problem, grid);

    auto t0 = Clock::now();
    // Unstable configs overflow here too; the compressed rollout reports the step.
    const DenseTrajectory euler = euler_rollout_dense(sys, u0, sc.dt, K);
    man.wall_seconds["euler"] = seconds_since(t0);

    const Eigen::VectorXd mask = boundary_mask(grid);
    double max_rel_euler = 0.0, boundary_max = 0.0, last_rel_euler = 0.0;
    RolloutOptions ro;
    ro.on_state = [&](Index k, const Mps& m) {
        const Eigen::VectorXd u = decode_state(m, plan);
        last_rel_euler = relative_l2(u, euler.states[static_cast<std::size_t>(k)]);
        max_rel_euler = std::max(max_rel_euler, last_rel_euler);
        if (dirichlet) boundary_max = std::max(boundary_max, max_on_boundary(u, mask));
    };
    t0 = Clock::now();
    const Rollout roll = rollout(plan, encode_state(u0, plan), ro);
    man.wall_seconds["qtn_rollout"] = seconds_since(t0);

    Index max_bond = 0;
    for (const auto& d : roll.diagnostics) max_bond = std::max(max_bond, d.max_bond);
    if (options.write_files) write_csv(out / "diagnostics.csv", [&](auto& s) { write_diagnostics_csv(s, roll.diagnostics); });

    auto finish = [&]() {
        man.wall_seconds["total"] = seconds_since(t_total);
        if (options.write_files) {
            write_csv(out / "summary.csv", [&](auto& s) { write_summary_csv(s, res.summary); });
            write_text_file(out / "manifest.json", to_json(man));
        }
        return res;
    };
    auto fail = [&](std::optional<Index> step, const std::string& what) {
        man.status = "numerical_failure";
        man.failed_step = step;
        man.failure = what;
        res.exit_code = 2;
        log("numerical failure: " + what);
        return finish();
    };

    if (!roll.completed()) return fail(roll.failed_step, roll.failure);
    log("compressed rollout done");

    t0 = Clock::now();
    Rk45Stats rk_stats;
    const DenseTrajectory rk45 = rk45_solve(sys, u0, uniform_times(sc.dt, K), config.reference, &rk_stats);
    man.wall_seconds["rk45"] = seconds_since(t0);
    man.results["rk45_accepted_steps"] = static_cast<double>(rk_stats.accepted);
    man.results["rk45_rejected_steps"] = static_cast<double>(rk_stats.rejected);
    log("RK45 reference done");

    // Snapshots and signed differences at the snapshot steps.
    double max_abs_diff = 0.0;
    const auto times = uniform_times(sc.dt, K);
    std::vector<double> snap_times;
    for (Index k : roll.snapshot_steps) snap_times.push_back(times[static_cast<std::size_t>(k)]);
    DenseTrajectory qtn_traj;
    qtn_traj.times = snap_times;
    qtn_traj.states = roll.snapshots;
    const DenseTrajectory diff = signed_difference(rk45, qtn_traj, snap_times, sc.dt);
    for (std::size_t i = 0; i < snap_times.size(); ++i) {
        max_abs_diff = std::max(max_abs_diff, diff.states[i].cwiseAbs().maxCoeff());
        if (!options.write_files) continue;
        const Index k = roll.snapshot_steps[i];
        const std::string name = snapshot_file_name(k);
        const double t = snap_times[i];
        write_snapshot(out / "snapshots" / "reference" / name,
                       make_snapshot(grid, t, rk45.states[static_cast<std::size_t>(k)]));
        write_snapshot(out / "snapshots" / "qtn" / name, make_snapshot(grid, t, roll.snapshots[i]));
        write_snapshot(out / "snapshots" / "diff" / name, make_snapshot(grid, t, diff.states[i]));
    }

    const Eigen::VectorXd& u_qtn = roll.snapshots.back();
    const auto& u_euler = euler.states.back();
    const auto& u_rk = rk45.states.back();
    res.summary = {
        {"num_steps", static_cast<double>(K)},
        {"dt", sc.dt},
        {"final_rel_l2_qtn_vs_euler", last_rel_euler},
        {"max_rel_l2_qtn_vs_euler", max_rel_euler},
        {"final_rel_l2_qtn_vs_rk45", relative_l2(u_qtn, u_rk)},
        {"final_rel_l2_euler_vs_rk45", relative_l2(u_euler, u_rk)},
        {"max_abs_signed_difference", max_abs_diff},
        {"max_bond", static_cast<double>(max_bond)},
    };
    if (dirichlet) res.summary.emplace_back("boundary_max_abs", boundary_max);

    HorizonOptions ho;
    ho.max_horizon = config.horizon_max_m.value_or(-1);
    ho.restart_stride = config.restart_stride;
    ho.threads = config.threads;
    t0 = Clock::now();
    try {
        res.horizon = restart_averaged_error(rk45, plan, ho);
    } catch (const NumericalError& e) {
        return fail(e.step() >= 0 ? std::optional<Index>(e.step()) : std::nullopt, e.what());
    }
    man.wall_seconds["horizon"] = seconds_since(t0);
    double max_std = 0.0;
    for (double s : res.horizon.std_dev) max_std = std::max(max_std, s);
    res.summary.emplace_back("horizon_log_slope", log_horizon_slope(res.horizon));
    res.summary.emplace_back("horizon_max_std", max_std);
    if (options.write_files) write_csv(out / "horizon.csv", [&](auto& s) { write_horizon_csv(s, res.horizon); });
    log("restart sweep done");

    if (config.bound_enabled && linear) {
        t0 = Clock::now();
        try {
            res.bound = verify_error_bound(plan, u0);
        } catch (const NumericalError& e) {
            return fail(e.step() >= 0 ? std::optional<Index>(e.step()) : std::nullopt, e.what());
        }
        man.wall_seconds["bound"] = seconds_since(t0);
        res.summary.emplace_back("bound_lipschitz", res.bound->lipschitz);
        res.summary.emplace_back("bound_one_step_error", res.bound->one_step_error);
        res.summary.emplace_back("bound_holds", res.bound->holds ? 1.0 : 0.0);
        if (options.write_files) write_csv(out / "bound.csv", [&](auto& s) { write_bound_csv(s, *res.bound); });
        log("error bound done");
    }

    for (const auto& [name, value] : res.summary)
        if (std::isfinite(value)) man.results[name] = value;
    return finish();
}

} // namespace qtn
