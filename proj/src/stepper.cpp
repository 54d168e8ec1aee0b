#include "qtn/stepper.hpp"

#include <chrono>
#include <cmath>

namespace qtn {

void StepperConfig::validate(const PdeProblem& problem) const {
    if (!std::isfinite(dt) || dt < 0.0) throw ConfigError("stepper.dt", "must be finite and >= 0");
    if (num_steps < 0) throw ConfigError("stepper.num_steps", "must be >= 0");
    if (num_steps > 0 && std::abs(dt * static_cast<double>(num_steps) - problem.final_time) > dt)
        throw ConfigError("stepper.dt", "dt * K must equal the final time within one step");
    if (state_truncation.chi_max < 1) throw ConfigError("stepper.chi_max", "must be >= 1");
    if (!(state_truncation.eps_svd >= 0.0)) throw ConfigError("stepper.eps_svd", "must be >= 0");
    if (mask_truncation.chi_max < 1) throw ConfigError("stepper.mask_chi_max", "must be >= 1");
    if (!(mask_truncation.eps_svd >= 0.0)) throw ConfigError("stepper.mask_eps_svd", "must be >= 0");
    if (snapshot_stride < 1) throw ConfigError("stepper.snapshot_stride", "must be >= 1");
}

StepperConfig make_stepper_config(const PdeProblem& problem, const GridSpec& grid, const TruncationParams& state,
                                  const TruncationParams& mask, double safety) {
    const TimeGrid tg = stable_time_grid(problem, grid, safety);
    StepperConfig c;
    c.dt = tg.dt;
    c.num_steps = tg.steps;
    c.state_truncation = state;
    c.mask_truncation = mask;
    return c;
}

namespace {

GridSpec axis_line(const GridSpec& grid, int axis) {
    const Axis& a = grid.axis(axis);
    return GridSpec({a}, grid.boundary(), grid.d());
}

// sum_a coeff(a) * lift(op_a) with op_a built by `make` on the axis' own chain
template <typename Make, typename Coeff>
std::optional<Mpo> axis_sum(const GridSpec& grid, const Layout& layout, Make&& make, Coeff&& coeff,
                            std::optional<Mpo> acc = std::nullopt) {
    for (int a = 0; a < grid.spatial_dim(); ++a) {
        const double w = coeff(a);
        if (w == 0.0) continue;
        Mpo term = mpo_scale(lift_to_axis(make(axis_line(grid, a)), a, layout), w);
        acc = acc ? mpo_add(*acc, term) : term;
    }
    return acc;
}

Mpo identity_plus(const std::optional<Mpo>& op, int n, int d) {
    Mpo id = mpo_identity(n, d);
    if (!op) return id;
    return mpo_compress(mpo_add(id, *op), kOperatorCompression);
}

void check_problem_grid(const PdeProblem& problem, const GridSpec& grid) {
    problem.validate();
    if (problem.spatial_dim != grid.spatial_dim())
        throw ConfigError("problem.dim", "problem and grid dimensions differ");
    if (problem.boundary != grid.boundary())
        throw ConfigError("problem.boundary", "problem and grid boundaries differ");
}

bool all_finite(const Mps& m) {
    for (const auto& c : m.cores())
        if (!c.left_unfolding().allFinite()) return false;
    return true;
}

} // namespace

Mpo build_linear_step_mpo(const PdeProblem& problem, const GridSpec& grid, double dt, LayoutVariant variant) {
    check_problem_grid(problem, grid);
    if (problem.kind != PdeKind::advection_diffusion)
        throw ConfigError("problem.kind", "linear step operator needs advection_diffusion");
    const Layout layout = Layout::for_grid(grid, variant);
    auto op = axis_sum(
        grid, layout, [](const GridSpec& g) { return d1_mpo(g); },
        [&](int a) { return -dt * problem.velocity[static_cast<std::size_t>(a)]; });
    op = axis_sum(
        grid, layout, [](const GridSpec& g) { return d2_mpo(g); },
        [&](int) { return dt * problem.viscosity; }, op);
    return identity_plus(op, layout.n(), layout.d());
}

Mps dirichlet_mask_mps(const GridSpec& grid, const TruncationParams& params, LayoutVariant variant) {
    const Layout layout = Layout::for_grid(grid, variant);
    return mps_from_dense(encode(boundary_mask(grid), layout), params);
}

StepPlan make_step_plan(const PdeProblem& problem, const GridSpec& grid, const StepperConfig& config) {
    check_problem_grid(problem, grid);
    config.validate(problem);
    Layout layout = Layout::for_grid(grid, config.layout);
    std::optional<Mps> mask;
    if (grid.boundary() == Boundary::dirichlet_zero)
        mask = dirichlet_mask_mps(grid, config.mask_truncation, config.layout);
    Mpo linear, convection;
    if (problem.kind == PdeKind::advection_diffusion) {
        linear = build_linear_step_mpo(problem, grid, config.dt, config.layout);
    } else {
        const auto g = axis_sum(
            grid, layout, [](const GridSpec& s) { return d1_mpo(s); }, [](int) { return 1.0; });
        convection = mpo_compress(*g, kOperatorCompression);
        linear = identity_plus(axis_sum(
                                   grid, layout, [](const GridSpec& s) { return d2_mpo(s); },
                                   [&](int) { return config.dt * problem.viscosity; }),
                               layout.n(), layout.d());
    }
    return StepPlan{problem, grid, config, std::move(layout), std::move(linear), std::move(convection),
                    std::move(mask)};
}

Mps encode_state(const Eigen::VectorXd& u, const StepPlan& plan) {
    return mps_from_dense(encode(u, plan.layout), plan.config.state_truncation);
}

Eigen::VectorXd decode_state(const Mps& m, const StepPlan& plan) {
    return decode(mps_to_dense(m, plan.layout.grid_size()), plan.layout);
}

StepResult qtn_step(const Mps& state, const StepPlan& plan, Index step) {
    const TruncationParams& p = plan.config.state_truncation;
    const double dt = plan.config.dt;
    double discarded_sq = 0.0;
    auto keep = [&](Truncated<double> t) {
        discarded_sq += t.discarded_weight * t.discarded_weight;
        return std::move(t.state);
    };

    Mps next;
    if (plan.problem.kind == PdeKind::advection_diffusion) {
        next = plan.mask ? keep(hadamard_truncate(apply(plan.linear, state), *plan.mask, p))
                         : keep(apply_truncate(plan.linear, state, p));
    } else {
        const Mps w = keep(apply_truncate(plan.convection, state, p));
        const Mps nonlinear = keep(hadamard_truncate(state, w, p));
        const Mps viscous = keep(apply_truncate(plan.linear, state, p));
        const Mps sum = add(viscous, scale(nonlinear, -dt));
        next = plan.mask ? keep(hadamard_truncate(sum, *plan.mask, p)) : keep(truncate(sum, p));
    }
    if (!all_finite(next))
        throw NumericalError("non-finite state" + (step >= 0 ? " at step " + std::to_string(step) : std::string()),
                             step);
    return {std::move(next), std::sqrt(discarded_sq)};
}

StepResult qtn_step(const Mps& state, const PdeProblem& problem, const GridSpec& grid, const StepperConfig& config) {
    return qtn_step(state, make_step_plan(problem, grid, config));
}

Rollout rollout(const StepPlan& plan, const Mps& initial, const RolloutOptions& options) {
    using clock = std::chrono::steady_clock;
    const Index steps = options.steps >= 0 ? options.steps : plan.config.num_steps;
    const Index stride = plan.config.snapshot_stride;
    Rollout r;
    auto record = [&](Index k, const Mps& m, double discarded, double ms) {
        r.diagnostics.push_back({k, static_cast<double>(k) * plan.config.dt, m.max_bond(), discarded, ms});
        if (k % stride == 0 || k == steps) {
            r.snapshot_steps.push_back(k);
            r.snapshots.push_back(decode_state(m, plan));
        }
        if (options.keep_states) r.states.push_back(m);
        if (options.on_state) options.on_state(k, m);
    };

    record(0, initial, 0.0, 0.0);
    Mps current = initial;
    for (Index k = 1; k <= steps; ++k) {
        const auto t0 = clock::now();
        try {
            StepResult s = qtn_step(current, plan, k);
            current = std::move(s.state);
            const double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
            record(k, current, s.discarded_weight, ms);
        } catch (const NumericalError& e) {
            r.failed_step = k;
            r.failure = "step " + std::to_string(k) + ": " + e.what();
            break;
        }
    }
    return r;
}

Rollout rollout(const PdeProblem& problem, const GridSpec& grid, const StepperConfig& config,
                const RolloutOptions& options) {
    const StepPlan plan = make_step_plan(problem, grid, config);
    return rollout(plan, encode_state(sample_initial_condition(problem, grid), plan), options);
}

} // namespace qtn
