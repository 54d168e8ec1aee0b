#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qtn/mpo.hpp"
#include "qtn/mps.hpp"
#include "qtn/problem.hpp"

namespace qtn {

struct StepperConfig {
    double dt{0.0};
    Index num_steps{0};
    TruncationParams state_truncation{};
    TruncationParams mask_truncation{};
    Index snapshot_stride{1};
    LayoutVariant layout{LayoutVariant::interleaved};

    void validate(const PdeProblem& problem) const;
    bool operator==(const StepperConfig&) const = default;
};

/// Config with dt and K from stable_time_grid.
StepperConfig make_stepper_config(const PdeProblem& problem, const GridSpec& grid,
                                  const TruncationParams& state, const TruncationParams& mask = {},
                                  double safety = 0.4);

/// Explicit Euler step operator I + dt (-c D1 + nu D2), summed over axes and
/// lifted onto the chosen layout. Advection-diffusion only.
Mpo build_linear_step_mpo(const PdeProblem& problem, const GridSpec& grid, double dt,
                          LayoutVariant variant = LayoutVariant::interleaved);

/// 0 on boundary nodes and 1 inside, compressed with `params`.
Mps dirichlet_mask_mps(const GridSpec& grid, const TruncationParams& params,
                       LayoutVariant variant = LayoutVariant::interleaved);

/// Prebuilt operators for one (problem, grid, config) triple.
struct StepPlan {
    PdeProblem problem;
    GridSpec grid;
    StepperConfig config;
    Layout layout;
    Mpo linear;     // Euler operator (advection-diffusion) or I + dt nu D2 (Burgers)
    Mpo convection; // sum of first differences (Burgers only)
    std::optional<Mps> mask;
};

StepPlan make_step_plan(const PdeProblem& problem, const GridSpec& grid, const StepperConfig& config);

Mps encode_state(const Eigen::VectorXd& u, const StepPlan& plan);
Eigen::VectorXd decode_state(const Mps& m, const StepPlan& plan);

struct StepResult {
    Mps state;
    double discarded_weight{0.0};
};

/// One compressed Euler step. Order: operator application, boundary mask
/// (Dirichlet), truncation. Burgers computes w = G u and p = u .* w with
/// truncation after every product, then u + dt (nu D2 u - p).
/// Throws NumericalError on a non-finite result; `step` is used in the message.
StepResult qtn_step(const Mps& state, const StepPlan& plan, Index step = -1);
StepResult qtn_step(const Mps& state, const PdeProblem& problem, const GridSpec& grid,
                    const StepperConfig& config);

struct StepDiagnostics {
    Index step{0};
    double time{0.0};
    Index max_bond{0};
    double discarded_weight{0.0};
    double wall_ms{0.0};
};

struct Rollout {
    std::vector<Mps> states; // filled when RolloutOptions::keep_states
    std::vector<Index> snapshot_steps;
    std::vector<Eigen::VectorXd> snapshots;
    std::vector<StepDiagnostics> diagnostics; // row 0 is the encoded initial state
    std::optional<Index> failed_step;
    std::string failure;

    bool completed() const noexcept { return !failed_step.has_value(); }
};

struct RolloutOptions {
    bool keep_states{false};
    Index steps{-1}; // -1: config.num_steps
    // Called after every state, including the initial one at step 0.
    std::function<void(Index, const Mps&)> on_state;
};

/// Iterates qtn_step from `initial`. A numerical failure stops the loop and
/// is recorded in `failed_step`; diagnostics up to that point are kept.
Rollout rollout(const StepPlan& plan, const Mps& initial, const RolloutOptions& options = {});
Rollout rollout(const PdeProblem& problem, const GridSpec& grid, const StepperConfig& config,
                const RolloutOptions& options = {});

} // namespace qtn
