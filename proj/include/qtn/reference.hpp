#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "qtn/problem.hpp"

namespace qtn {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Sampled trajectory of flat grid vectors.
struct DenseTrajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::string solver;
    double rtol{0.0};
    double atol{0.0};

    std::size_t size() const noexcept { return states.size(); }
};

/// Three-point stencil c_minus u[i-1] + c_mid u[i] + c_plus u[i+1] along one
/// axis of the full grid. Periodic axes wrap; Dirichlet axes drop neighbours
/// beyond the ends.
SparseMatrix stencil_matrix(const GridSpec& grid, int axis, double c_minus, double c_mid, double c_plus);

/// Method-of-lines semi-discretization with second-order centered differences.
///
/// advection_diffusion: du/dt = A u, A = sum_a (-c_a D1_a + nu D2_a).
/// burgers: du/dt = -u .* (G u) + nu (sum_a D2_a) u, G = sum_a D1_a.
/// On Dirichlet grids the right-hand side is zeroed on boundary nodes.
class MolSystem {
public:
    MolSystem(const PdeProblem& problem, const GridSpec& grid);

    const PdeProblem& problem() const noexcept { return problem_; }
    const GridSpec& grid() const noexcept { return grid_; }
    Index size() const noexcept { return grid_.size(); }

    // Linear part: A for advection-diffusion, the viscous term for Burgers.
    const SparseMatrix& linear_part() const noexcept { return linear_; }
    // Sum of first differences; empty for advection-diffusion.
    const SparseMatrix& convection() const noexcept { return convection_; }
    const Eigen::VectorXd& mask() const noexcept { return mask_; }

    void rhs(const Eigen::VectorXd& u, Eigen::VectorXd& out) const;
    Eigen::VectorXd rhs(const Eigen::VectorXd& u) const;

    // mask .* (u + dt * rhs(u))
    Eigen::VectorXd euler_step(const Eigen::VectorXd& u, double dt) const;

    // Dense-equivalent Euler matrix diag(mask) (I + dt A); linear kinds only.
    SparseMatrix euler_matrix(double dt) const;

private:
    PdeProblem problem_;
    GridSpec grid_;
    SparseMatrix linear_;
    SparseMatrix convection_;
    Eigen::VectorXd mask_;
    bool masked_;
};

Eigen::VectorXd mol_rhs(const PdeProblem& problem, const GridSpec& grid, const Eigen::VectorXd& u);

struct Rk45Options {
    double rtol{1e-8};
    double atol{1e-10};
    double initial_step{0.0}; // 0 selects a step automatically
    long max_steps{50'000'000};

    bool operator==(const Rk45Options&) const = default;
};

struct Rk45Stats {
    long accepted{0};
    long rejected{0};
    long rhs_evaluations{0};
    double max_accepted_error{0.0}; // scaled error norm, <= 1 by construction
};

/// Adaptive Dormand-Prince 4(5) with FSAL. Steps are clipped so the
/// integrator lands exactly on every sample time. Throws StiffnessError when
/// the step size underflows.
DenseTrajectory rk45_solve(const MolSystem& system, const Eigen::VectorXd& u0,
                           std::span<const double> sample_times, const Rk45Options& options = {},
                           Rk45Stats* stats = nullptr);
DenseTrajectory rk45_solve(const PdeProblem& problem, const GridSpec& grid,
                           std::span<const double> sample_times, const Rk45Options& options = {});

/// u_{k+1} = mask .* (u_k + dt rhs(u_k)) from the sampled initial condition.
DenseTrajectory euler_rollout_dense(const MolSystem& system, const Eigen::VectorXd& u0, double dt,
                                    Index steps);
DenseTrajectory euler_rollout_dense(const PdeProblem& problem, const GridSpec& grid, double dt,
                                    Index steps);

/// Times k * dt for k = 0..steps.
std::vector<double> uniform_times(double dt, Index steps);

} // namespace qtn
