#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "qtn/reference.hpp"
#include "qtn/stepper.hpp"

namespace qtn {

/// ||u - v|| / ||v||. Throws DegenerateMetricError when ||v|| = 0.
double relative_l2(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// Index of the sample at time t, within `tolerance`. AlignmentError otherwise.
std::size_t aligned_sample(const std::vector<double>& times, double t, double tolerance);

/// ref - pred at each requested time. Both trajectories are looked up within
/// half a step `dt`.
DenseTrajectory signed_difference(const DenseTrajectory& ref, const DenseTrajectory& pred,
                                  std::span<const double> times, double dt);

struct HorizonCurve {
    std::vector<Index> horizons;
    std::vector<double> mean;
    std::vector<double> std_dev; // population std over restarts
    std::vector<Index> restarts;
};

struct HorizonOptions {
    std::vector<Index> horizons;  // empty: default_horizon_grid
    Index max_horizon{-1};        // -1: K
    Index restart_stride{1};
    unsigned threads{0};          // 0: hardware concurrency
};

/// {0, 1, 2, 5, 10, 20, 50, ...} up to min(K, max_horizon).
std::vector<Index> default_horizon_grid(Index steps, Index max_horizon = -1);

/// For every restart k in {0, s, 2s, ...}: encode ref state k, roll out with
/// qtn_step and compare with ref state k + m for each horizon m (k + m <= K).
/// `ref` must hold the K + 1 states on the Euler time grid. Restarts run in
/// parallel; the reduction runs in restart order so the result does not
/// depend on the thread count.
HorizonCurve restart_averaged_error(const DenseTrajectory& ref, const StepPlan& plan,
                                    const HorizonOptions& options = {});

struct ErrorBoundReport {
    double lipschitz{0.0};       // L; NaN when not computed (Burgers)
    double one_step_error{0.0};  // e
    double initial_mismatch{0.0};
    std::vector<double> delta;   // delta_m, m = 0..steps
    std::vector<double> bound;   // L^m delta_0 + sum_{j<m} L^j e
    bool asserted{false};
    bool holds{true};
    double worst_margin{0.0};    // max(delta_m - bound_m)
};

struct BoundOptions {
    Index steps{-1};          // -1: config.num_steps
    double slack{1e-12};
    double power_tol{1e-10};
    int power_max_iter{100'000};
    // Added to the initial state before encoding for the restart form.
    Eigen::VectorXd initial_perturbation;
};

/// Spectral norm by power iteration on M^T M; throws NumericalError when it
/// does not reach `tol` relative change.
double spectral_norm(const SparseMatrix& m, double tol = 1e-10, int max_iter = 100'000);

/// Rolls out the compressed stepper and the dense Euler map from the same
/// start. e is the largest one-step defect ||qtn_step(u_k) - F(u_k)|| along
/// the compressed trajectory. For linear kinds L is ||F||_2 and the bound is
/// checked at every m; for Burgers only e and delta_m are reported.
ErrorBoundReport verify_error_bound(const StepPlan& plan, const Eigen::VectorXd& u0,
                                    const BoundOptions& options = {});

} // namespace qtn
