#include "qtn/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qtn {

SparseMatrix stencil_matrix(const GridSpec& grid, int axis, double c_minus, double c_mid, double c_plus) {
    if (axis < 0 || axis >= grid.spatial_dim()) throw ShapeError("stencil_matrix: no such axis");
    const Index pts = grid.points(axis);
    const bool wrap = grid.boundary() == Boundary::periodic;
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(3 * grid.size()));
    for (Index f = 0; f < grid.size(); ++f) {
        auto c = grid.coordinates_of(f);
        const Index i = c[static_cast<std::size_t>(axis)];
        auto neighbour = [&](Index j) {
            c[static_cast<std::size_t>(axis)] = j;
            return grid.flat_index(c);
        };
        if (c_mid != 0.0) entries.emplace_back(f, f, c_mid);
        if (i > 0 || wrap) entries.emplace_back(f, neighbour((i - 1 + pts) % pts), c_minus);
        if (i + 1 < pts || wrap) entries.emplace_back(f, neighbour((i + 1) % pts), c_plus);
    }
    SparseMatrix m(grid.size(), grid.size());
    m.setFromTriplets(entries.begin(), entries.end());
    return m;
}

MolSystem::MolSystem(const PdeProblem& problem, const GridSpec& grid)
    : problem_(problem), grid_(grid), mask_(boundary_mask(grid)),
      masked_(grid.boundary() == Boundary::dirichlet_zero) {
    problem_.validate();
    if (problem_.boundary != grid_.boundary())
        throw ConfigError("problem.boundary", "problem and grid boundaries differ");
    if (problem_.spatial_dim != grid_.spatial_dim())
        throw ConfigError("problem.dim", "problem and grid dimensions differ");
    const Index n = grid_.size();
    linear_.resize(n, n);
    if (problem_.kind == PdeKind::burgers) convection_.resize(n, n);
    const double nu = problem_.viscosity;
    for (int a = 0; a < grid_.spatial_dim(); ++a) {
        const double h = grid_.spacing(a);
        const SparseMatrix d1 = stencil_matrix(grid_, a, -0.5 / h, 0.0, 0.5 / h);
        const SparseMatrix d2 = stencil_matrix(grid_, a, 1.0 / (h * h), -2.0 / (h * h), 1.0 / (h * h));
        if (problem_.kind == PdeKind::advection_diffusion) {
            linear_ += -problem_.velocity[static_cast<std::size_t>(a)] * d1 + nu * d2;
        } else {
            linear_ += nu * d2;
            convection_ += d1;
        }
    }
}

void MolSystem::rhs(const Eigen::VectorXd& u, Eigen::VectorXd& out) const {
    out.noalias() = linear_ * u;
    if (problem_.kind == PdeKind::burgers) out.array() -= u.array() * (convection_ * u).array();
    if (masked_) out.array() *= mask_.array();
}

Eigen::VectorXd MolSystem::rhs(const Eigen::VectorXd& u) const {
    Eigen::VectorXd out(u.size());
    rhs(u, out);
    return out;
}

Eigen::VectorXd MolSystem::euler_step(const Eigen::VectorXd& u, double dt) const {
    Eigen::VectorXd next = u + dt * rhs(u);
    if (masked_) next.array() *= mask_.array();
    return next;
}

SparseMatrix MolSystem::euler_matrix(double dt) const {
    if (problem_.kind != PdeKind::advection_diffusion)
        throw ConfigError("problem.kind", "Euler matrix exists only for linear kinds");
    SparseMatrix id(size(), size());
    id.setIdentity();
    SparseMatrix m = id + dt * linear_;
    if (masked_) m = mask_.asDiagonal() * m;
    return m;
}

Eigen::VectorXd mol_rhs(const PdeProblem& problem, const GridSpec& grid, const Eigen::VectorXd& u) {
    if (u.size() != grid.size()) throw ShapeError("mol_rhs: vector length does not match the grid");
    return MolSystem(problem, grid).rhs(u);
}

std::vector<double> uniform_times(double dt, Index steps) {
    std::vector<double> t(static_cast<std::size_t>(steps + 1));
    for (Index k = 0; k <= steps; ++k) t[static_cast<std::size_t>(k)] = static_cast<double>(k) * dt;
    return t;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b_hat
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double scaled_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& y0, const Eigen::VectorXd& y1,
                   const Rk45Options& o) {
    const auto scale = o.atol + o.rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array();
    return std::sqrt((err.array() / scale).square().mean());
}

// Initial step heuristic (Hairer, Norsett & Wanner, II.4).
double initial_step(const MolSystem& sys, const Eigen::VectorXd& y, const Eigen::VectorXd& f,
                    const Rk45Options& o, double span, Rk45Stats& stats) {
    const Eigen::VectorXd scale = (o.atol + o.rtol * y.cwiseAbs().array()).matrix();
    const double d0 = std::sqrt((y.array() / scale.array()).square().mean());
    const double d1 = std::sqrt((f.array() / scale.array()).square().mean());
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    const Eigen::VectorXd y1 = y + h0 * f;
    const Eigen::VectorXd f1 = sys.rhs(y1);
    ++stats.rhs_evaluations;
    const double d2 = std::sqrt(((f1 - f).array() / scale.array()).square().mean()) / h0;
    const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                 : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
    return std::min({100.0 * h0, h1, span});
}

} // namespace

DenseTrajectory rk45_solve(const MolSystem& sys, const Eigen::VectorXd& u0, std::span<const double> sample_times,
                           const Rk45Options& o, Rk45Stats* stats_out) {
    if (sample_times.empty() || sample_times.front() != 0.0)
        throw ConfigError("sample_times", "must start at 0");
    for (std::size_t i = 1; i < sample_times.size(); ++i)
        if (!(sample_times[i] > sample_times[i - 1])) throw ConfigError("sample_times", "must be increasing");
    if (!(o.rtol > 0.0) || !(o.atol > 0.0)) throw ConfigError("reference.rtol", "tolerances must be > 0");
    if (u0.size() != sys.size()) throw ShapeError("rk45_solve: initial state length");

    DenseTrajectory traj;
    traj.solver = "rk45_dormand_prince";
    traj.rtol = o.rtol;
    traj.atol = o.atol;
    traj.times.assign(sample_times.begin(), sample_times.end());
    traj.states.reserve(sample_times.size());
    traj.states.push_back(u0);

    Rk45Stats stats;
    const Index n = u0.size();
    Eigen::VectorXd y = u0, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y_new(n), err(n);
    sys.rhs(y, k1);
    ++stats.rhs_evaluations;
    double t = 0.0;
    const double t_end = sample_times.back();
    double h = o.initial_step > 0.0 ? o.initial_step : initial_step(sys, y, k1, o, t_end, stats);

    for (std::size_t next = 1; next < sample_times.size(); ++next) {
        const double target = sample_times[next];
        while (t < target) {
            if (stats.accepted + stats.rejected >= o.max_steps)
                throw StiffnessError("rk45_solve: step budget exhausted", t);
            if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
                throw StiffnessError("rk45_solve: step size underflow at t = " + std::to_string(t), t);
            const bool clipped = t + h >= target;
            const double step = clipped ? target - t : h;

            tmp = y + step * a21 * k1;
            sys.rhs(tmp, k2);
            tmp = y + step * (a31 * k1 + a32 * k2);
            sys.rhs(tmp, k3);
            tmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
            sys.rhs(tmp, k4);
            tmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            sys.rhs(tmp, k5);
            tmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            sys.rhs(tmp, k6);
            y_new = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            sys.rhs(y_new, k7);
            stats.rhs_evaluations += 6;
            err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            const double en = scaled_norm(err, y, y_new, o);
            if (!std::isfinite(en)) throw StiffnessError("rk45_solve: non-finite state at t = " + std::to_string(t), t);

            const double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
            if (en <= 1.0) {
                ++stats.accepted;
                stats.max_accepted_error = std::max(stats.max_accepted_error, en);
                t = clipped ? target : t + step;
                y.swap(y_new);
                k1.swap(k7);
                // a clipped step says nothing about the natural step size unless it failed
                if (!clipped || step >= h) h = step * factor;
                else h = std::max(h, step * factor);
            } else {
                ++stats.rejected;
                h = step * std::min(1.0, factor);
            }
        }
        traj.states.push_back(y);
    }
    if (stats_out) *stats_out = stats;
    return traj;
}

DenseTrajectory rk45_solve(const PdeProblem& problem, const GridSpec& grid, std::span<const double> sample_times,
                           const Rk45Options& options) {
    const MolSystem sys(problem, grid);
    return rk45_solve(sys, sample_initial_condition(problem, grid), sample_times, options);
}

DenseTrajectory euler_rollout_dense(const MolSystem& sys, const Eigen::VectorXd& u0, double dt, Index steps) {
    if (!(dt >= 0.0) || steps < 0) throw ConfigError("stepper.dt", "dt must be >= 0 and K >= 0");
    DenseTrajectory traj;
    traj.solver = "explicit_euler";
    traj.times = uniform_times(dt, steps);
    traj.states.reserve(static_cast<std::size_t>(steps + 1));
    traj.states.push_back(u0);
    for (Index k = 0; k < steps; ++k) traj.states.push_back(sys.euler_step(traj.states.back(), dt));
    return traj;
}

DenseTrajectory euler_rollout_dense(const PdeProblem& problem, const GridSpec& grid, double dt, Index steps) {
    const MolSystem sys(problem, grid);
    return euler_rollout_dense(sys, sample_initial_condition(problem, grid), dt, steps);
}

} // namespace qtn
