#include "qtn/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace qtn {

std::string_view to_string(PdeKind k) {
    switch (k) {
    case PdeKind::advection_diffusion: return "advection_diffusion";
    case PdeKind::burgers: return "burgers";
    }
    return "unknown";
}

PdeKind pde_kind_from_string(std::string_view s) {
    if (s == "advection_diffusion") return PdeKind::advection_diffusion;
    if (s == "burgers") return PdeKind::burgers;
    throw ConfigError("problem.kind", "unknown kind '" + std::string(s) + "'");
}

std::string_view to_string(InitialShape s) {
    switch (s) {
    case InitialShape::gaussian: return "gaussian";
    case InitialShape::sine: return "sine";
    }
    return "unknown";
}

InitialShape initial_shape_from_string(std::string_view s) {
    if (s == "gaussian") return InitialShape::gaussian;
    if (s == "sine") return InitialShape::sine;
    throw ConfigError("problem.initial_condition", "unknown shape '" + std::string(s) + "'");
}

double InitialCondition::operator()(double x, double y, int dim) const {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    switch (shape) {
    case InitialShape::gaussian: {
        double r2 = (x - center[0]) * (x - center[0]);
        if (dim == 2) r2 += (y - center[1]) * (y - center[1]);
        return std::exp(-width * r2);
    }
    case InitialShape::sine: {
        double s = std::sin(two_pi * x);
        if (dim == 2) s *= std::sin(two_pi * y);
        return offset + amplitude * s;
    }
    }
    return 0.0;
}

void PdeProblem::validate() const {
    if (spatial_dim != 1 && spatial_dim != 2) throw ConfigError("problem.dim", "must be 1 or 2");
    if (!std::isfinite(viscosity) || viscosity < 0.0)
        throw ConfigError("problem.viscosity", "must be finite and >= 0");
    if (!std::isfinite(final_time) || final_time <= 0.0)
        throw ConfigError("problem.final_time", "must be > 0");
    for (double v : velocity)
        if (!std::isfinite(v)) throw ConfigError("problem.velocity", "must be finite");
    if (initial_condition.shape == InitialShape::gaussian && !(initial_condition.width > 0.0))
        throw ConfigError("ic.width", "must be > 0");
}

Eigen::VectorXd sample_initial_condition(const PdeProblem& problem, const GridSpec& grid) {
    if (grid.spatial_dim() != problem.spatial_dim)
        throw ShapeError("sample_initial_condition: grid and problem dimensions differ");
    Eigen::VectorXd u(grid.size());
    for (Index f = 0; f < grid.size(); ++f) {
        const auto c = grid.coordinates_of(f);
        const double x = grid.coordinate(0, c[0]);
        const double y = grid.spatial_dim() == 2 ? grid.coordinate(1, c[1]) : 0.0;
        u(f) = problem.initial_condition(x, y, grid.spatial_dim());
    }
    if (grid.boundary() == Boundary::dirichlet_zero) u.array() *= boundary_mask(grid).array();
    return u;
}

Eigen::VectorXd boundary_mask(const GridSpec& grid) {
    Eigen::VectorXd m = Eigen::VectorXd::Ones(grid.size());
    if (grid.boundary() != Boundary::dirichlet_zero) return m;
    for (Index f = 0; f < grid.size(); ++f) {
        const auto c = grid.coordinates_of(f);
        for (int a = 0; a < grid.spatial_dim(); ++a)
            if (c[static_cast<std::size_t>(a)] == 0 || c[static_cast<std::size_t>(a)] == grid.points(a) - 1)
                m(f) = 0.0;
    }
    return m;
}

double max_transport_speed(const PdeProblem& problem, const GridSpec& grid) {
    if (problem.kind == PdeKind::burgers)
        return sample_initial_condition(problem, grid).cwiseAbs().maxCoeff();
    double s = 0.0;
    for (int a = 0; a < problem.spatial_dim; ++a)
        s = std::max(s, std::abs(problem.velocity[static_cast<std::size_t>(a)]));
    return s;
}

TimeGrid stable_time_grid(const PdeProblem& problem, const GridSpec& grid, double safety) {
    if (!(safety > 0.0)) throw ConfigError("stepper.safety", "must be > 0");
    const double speed = max_transport_speed(problem, grid);
    double limit = std::numeric_limits<double>::infinity();
    for (int a = 0; a < grid.spatial_dim(); ++a) {
        const double h = grid.spacing(a);
        if (speed > 0.0) limit = std::min(limit, h / speed);
        if (problem.viscosity > 0.0)
            limit = std::min(limit, h * h / (2.0 * problem.viscosity * grid.spatial_dim()));
    }
    const double target = safety * limit;
    const Index steps =
        std::isfinite(target) ? std::max<Index>(1, static_cast<Index>(std::ceil(problem.final_time / target)))
                              : 1;
    return {problem.final_time / static_cast<double>(steps), steps};
}

} // namespace qtn
