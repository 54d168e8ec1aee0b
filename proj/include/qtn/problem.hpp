#pragma once

#include <array>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "qtn/tensorization.hpp"

namespace qtn {

enum class PdeKind { advection_diffusion, burgers };

std::string_view to_string(PdeKind k);
PdeKind pde_kind_from_string(std::string_view s);

enum class InitialShape { gaussian, sine };

std::string_view to_string(InitialShape s);
InitialShape initial_shape_from_string(std::string_view s);

/// Closed-form initial field.
///
/// gaussian: exp(-width * |x - center|^2).
/// sine: offset + amplitude * sin(2 pi x) in 1D, offset + amplitude *
/// sin(2 pi x) sin(2 pi y) in 2D (x, y measured from the axis origin).
struct InitialCondition {
    InitialShape shape{InitialShape::gaussian};
    std::array<double, 2> center{0.3, 0.4};
    double width{100.0};
    double offset{1.0};
    double amplitude{0.5};

    double operator()(double x, double y = 0.0, int dim = 1) const;
    bool operator==(const InitialCondition&) const = default;
};

struct PdeProblem {
    PdeKind kind{PdeKind::advection_diffusion};
    int spatial_dim{1};
    std::array<double, 2> velocity{0.0, 0.0};
    double viscosity{0.0};
    Boundary boundary{Boundary::periodic};
    InitialCondition initial_condition{};
    double final_time{1.0};

    // Throws ConfigError naming the first offending field.
    void validate() const;
    bool operator==(const PdeProblem&) const = default;
};

/// Initial field at grid nodes in flat row-major order. Dirichlet boundary
/// nodes are set to zero so the state starts inside the constrained space.
Eigen::VectorXd sample_initial_condition(const PdeProblem& problem, const GridSpec& grid);

/// 0 on Dirichlet boundary nodes, 1 elsewhere (all ones for periodic grids).
Eigen::VectorXd boundary_mask(const GridSpec& grid);

/// Largest transport speed entering the CFL limit: max |velocity component|
/// for advection-diffusion, max |u0| for Burgers.
double max_transport_speed(const PdeProblem& problem, const GridSpec& grid);

struct TimeGrid {
    double dt{0.0};
    Index steps{0};
};

/// Explicit Euler step: safety * min(h / speed, h^2 / (2 nu dim)) over all
/// axes, then shrunk so that T / dt is an integer.
TimeGrid stable_time_grid(const PdeProblem& problem, const GridSpec& grid, double safety = 0.4);

} // namespace qtn
