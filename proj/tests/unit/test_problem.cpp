#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "qtn/problem.hpp"
#include "test_support.hpp"

using namespace qtn;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("initial conditions are sampled pointwise", "[problem]") {
    PdeProblem p = testing::advdiff_problem(1, Boundary::periodic);
    const GridSpec g = GridSpec::line(16, Boundary::periodic);
    const Eigen::VectorXd u = sample_initial_condition(p, g);
    for (Index i = 0; i < 16; ++i) {
        const double x = i / 16.0;
        CHECK_THAT(u(i), WithinRel(std::exp(-100.0 * (x - 0.3) * (x - 0.3)), 1e-13));
    }

    p = testing::burgers_problem(2, Boundary::periodic);
    const GridSpec g2 = GridSpec::square(8, Boundary::periodic);
    const Eigen::VectorXd v = sample_initial_condition(p, g2);
    // flat index x * 8 + y
    const double x = 3 / 8.0, y = 5 / 8.0;
    CHECK_THAT(v(3 * 8 + 5),
               WithinAbs(1.0 + 0.5 * std::sin(2 * std::numbers::pi * x) * std::sin(2 * std::numbers::pi * y), 1e-15));
}

TEST_CASE("Dirichlet initial fields vanish on the boundary", "[problem]") {
    PdeProblem p = testing::advdiff_problem(2, Boundary::dirichlet_zero);
    p.initial_condition.width = 1.0; // nonzero at the walls before masking
    const GridSpec g = GridSpec::square(8, Boundary::dirichlet_zero);
    const Eigen::VectorXd u = sample_initial_condition(p, g);
    for (Index i = 0; i < 8; ++i) {
        CHECK(u(0 * 8 + i) == 0.0);
        CHECK(u(7 * 8 + i) == 0.0);
        CHECK(u(i * 8 + 0) == 0.0);
        CHECK(u(i * 8 + 7) == 0.0);
    }
    CHECK(u(3 * 8 + 3) > 0.0);
}

TEST_CASE("boundary mask marks the grid edges", "[problem]") {
    Eigen::VectorXd expect(8);
    expect << 0, 1, 1, 1, 1, 1, 1, 0;
    CHECK(boundary_mask(GridSpec::line(8, Boundary::dirichlet_zero)) == expect);
    CHECK(boundary_mask(GridSpec::line(8, Boundary::periodic)) == Eigen::VectorXd::Ones(8));

    const Eigen::VectorXd m2 = boundary_mask(GridSpec::square(16, Boundary::dirichlet_zero));
    CHECK(m2.sum() == 14.0 * 14.0);
}

TEST_CASE("stable time grid follows the advective and diffusive limits", "[problem]") {
    // advection limited: h / c = (1/511) / 0.5, diffusion: h^2 / (2 nu) larger
    PdeProblem p = testing::advdiff_problem(1, Boundary::dirichlet_zero, 0.5);
    const GridSpec g = GridSpec::line(512, Boundary::dirichlet_zero);
    const double h = 1.0 / 511.0;
    const double target = 0.4 * std::min(h / 0.5, h * h / (2 * 0.01));
    const TimeGrid tg = stable_time_grid(p, g);
    CHECK(tg.steps == static_cast<Index>(std::ceil(0.5 / target)));
    CHECK_THAT(tg.dt * static_cast<double>(tg.steps), WithinRel(0.5, 1e-14));
    CHECK(tg.dt <= target);

    // Burgers uses max |u0| as the speed
    PdeProblem b = testing::burgers_problem(1, Boundary::periodic, 0.5);
    const GridSpec gb = GridSpec::line(512, Boundary::periodic);
    const double hb = 1.0 / 512.0;
    const double speed = sample_initial_condition(b, gb).cwiseAbs().maxCoeff();
    const double tb = 0.4 * std::min(hb / speed, hb * hb / (2 * 0.01));
    CHECK(stable_time_grid(b, gb).steps == static_cast<Index>(std::ceil(0.5 / tb)));

    // 2D halves the diffusive limit
    PdeProblem d = testing::advdiff_problem(2, Boundary::periodic, 1.0);
    d.velocity = {0.0, 0.0};
    const GridSpec g2 = GridSpec::square(32, Boundary::periodic);
    const double h2 = 1.0 / 32.0;
    CHECK(stable_time_grid(d, g2).steps == static_cast<Index>(std::ceil(1.0 / (0.4 * h2 * h2 / (4 * 0.01)))));
}

TEST_CASE("problem validation names the offending field", "[problem]") {
    PdeProblem p = testing::advdiff_problem(1, Boundary::periodic);
    p.viscosity = -1.0;
    try {
        p.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "problem.viscosity");
    }
    p = testing::advdiff_problem(3, Boundary::periodic);
    CHECK_THROWS_AS(p.validate(), ConfigError);
    CHECK_THROWS_AS(pde_kind_from_string("heat"), ConfigError);
    CHECK(pde_kind_from_string(to_string(PdeKind::burgers)) == PdeKind::burgers);
    CHECK(initial_shape_from_string(to_string(InitialShape::sine)) == InitialShape::sine);
}
