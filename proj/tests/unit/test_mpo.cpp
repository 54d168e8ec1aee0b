#include <catch_amalgamated.hpp>

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

#include "qtn/mpo.hpp"
#include "test_support.hpp"

using namespace qtn;
using qtn::testing::dense;
using qtn::testing::rel_err;
using qtn::testing::Rng;

namespace {

Eigen::MatrixXd tridiagonal(Index points, double lower, double diag, double upper, bool wrap) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(points, points);
    for (Index i = 0; i < points; ++i) {
        m(i, i) = diag;
        if (i + 1 < points) m(i, i + 1) = upper;
        if (i > 0) m(i, i - 1) = lower;
    }
    if (wrap) {
        m(points - 1, 0) = upper;
        m(0, points - 1) = lower;
    }
    return m;
}

double max_rel_entry_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

} // namespace

TEST_CASE("identity MPO is the identity", "[mpo]") {
    const Mpo id = mpo_identity(5);
    CHECK(mpo_to_dense(id) == Eigen::MatrixXd::Identity(32, 32));
    CHECK(id.max_bond() == 1);
    Rng rng(1);
    const Mps x = qtn::testing::random_mps(5, 4, rng);
    CHECK(rel_err(dense(apply(id, x)), dense(x)) <= 1e-15);
}

TEST_CASE("mpo_from_dense round-trips through mpo_to_dense", "[mpo]") {
    Rng rng(2);
    const Layout seq(2, {4}, LayoutVariant::sequential);
    const Eigen::MatrixXd m = qtn::testing::random_matrix(16, 16, rng);
    CHECK((mpo_to_dense(mpo_from_dense(m, seq)) - m).norm() <= 1e-12 * m.norm());

    const Layout il(2, {2, 2}, LayoutVariant::interleaved);
    const Mpo o = mpo_from_dense(m, il);
    CHECK((mpo_to_dense(o, il) - m).norm() <= 1e-12 * m.norm());
    CHECK_THROWS_AS(mpo_from_dense(Eigen::MatrixXd(8, 8), seq), ShapeError);
    CHECK_THROWS_AS(mpo_to_dense(mpo_identity(11)), CapacityError);
}

TEST_CASE("operator-state application matches dense matvec", "[mpo][property]") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 3 + trial % 6;
        const Mpo a = qtn::testing::random_mpo(n, 1 + trial % 5, rng);
        const Mps x = qtn::testing::random_mps(n, 1 + trial % 7, rng);
        const Eigen::VectorXd ref = mpo_to_dense(a) * dense(x);
        CHECK(rel_err(dense(apply(a, x)), ref) <= 1e-10);
        const auto bx = x.bond_dims(), ba = a.bond_dims(), by = apply(a, x).bond_dims();
        for (std::size_t i = 0; i < by.size(); ++i) CHECK(by[i] == bx[i] * ba[i]);
    }
}

TEST_CASE("fused apply-truncate equals truncate of apply", "[mpo]") {
    Rng rng(4);
    const Mpo a = qtn::testing::random_mpo(9, 4, rng);
    const Mps x = qtn::testing::random_mps(9, 8, rng);
    for (const TruncationParams params : {TruncationParams::exact(), TruncationParams{6, 0.0}}) {
        const auto fused = apply_truncate(a, x, params);
        const auto ref = truncate(apply(a, x), params);
        CHECK(rel_err(dense(fused.state), dense(ref.state)) <= 1e-10);
        CHECK(std::abs(fused.discarded_weight - ref.discarded_weight) <= 1e-10 * dense(ref.state).norm());
        CHECK(is_canonical(fused.state));
    }
    CHECK_THROWS_AS(apply(a, qtn::testing::random_mps(8, 2, rng)), ShapeError);
}

TEST_CASE("mpo_add and mpo_scale are linear", "[mpo]") {
    Rng rng(5);
    const Mpo a = qtn::testing::random_mpo(5, 3, rng);
    const Mpo b = qtn::testing::random_mpo(5, 2, rng);
    const Eigen::MatrixXd ref = 2.0 * mpo_to_dense(a) - 0.5 * mpo_to_dense(b);
    const Mpo c = mpo_add(mpo_scale(a, 2.0), mpo_scale(b, -0.5));
    CHECK((mpo_to_dense(c) - ref).norm() <= 1e-12 * ref.norm());
    const Mpo cc = mpo_compress(c, kOperatorCompression);
    CHECK((mpo_to_dense(cc) - ref).norm() <= 1e-12 * ref.norm());
    CHECK(cc.max_bond() <= c.max_bond());
}

TEST_CASE("shift MPO on 8 points is the explicit permutation", "[mpo]") {
    Eigen::MatrixXd perm = Eigen::MatrixXd::Zero(8, 8);
    for (Index i = 0; i < 8; ++i) perm(i, (i + 1) % 8) = 1.0;
    CHECK(mpo_to_dense(shift_mpo(3, 1, Boundary::periodic)) == perm);
    CHECK(mpo_to_dense(shift_mpo(3, -1, Boundary::periodic)) == perm.transpose());

    Eigen::VectorXd u(8);
    u << 0, 1, 2, 3, 4, 5, 6, 7;
    const Mps x = mps_from_dense(DenseTensor<double>(2, 3, u));
    Eigen::VectorXd expected(8);
    expected << 1, 2, 3, 4, 5, 6, 7, 0;
    CHECK((dense(apply(shift_mpo(3, 1, Boundary::periodic), x)) - expected).norm() <= 1e-12);
}

TEST_CASE("shift MPOs match dense shifts with bond at most 2", "[mpo][property]") {
    for (int n = 1; n <= 10; ++n) {
        const Index pts = Index{1} << n;
        for (Boundary bc : {Boundary::periodic, Boundary::dirichlet_zero}) {
            for (int offset : {1, -1}) {
                const Mpo s = shift_mpo(n, offset, bc);
                CHECK(s.max_bond() <= 2);
                CHECK(mpo_to_dense(s, pts) == dense_shift_matrix(pts, offset, bc));
            }
        }
    }
    CHECK_THROWS_AS(shift_mpo(3, 2, Boundary::periodic), UnsupportedError);
    CHECK_THROWS_AS(shift_mpo(3, 1, Boundary::periodic, 3), UnsupportedError);
}

TEST_CASE("second difference on a 16-point Dirichlet grid is tridiagonal", "[mpo]") {
    const GridSpec grid = GridSpec::line(16, Boundary::dirichlet_zero);
    const double h = grid.spacing(0);
    const Eigen::MatrixXd ref = tridiagonal(16, 1.0, -2.0, 1.0, false) / (h * h);
    CHECK(max_rel_entry_error(mpo_to_dense(d2_mpo(grid)), ref) <= 1e-12);
}

TEST_CASE("difference operators are exact for both boundaries", "[mpo][property]") {
    for (int n : {3, 6, 10}) {
        const Index pts = Index{1} << n;
        for (Boundary bc : {Boundary::periodic, Boundary::dirichlet_zero}) {
            const GridSpec grid = GridSpec::line(pts, bc);
            const double h = grid.spacing(0);
            const bool wrap = bc == Boundary::periodic;
            const Eigen::MatrixXd d1 = tridiagonal(pts, -1.0, 0.0, 1.0, wrap) / (2.0 * h);
            const Eigen::MatrixXd d2 = tridiagonal(pts, 1.0, -2.0, 1.0, wrap) / (h * h);
            const Mpo o1 = d1_mpo(grid), o2 = d2_mpo(grid);
            CHECK(max_rel_entry_error(mpo_to_dense(o1, pts), d1) <= 1e-12);
            CHECK(max_rel_entry_error(mpo_to_dense(o2, pts), d2) <= 1e-12);
            CHECK(o1.max_bond() <= 4);
            CHECK(o2.max_bond() <= 4);
        }
    }
}

TEST_CASE("stencils annihilate constants and differentiate linear functions", "[mpo]") {
    const GridSpec grid = GridSpec::line(64, Boundary::periodic);
    const double h = grid.spacing(0);
    const Mps ones = ones_mps(6);
    CHECK(dense(apply(d1_mpo(grid), ones)).cwiseAbs().maxCoeff() <= 1e-12 / h);
    CHECK(dense(apply(d2_mpo(grid), ones)).cwiseAbs().maxCoeff() <= 1e-12 / (h * h));

    const GridSpec dir = GridSpec::line(64, Boundary::dirichlet_zero);
    Eigen::VectorXd lin(64);
    for (Index i = 0; i < 64; ++i) lin(i) = dir.coordinate(0, i);
    const Eigen::VectorXd dx = dense(apply(d1_mpo(dir), mps_from_dense(DenseTensor<double>(2, 6, lin))));
    for (Index i = 1; i < 63; ++i) CHECK(std::abs(dx(i) - 1.0) <= 1e-10);
}

TEST_CASE("stencil builders fall back to dense assembly for d = 3", "[mpo]") {
    const GridSpec grid = GridSpec::line(27, Boundary::periodic, 0.0, 1.0, 3);
    const double h = grid.spacing(0);
    const Eigen::MatrixXd ref = tridiagonal(27, 1.0, -2.0, 1.0, true) / (h * h);
    CHECK(max_rel_entry_error(mpo_to_dense(d2_mpo(grid)), ref) <= 1e-12);
}

TEST_CASE("lifted axis operators equal permuted Kronecker products", "[mpo]") {
    const GridSpec grid = GridSpec::square(8, Boundary::periodic);
    const Layout layout = Layout::for_grid(grid, LayoutVariant::interleaved);
    const GridSpec line = GridSpec::line(8, Boundary::periodic);
    const double h = line.spacing(0);
    const Eigen::MatrixXd d1 = tridiagonal(8, -1.0, 0.0, 1.0, true) / (2.0 * h);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(8, 8);
    // flat index = ix * ny + iy, so x acts on the outer Kronecker factor
    const Eigen::MatrixXd kx = Eigen::kroneckerProduct(d1, id);
    const Eigen::MatrixXd ky = Eigen::kroneckerProduct(id, d1);

    const Mpo lx = lift_to_axis(d1_mpo(line), 0, layout);
    const Mpo ly = lift_to_axis(d1_mpo(line), 1, layout);
    CHECK(max_rel_entry_error(mpo_to_dense(lx, layout), kx) <= 1e-12);
    CHECK(max_rel_entry_error(mpo_to_dense(ly, layout), ky) <= 1e-12);

    const Layout seq = Layout::for_grid(grid, LayoutVariant::sequential);
    CHECK(max_rel_entry_error(mpo_to_dense(lift_to_axis(d1_mpo(line), 1, seq), seq), ky) <= 1e-12);
    CHECK_THROWS_AS(lift_to_axis(d1_mpo(GridSpec::line(16, Boundary::periodic)), 0, layout), ShapeError);
}

TEST_CASE("operator composition is a homomorphism", "[mpo][property]") {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + trial % 5;
        const Mpo a = qtn::testing::random_mpo(n, 3, rng);
        const Mpo b = qtn::testing::random_mpo(n, 2, rng);
        const Mps x = qtn::testing::random_mps(n, 4, rng);
        const Eigen::VectorXd lhs = dense(apply(a, apply(b, x)));
        const Eigen::VectorXd rhs = mpo_to_dense(a) * mpo_to_dense(b) * dense(x);
        CHECK(rel_err(lhs, rhs) <= 1e-10);
    }
}
