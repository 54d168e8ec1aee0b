#include <catch_amalgamated.hpp>

#include "qtn/tensorization.hpp"
#include "test_support.hpp"

using namespace qtn;
using qtn::testing::Rng;

TEST_CASE("index_to_digits follows big-endian binary expansion in 1D", "[tensorization]") {
    const Layout layout(2, {3}, LayoutVariant::sequential);
    CHECK(index_to_digits(5, layout) == std::vector<int>{1, 0, 1});
    CHECK(index_to_digits(0, layout) == std::vector<int>{0, 0, 0});
    CHECK(index_to_digits(7, layout) == std::vector<int>{1, 1, 1});
    for (Index i = 0; i < 8; ++i) CHECK(digits_to_index(index_to_digits(i, layout), layout) == i);
}

TEST_CASE("interleaved 2D layout alternates row and column digits", "[tensorization]") {
    const Layout layout(2, {2, 2}, LayoutVariant::interleaved);
    CHECK(index_to_digits(std::array<Index, 2>{1, 2}, layout) == std::vector<int>{0, 1, 1, 0});
    CHECK(index_to_digits(std::array<Index, 2>{3, 0}, layout) == std::vector<int>{1, 0, 1, 0});
    // flat index of (row 1, col 2) in a 4x4 grid is 6
    CHECK(index_to_digits(6, layout) == std::vector<int>{0, 1, 1, 0});
    CHECK(layout.sites_of_axis(0) == std::vector<int>{0, 2});
    CHECK(layout.sites_of_axis(1) == std::vector<int>{1, 3});
}

TEST_CASE("index_to_digits rejects out-of-range indices", "[tensorization]") {
    const Layout layout(2, {3}, LayoutVariant::sequential);
    CHECK_THROWS_AS(index_to_digits(8, layout), RangeError);
    CHECK_THROWS_AS(index_to_digits(-1, layout), RangeError);
    const Layout layout2(2, {2, 2}, LayoutVariant::interleaved);
    CHECK_THROWS_AS(index_to_digits(std::array<Index, 2>{4, 0}, layout2), RangeError);
}

TEST_CASE("encode reshapes and decode inverts", "[tensorization]") {
    const Layout layout(2, {2}, LayoutVariant::sequential);
    Eigen::VectorXd u(4);
    u << 1.0, 2.0, 3.0, 4.0;
    const auto t = encode(u, layout);
    const std::vector<int> d00{0, 0}, d01{0, 1}, d10{1, 0}, d11{1, 1};
    CHECK(t(d00) == 1.0);
    CHECK(t(d01) == 2.0);
    CHECK(t(d10) == 3.0);
    CHECK(t(d11) == 4.0);
    CHECK(decode(t, layout) == u);

    const Layout l2d(2, {2, 2}, LayoutVariant::interleaved);
    Eigen::VectorXd grid = Eigen::VectorXd::Zero(16);
    grid(3 * 4 + 0) = 7.0;
    const auto t2 = encode(grid, l2d);
    const std::vector<int> digits{1, 0, 1, 0};
    CHECK(t2(digits) == 7.0);
}

TEST_CASE("decode of special tensors", "[tensorization]") {
    const Layout layout(2, {6}, LayoutVariant::sequential);
    DenseTensor<double> zero(2, 6);
    CHECK(decode(zero, layout).isZero(0.0));

    DenseTensor<double> one(2, 6);
    const std::vector<int> ones(6, 1);
    one(ones) = 3.5;
    const auto u = decode(one, layout);
    CHECK(u(63) == 3.5);
    CHECK(u.head(63).isZero(0.0));
}

TEST_CASE("encode/decode are mutually inverse for every layout", "[tensorization][property]") {
    Rng rng(11);
    for (int bits : {3, 6, 12}) {
        const Index size = Index{1} << bits;
        for (int trial = 0; trial < 3; ++trial) {
            const Eigen::VectorXd u = qtn::testing::random_vector(size, rng);
            const Layout seq(2, {bits}, LayoutVariant::sequential);
            CHECK(decode(encode(u, seq), seq) == u);
            if (bits % 2 == 0) {
                const Layout il(2, {bits / 2, bits / 2}, LayoutVariant::interleaved);
                const auto t = encode(u, il);
                CHECK(decode(t, il) == u);
                for (Index i = 0; i < size; i += 7) CHECK(t(index_to_digits(i, il)) == u(i));
            }
        }
    }
}

TEST_CASE("encode rejects wrong lengths and decode wrong shapes", "[tensorization]") {
    const Layout layout(2, {3}, LayoutVariant::sequential);
    CHECK_THROWS_AS(encode(Eigen::VectorXd::Zero(7), layout), ShapeError);
    CHECK_THROWS_AS(decode(DenseTensor<double>(2, 4), layout), ShapeError);
}

TEST_CASE("layout orderings must be bijections", "[tensorization]") {
    CHECK_NOTHROW(Layout(2, {2, 2}, std::vector<SiteLabel>{{0, 1}, {1, 1}, {1, 0}, {0, 0}}));
    CHECK_THROWS_AS(Layout(2, {2, 2}, std::vector<SiteLabel>{{0, 1}, {0, 1}, {1, 0}, {0, 0}}),
                    ShapeError);
    CHECK_THROWS_AS(Layout(2, {2, 2}, std::vector<SiteLabel>{{0, 1}, {1, 1}, {1, 0}}), ShapeError);
    CHECK_THROWS_AS(Layout(2, {2, 3}, LayoutVariant::interleaved), ShapeError);

    const Layout custom(2, {2, 2}, std::vector<SiteLabel>{{0, 1}, {0, 0}, {1, 1}, {1, 0}});
    CHECK(custom.is_identity());
}

TEST_CASE("interleaving keeps x-neighbours on the least significant x digit", "[tensorization]") {
    const Layout layout(2, {3, 3}, LayoutVariant::interleaved);
    const int lsb_x = layout.sites_of_axis(0).back();
    for (Index x = 0; x < 8; x += 2) {
        for (Index y = 0; y < 8; ++y) {
            auto digits = index_to_digits(std::array<Index, 2>{x, y}, layout);
            digits[static_cast<std::size_t>(lsb_x)] ^= 1;
            CHECK(digits_to_index(digits, layout) == (x + 1) * 8 + y);
        }
    }
}

TEST_CASE("grid spacing and power-of-d constraint", "[tensorization]") {
    const auto periodic = GridSpec::line(512, Boundary::periodic);
    CHECK(periodic.spacing(0) == 1.0 / 512.0);
    CHECK(periodic.chain_length() == 9);
    const auto dirichlet = GridSpec::line(512, Boundary::dirichlet_zero);
    CHECK(dirichlet.spacing(0) == 1.0 / 511.0);
    CHECK(dirichlet.coordinate(0, 511) == Catch::Approx(1.0));
    const auto sq = GridSpec::square(64, Boundary::periodic);
    CHECK(sq.size() == 4096);
    CHECK(sq.chain_length() == 12);
    CHECK_THROWS_AS(GridSpec::line(500, Boundary::periodic), ShapeError);
    CHECK_THROWS_AS(GridSpec::line(1, Boundary::periodic), ShapeError);
    CHECK(GridSpec::line(27, Boundary::periodic, 0.0, 1.0, 3).chain_length() == 3);
}
