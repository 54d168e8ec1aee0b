#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "qtn/errors.hpp"

namespace qtn {

using Index = Eigen::Index;

enum class Boundary { periodic, dirichlet_zero };

std::string_view to_string(Boundary b);
Boundary boundary_from_string(std::string_view s);

// Integer power d^k with overflow guard.
Index ipow(Index base, int exp);

// Returns k if value == d^k (k >= 1), -1 otherwise.
int exact_log(Index value, int d);

struct Axis {
    Index points{0};
    double lo{0.0};
    double hi{1.0};

    bool operator==(const Axis&) const = default;
};

/// Uniform tensor-product grid with N = d^n points in total.
///
/// Axis 0 is x (slowest in flat row-major order), axis 1 is y. Periodic axes
/// place nodes at lo + i*h with h = (hi - lo)/points; Dirichlet axes include
/// both endpoints, h = (hi - lo)/(points - 1).
class GridSpec {
public:
    GridSpec(std::vector<Axis> axes, Boundary boundary, int d = 2);

    static GridSpec line(Index points, Boundary boundary, double lo = 0.0, double hi = 1.0,
                         int d = 2);
    static GridSpec square(Index points_per_axis, Boundary boundary, double lo = 0.0,
                           double hi = 1.0, int d = 2);

    int spatial_dim() const noexcept { return static_cast<int>(axes_.size()); }
    int d() const noexcept { return d_; }
    Boundary boundary() const noexcept { return boundary_; }
    const Axis& axis(int a) const { return axes_.at(static_cast<std::size_t>(a)); }
    Index points(int a) const { return axis(a).points; }
    int digits(int a) const { return digits_.at(static_cast<std::size_t>(a)); }
    double spacing(int a) const;
    double coordinate(int a, Index i) const;
    Index size() const noexcept { return size_; }
    int chain_length() const noexcept { return n_; }

    // Flat row-major index of a grid point given per-axis coordinates.
    Index flat_index(std::span<const Index> coords) const;
    std::vector<Index> coordinates_of(Index flat) const;

    bool operator==(const GridSpec&) const = default;

private:
    std::vector<Axis> axes_;
    std::vector<int> digits_;
    Boundary boundary_;
    int d_;
    int n_{0};
    Index size_{1};
};

enum class LayoutVariant { sequential, interleaved };

std::string_view to_string(LayoutVariant v);
LayoutVariant layout_variant_from_string(std::string_view s);

/// (axis, digit significance) carried by one chain site. Significance 0 is
/// the least significant digit of that axis' coordinate.
struct SiteLabel {
    int axis{0};
    int significance{0};
    bool operator==(const SiteLabel&) const = default;
};

/// Assignment of grid-index digits to chain sites.
///
/// sequential: sites hold the big-endian digits of the flat row-major grid
/// index, so x digits come first (msb first), then y digits.
/// interleaved: x_msb, y_msb, x_msb-1, y_msb-1, ... (requires equal digit
/// counts on both axes). In 1D both variants coincide.
class Layout {
public:
    Layout(int d, std::vector<int> axis_digits, LayoutVariant variant);
    // Arbitrary ordering; throws ShapeError unless it is a bijection onto all
    // (axis, significance) pairs.
    Layout(int d, std::vector<int> axis_digits, std::vector<SiteLabel> ordering);

    static Layout for_grid(const GridSpec& grid, LayoutVariant variant);

    int d() const noexcept { return d_; }
    int n() const noexcept { return static_cast<int>(ordering_.size()); }
    int spatial_dim() const noexcept { return static_cast<int>(axis_digits_.size()); }
    int axis_digits(int a) const { return axis_digits_.at(static_cast<std::size_t>(a)); }
    Index grid_size() const noexcept { return grid_size_; }
    LayoutVariant variant() const noexcept { return variant_; }
    const std::vector<SiteLabel>& ordering() const noexcept { return ordering_; }
    // True when the tensor index equals the flat grid index.
    bool is_identity() const noexcept { return identity_; }

    // Chain sites holding the digits of `axis`, ordered msb -> lsb.
    std::vector<int> sites_of_axis(int axis) const;

    // Flat grid index -> big-endian linear index of the digit tensor.
    Index tensor_index(Index flat) const;
    Index flat_index(Index tensor_index) const;

private:
    void validate();

    int d_;
    std::vector<int> axis_digits_;
    std::vector<SiteLabel> ordering_;
    LayoutVariant variant_;
    Index grid_size_{1};
    bool identity_{false};
    std::vector<Index> to_tensor_;
};

std::vector<int> index_to_digits(Index i, const Layout& layout);
std::vector<int> index_to_digits(std::array<Index, 2> row_col, const Layout& layout);
Index digits_to_index(std::span<const int> digits, const Layout& layout);

/// Order-n tensor with all modes of size d, stored in big-endian order: the
/// entry at digits (s_1, ..., s_n) lives at sum_j s_j d^(n-j).
template <typename Scalar>
struct DenseTensor {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    int d{2};
    int order{0};
    Vector data;

    DenseTensor() = default;
    DenseTensor(int d_, int order_) : d(d_), order(order_), data(Vector::Zero(ipow(d_, order_))) {}
    DenseTensor(int d_, int order_, Vector values) : d(d_), order(order_), data(std::move(values)) {
        if (data.size() != ipow(d, order))
            throw ShapeError("DenseTensor: data length does not match d^order");
    }

    Index size() const noexcept { return data.size(); }

    Index linear_index(std::span<const int> digits) const {
        if (static_cast<int>(digits.size()) != order)
            throw ShapeError("DenseTensor: digit count does not match order");
        Index idx = 0;
        for (int s : digits) {
            if (s < 0 || s >= d) throw RangeError("DenseTensor: digit out of range");
            idx = idx * d + s;
        }
        return idx;
    }

    Scalar& operator()(std::span<const int> digits) { return data(linear_index(digits)); }
    const Scalar& operator()(std::span<const int> digits) const {
        return data(linear_index(digits));
    }
};

template <typename Derived>
DenseTensor<typename Derived::Scalar> encode(const Eigen::MatrixBase<Derived>& u,
                                             const Layout& layout) {
    using Scalar = typename Derived::Scalar;
    if (u.size() != layout.grid_size())
        throw ShapeError("encode: vector length " + std::to_string(u.size()) +
                         " does not match grid size " + std::to_string(layout.grid_size()));
    DenseTensor<Scalar> t(layout.d(), layout.n());
    if (layout.is_identity()) {
        t.data = u;
        return t;
    }
    for (Index i = 0; i < u.size(); ++i) t.data(layout.tensor_index(i)) = u(i);
    return t;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> decode(const DenseTensor<Scalar>& t,
                                                const Layout& layout) {
    if (t.d != layout.d() || t.order != layout.n() || t.size() != layout.grid_size())
        throw ShapeError("decode: tensor shape does not match layout");
    if (layout.is_identity()) return t.data;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> u(t.size());
    for (Index i = 0; i < u.size(); ++i) u(i) = t.data(layout.tensor_index(i));
    return u;
}

} // namespace qtn
