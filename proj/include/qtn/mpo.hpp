#pragma once

#include <string>
#include <vector>

#include "qtn/mps.hpp"

namespace qtn {

/// Matrix product operator: core i has shape (R_{i-1}, d, d, R_i) with index
/// order (left bond, output s, input s', right bond). Internally a core is a
/// tensor-train core whose physical index is s + d * s'.
template <typename Scalar>
class MatrixProductOperator {
public:
    using CoreType = Core<Scalar>;

    MatrixProductOperator() = default;
    MatrixProductOperator(std::vector<CoreType> cores, int d) : cores_(std::move(cores)), d_(d) {
        detail::check_chain(cores_, Index{d} * d);
    }

    int n() const noexcept { return static_cast<int>(cores_.size()); }
    int d() const noexcept { return d_; }
    const std::vector<CoreType>& cores() const noexcept { return cores_; }
    const CoreType& core(int i) const { return cores_.at(static_cast<std::size_t>(i)); }

    // W_i^(s, s') as an R_{i-1} x R_i matrix.
    typename CoreType::ConstSliceMap slice(int i, Index out, Index in) const {
        return core(i).slice(out + Index{d_} * in);
    }

    std::vector<Index> bond_dims() const { return detail::bond_dims(cores_); }
    Index max_bond() const {
        Index m = 1;
        for (const auto& c : cores_) m = std::max(m, c.right());
        return m;
    }
    // sum_i R_{i-1} d^2 R_i
    Index parameter_count() const {
        Index p = 0;
        for (const auto& c : cores_) p += c.size();
        return p;
    }

private:
    std::vector<CoreType> cores_;
    int d_{2};
};

using Mpo = MatrixProductOperator<double>;

/// Round-off filter used when compressing analytically assembled operators.
inline constexpr TruncationParams kOperatorCompression{kUnboundedBond, 1e-14};

namespace detail {

template <typename Scalar>
void check_compatible(const MatrixProductOperator<Scalar>& a, const MatrixProductOperator<Scalar>& b,
                      const char* op) {
    if (a.n() != b.n() || a.d() != b.d())
        throw ShapeError(std::string(op) + ": operators differ in chain length or local dimension");
}

template <typename Scalar>
Core<Scalar> identity_core(Index bond, int d) {
    Core<Scalar> c(bond, Index{d} * d, bond);
    for (Index l = 0; l < bond; ++l)
        for (Index s = 0; s < d; ++s) c(l, s + Index{d} * s, l) = Scalar{1};
    return c;
}

// Position offsets that interleave (row, column) digits into the combined
// per-site index s + d * s' of the operator tensor.
inline std::vector<Index> spread_digits(int d, int n, Index weight) {
    const Index total = ipow(d, n);
    std::vector<Index> out(static_cast<std::size_t>(total));
    const Index p = Index{d} * d;
    for (Index t = 0; t < total; ++t) {
        Index rem = t, pos = 0, scale = 1;
        for (int k = 0; k < n; ++k) {
            pos += (rem % d) * weight * scale;
            rem /= d;
            scale *= p;
        }
        out[static_cast<std::size_t>(t)] = pos;
    }
    return out;
}

template <typename Scalar>
bool is_zero(const typename Core<Scalar>::ConstSliceMap& m) {
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i)
            if (m(i, j) != Scalar{0}) return false;
    return true;
}

// Core (r, d, Rw'*Dx') of carry * (W . X) contracted over the input index.
template <typename Scalar>
Core<Scalar> contract_apply(const Matrix<Scalar>& carry, const Core<Scalar>& w, const Core<Scalar>& x,
                            int d) {
    const Index r = carry.rows();
    const Index rw = w.left(), rw2 = w.right();
    const Index dx = x.left(), dx2 = x.right();
    Core<Scalar> out(r, d, rw2 * dx2);
    Matrix<Scalar> t1(r * rw2, dx);
    Matrix<Scalar> acc(r * rw2, dx2);
    for (Index s = 0; s < d; ++s) {
        acc.setZero();
        for (Index sp = 0; sp < d; ++sp) {
            const auto ws = w.slice(s + Index{d} * sp);
            if (is_zero<Scalar>(ws)) continue;
            for (Index b = 0; b < dx; ++b) {
                Eigen::Map<Matrix<Scalar>> blk(t1.col(b).data(), r, rw2);
                blk.noalias() = carry.middleCols(rw * b, rw) * ws;
            }
            acc.noalias() += t1 * x.slice(sp);
        }
        auto dst = out.slice(s);
        for (Index bp = 0; bp < dx2; ++bp)
            dst.middleCols(rw2 * bp, rw2) = Eigen::Map<const Matrix<Scalar>>(acc.col(bp).data(), r, rw2);
    }
    return out;
}

} // namespace detail

template <typename Scalar = double>
MatrixProductOperator<Scalar> mpo_identity(int n, int d = 2) {
    if (n < 1) throw ShapeError("mpo_identity: n must be >= 1");
    std::vector<Core<Scalar>> cores;
    for (int i = 0; i < n; ++i) cores.push_back(detail::identity_core<Scalar>(1, d));
    return MatrixProductOperator<Scalar>(std::move(cores), d);
}

/// TT-SVD of the operator tensor W(s_1 s'_1, ..., s_n s'_n) = M[row, col]
/// where rows/columns are flat grid indices mapped to digits by `layout`.
template <typename Scalar>
MatrixProductOperator<Scalar> mpo_from_dense(const Matrix<Scalar>& m, const Layout& layout,
                                             const TruncationParams& params = {},
                                             Index size_cap = Index{1} << 12) {
    params.validate();
    const Index n_grid = layout.grid_size();
    if (m.rows() != n_grid || m.cols() != n_grid)
        throw ShapeError("mpo_from_dense: matrix is not N x N for the layout");
    if (n_grid > size_cap) throw CapacityError("mpo_from_dense: N exceeds the size cap");
    const int d = layout.d(), n = layout.n();
    const auto row_pos = detail::spread_digits(d, n, 1);
    const auto col_pos = detail::spread_digits(d, n, d);
    Vector<Scalar> data(n_grid * n_grid);
    for (Index j = 0; j < n_grid; ++j) {
        const Index cj = col_pos[static_cast<std::size_t>(layout.tensor_index(j))];
        for (Index i = 0; i < n_grid; ++i)
            data(row_pos[static_cast<std::size_t>(layout.tensor_index(i))] + cj) = m(i, j);
    }
    return MatrixProductOperator<Scalar>(detail::tt_svd<Scalar>(data, Index{d} * d, n, params), d);
}

/// Dense N x N matrix in chain order (row/column index = big-endian digits).
template <typename Scalar>
Matrix<Scalar> mpo_to_dense(const MatrixProductOperator<Scalar>& o, Index size_cap = Index{1} << 10) {
    const Index n_grid = ipow(o.d(), o.n());
    if (n_grid > size_cap)
        throw CapacityError("mpo_to_dense: N = " + std::to_string(n_grid) + " exceeds the size cap " +
                            std::to_string(size_cap));
    const Vector<Scalar> data = detail::contract_dense(o.cores(), n_grid * n_grid);
    const auto row_pos = detail::spread_digits(o.d(), o.n(), 1);
    const auto col_pos = detail::spread_digits(o.d(), o.n(), o.d());
    Matrix<Scalar> m(n_grid, n_grid);
    for (Index j = 0; j < n_grid; ++j)
        for (Index i = 0; i < n_grid; ++i)
            m(i, j) = data(row_pos[static_cast<std::size_t>(i)] + col_pos[static_cast<std::size_t>(j)]);
    return m;
}

/// Dense matrix in flat grid order for the given layout.
template <typename Scalar>
Matrix<Scalar> mpo_to_dense(const MatrixProductOperator<Scalar>& o, const Layout& layout,
                            Index size_cap = Index{1} << 10) {
    if (layout.n() != o.n() || layout.d() != o.d()) throw ShapeError("mpo_to_dense: layout mismatch");
    const Matrix<Scalar> chain = mpo_to_dense(o, size_cap);
    const Index n_grid = chain.rows();
    Matrix<Scalar> m(n_grid, n_grid);
    for (Index j = 0; j < n_grid; ++j)
        for (Index i = 0; i < n_grid; ++i) m(i, j) = chain(layout.tensor_index(i), layout.tensor_index(j));
    return m;
}

template <typename Scalar>
MatrixProductOperator<Scalar> mpo_add(const MatrixProductOperator<Scalar>& a,
                                      const MatrixProductOperator<Scalar>& b) {
    detail::check_compatible(a, b, "mpo_add");
    return MatrixProductOperator<Scalar>(detail::direct_sum(a.cores(), b.cores()), a.d());
}

template <typename Scalar>
MatrixProductOperator<Scalar> mpo_scale(const MatrixProductOperator<Scalar>& a, Scalar alpha) {
    auto cores = a.cores();
    cores.front().left_unfolding() *= alpha;
    return MatrixProductOperator<Scalar>(std::move(cores), a.d());
}

/// Same two-sweep truncation as for states, on the operator chain.
template <typename Scalar>
MatrixProductOperator<Scalar> mpo_compress(const MatrixProductOperator<Scalar>& a,
                                           const TruncationParams& params) {
    params.validate();
    auto cores = a.cores();
    detail::left_orthogonalize(cores, 0, cores.size() - 1);
    detail::svd_sweep(cores, params);
    return MatrixProductOperator<Scalar>(std::move(cores), a.d());
}

/// Index-shift operator on a binary chain: (S u)[i] = u[i + offset].
///
/// Built from a ripple-carry adder: the bond between two sites carries the
/// carry (offset +1) or borrow (offset -1) travelling from the least
/// significant site (n-1) toward the most significant site (0). Periodic
/// wrap-around keeps both outgoing carries at site 0; the open variant keeps
/// only the no-overflow branch, so out-of-range entries vanish.
template <typename Scalar = double>
MatrixProductOperator<Scalar> shift_mpo(int n, int offset, Boundary boundary, int d = 2) {
    if (d != 2) throw UnsupportedError("shift_mpo: analytic construction needs d = 2");
    if (offset != 1 && offset != -1) throw UnsupportedError("shift_mpo: offset must be +1 or -1");
    if (n < 1) throw ShapeError("shift_mpo: n must be >= 1");
    std::vector<Core<Scalar>> cores;
    for (int k = 0; k < n; ++k) {
        const bool msb = (k == 0), lsb = (k == n - 1);
        Core<Scalar> c(msb ? 1 : 2, 4, lsb ? 1 : 2);
        for (int carry_in = 0; carry_in < 2; ++carry_in) {
            if (lsb && carry_in != 1) continue;
            for (int i = 0; i < 2; ++i) {
                int j = i + offset * carry_in;
                int carry_out = 0;
                if (j > 1) {
                    j -= 2;
                    carry_out = 1;
                } else if (j < 0) {
                    j += 2;
                    carry_out = 1;
                }
                if (msb && boundary != Boundary::periodic && carry_out != 0) continue;
                const Index l = msb ? 0 : carry_out;
                const Index r = lsb ? 0 : carry_in;
                c(l, i + 2 * j, r) += Scalar{1};
            }
        }
        cores.push_back(std::move(c));
    }
    MatrixProductOperator<Scalar> s(std::move(cores), 2);
    if (s.max_bond() > 2) throw Error("shift_mpo: bond dimension exceeds 2");
    return s;
}

/// Dense shift matrix S[i, i + offset] = 1 (wrapping when periodic).
template <typename Scalar = double>
Matrix<Scalar> dense_shift_matrix(Index points, int offset, Boundary boundary) {
    Matrix<Scalar> s = Matrix<Scalar>::Zero(points, points);
    for (Index i = 0; i < points; ++i) {
        Index j = i + offset;
        if (boundary == Boundary::periodic) j = ((j % points) + points) % points;
        if (j >= 0 && j < points) s(i, j) = Scalar{1};
    }
    return s;
}

namespace detail {

template <typename Scalar>
MatrixProductOperator<Scalar> stencil_mpo(const GridSpec& grid, int axis, Scalar c_plus, Scalar c_mid,
                                          Scalar c_minus) {
    const int n = grid.digits(axis);
    const Boundary bc = grid.boundary();
    if (bc != Boundary::periodic && bc != Boundary::dirichlet_zero)
        throw ConfigError("boundary", "unsupported boundary for stencil operators");
    if (grid.d() != 2) {
        const Index pts = grid.points(axis);
        const Matrix<Scalar> m = c_plus * dense_shift_matrix<Scalar>(pts, 1, bc) +
                                 c_mid * Matrix<Scalar>::Identity(pts, pts) +
                                 c_minus * dense_shift_matrix<Scalar>(pts, -1, bc);
        return mpo_from_dense(m, Layout(grid.d(), {n}, LayoutVariant::sequential), kOperatorCompression);
    }
    auto op = mpo_add(mpo_scale(shift_mpo<Scalar>(n, 1, bc), c_plus),
                      mpo_scale(shift_mpo<Scalar>(n, -1, bc), c_minus));
    if (c_mid != Scalar{0}) op = mpo_add(op, mpo_scale(mpo_identity<Scalar>(n, 2), c_mid));
    return mpo_compress(op, kOperatorCompression);
}

} // namespace detail

/// Centered first difference (S_{+1} - S_{-1}) / (2h) along one grid axis,
/// acting on a chain of that axis' digits only. Periodic grids wrap; Dirichlet
/// grids use the open (zero-extended) stencil.
template <typename Scalar = double>
MatrixProductOperator<Scalar> d1_mpo(const GridSpec& grid, int axis = 0) {
    const Scalar h = static_cast<Scalar>(grid.spacing(axis));
    return detail::stencil_mpo<Scalar>(grid, axis, Scalar{1} / (2 * h), Scalar{0}, Scalar{-1} / (2 * h));
}

/// Second difference (S_{+1} - 2I + S_{-1}) / h^2 along one grid axis.
template <typename Scalar = double>
MatrixProductOperator<Scalar> d2_mpo(const GridSpec& grid, int axis = 0) {
    const Scalar h = static_cast<Scalar>(grid.spacing(axis));
    const Scalar w = Scalar{1} / (h * h);
    return detail::stencil_mpo<Scalar>(grid, axis, w, -2 * w, w);
}

/// Embeds a single-axis operator into the full chain of `layout`, inserting
/// identity cores on the sites that belong to the other axes.
template <typename Scalar>
MatrixProductOperator<Scalar> lift_to_axis(const MatrixProductOperator<Scalar>& op, int axis,
                                           const Layout& layout) {
    if (axis < 0 || axis >= layout.spatial_dim()) throw ShapeError("lift_to_axis: no such axis");
    if (op.n() != layout.axis_digits(axis) || op.d() != layout.d())
        throw ShapeError("lift_to_axis: operator does not match the axis digit count");
    const auto sites = layout.sites_of_axis(axis);
    for (std::size_t t = 1; t < sites.size(); ++t)
        if (sites[t] < sites[t - 1])
            throw ShapeError("lift_to_axis: layout stores this axis out of significance order");
    std::vector<Core<Scalar>> cores;
    Index bond = 1;
    int next = 0;
    for (int j = 0; j < layout.n(); ++j) {
        if (layout.ordering()[static_cast<std::size_t>(j)].axis == axis) {
            cores.push_back(op.core(next++));
            bond = cores.back().right();
        } else {
            cores.push_back(detail::identity_core<Scalar>(bond, layout.d()));
        }
    }
    return MatrixProductOperator<Scalar>(std::move(cores), layout.d());
}

/// MPO-MPS contraction over the input index. Output bond i is R_i * D_i
/// (combined index w + R_i * x); no truncation.
template <typename Scalar>
MatrixProductState<Scalar> apply(const MatrixProductOperator<Scalar>& o, const MatrixProductState<Scalar>& x) {
    if (o.n() != x.n() || o.d() != x.d()) throw ShapeError("apply: operator and state do not match");
    const int d = x.d();
    std::vector<Core<Scalar>> cores;
    cores.reserve(static_cast<std::size_t>(x.n()));
    for (int i = 0; i < x.n(); ++i) {
        const auto& w = o.core(i);
        const auto& c = x.core(i);
        Core<Scalar> out(w.left() * c.left(), d, w.right() * c.right());
        for (Index s = 0; s < d; ++s)
            for (Index sp = 0; sp < d; ++sp)
                out.slice(s) += detail::kron<Scalar>(c.slice(sp), w.slice(s + Index{d} * sp));
        cores.push_back(std::move(out));
    }
    return MatrixProductState<Scalar>(std::move(cores), d);
}

/// truncate(apply(o, x), params) without materializing the product bonds.
template <typename Scalar>
Truncated<Scalar> apply_truncate(const MatrixProductOperator<Scalar>& o, const MatrixProductState<Scalar>& x,
                                 const TruncationParams& params) {
    if (o.n() != x.n() || o.d() != x.d()) throw ShapeError("apply: operator and state do not match");
    return detail::fused_truncate<Scalar>(
        x.n(), x.d(),
        [&](const Matrix<Scalar>& carry, int i) {
            return detail::contract_apply(carry, o.core(i), x.core(i), x.d());
        },
        params);
}

} // namespace qtn
