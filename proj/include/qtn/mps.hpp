#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qtn/tensor_train.hpp"

namespace qtn {

/// Open-boundary matrix product state over n sites of local dimension d.
///
/// Core i has shape (D_{i-1}, d, D_i) with D_0 = D_n = 1. Sites are numbered
/// 0..n-1 and bond i sits between sites i-1 and i. When `center()` is set,
/// cores left of it are left-orthonormal and cores right of it are
/// right-orthonormal. The cores always represent the full tensor;
/// `center_singular_values()` is a copy of the Schmidt coefficients on the
/// bond to the right of the center, not a factor removed from the cores.
template <typename Scalar>
class MatrixProductState {
public:
    using CoreType = Core<Scalar>;
    using VectorType = Vector<Scalar>;

    MatrixProductState() = default;
    MatrixProductState(std::vector<CoreType> cores, int d, std::optional<int> center = std::nullopt,
                       VectorType center_sv = {})
        : cores_(std::move(cores)), d_(d), center_(center), center_sv_(std::move(center_sv)) {
        detail::check_chain(cores_, d_);
        if (center_ && (*center_ < 0 || *center_ >= n()))
            throw RangeError("MatrixProductState: center out of range");
    }

    int n() const noexcept { return static_cast<int>(cores_.size()); }
    int d() const noexcept { return d_; }
    const std::vector<CoreType>& cores() const noexcept { return cores_; }
    const CoreType& core(int i) const { return cores_.at(static_cast<std::size_t>(i)); }

    std::vector<Index> bond_dims() const { return detail::bond_dims(cores_); }
    Index max_bond() const {
        Index m = 1;
        for (const auto& c : cores_) m = std::max(m, c.right());
        return m;
    }
    Index parameter_count() const {
        Index p = 0;
        for (const auto& c : cores_) p += c.size();
        return p;
    }

    std::optional<int> center() const noexcept { return center_; }
    const VectorType& center_singular_values() const noexcept { return center_sv_; }

private:
    std::vector<CoreType> cores_;
    int d_{2};
    std::optional<int> center_;
    VectorType center_sv_;
};

using Mps = MatrixProductState<double>;

template <typename Scalar>
struct Truncated {
    MatrixProductState<Scalar> state;
    Scalar discarded_weight{0};
};

namespace detail {

template <typename Scalar>
void check_compatible(const MatrixProductState<Scalar>& a, const MatrixProductState<Scalar>& b,
                      const char* op) {
    if (a.n() != b.n() || a.d() != b.d())
        throw ShapeError(std::string(op) + ": states differ in chain length or local dimension");
}

} // namespace detail

/// TT-SVD: sequential left-to-right SVDs of the unfoldings. Exact (up to
/// round-off) for TruncationParams::exact(); bond i never exceeds
/// d^min(i, n-i).
template <typename Scalar>
MatrixProductState<Scalar> mps_from_dense(const DenseTensor<Scalar>& t,
                                          const TruncationParams& params = {}) {
    params.validate();
    if (t.order < 1 || t.size() != ipow(t.d, t.order))
        throw ShapeError("mps_from_dense: tensor modes are not all of size d");
    auto cores = detail::tt_svd<Scalar>(t.data, t.d, t.order, params);
    for (int i = 1; i < t.order; ++i) {
        const Index bound = ipow(t.d, std::min(i, t.order - i));
        if (cores[static_cast<std::size_t>(i)].left() > bound)
            throw Error("mps_from_dense: bond " + std::to_string(i) + " exceeds d^min(i,n-i)");
    }
    return MatrixProductState<Scalar>(std::move(cores), t.d, t.order - 1);
}

template <typename Scalar>
DenseTensor<Scalar> mps_to_dense(const MatrixProductState<Scalar>& m, Index size_cap = Index{1} << 20) {
    return DenseTensor<Scalar>(m.d(), m.n(), detail::contract_dense(m.cores(), size_cap));
}

/// Mixed-canonical form around site k (0-based). The represented tensor is
/// unchanged; Schmidt values on bond (k, k+1) are recorded when k < n-1.
template <typename Scalar>
MatrixProductState<Scalar> canonicalize(const MatrixProductState<Scalar>& m, int k) {
    if (k < 0 || k >= m.n()) throw RangeError("canonicalize: center site out of range");
    auto cores = m.cores();
    detail::left_orthogonalize(cores, 0, static_cast<std::size_t>(k));
    detail::right_orthogonalize(cores, cores.size() - 1, static_cast<std::size_t>(k));
    Vector<Scalar> sv;
    if (k + 1 < m.n()) {
        Eigen::JacobiSVD<Matrix<Scalar>> svd(cores[static_cast<std::size_t>(k)].left_unfolding());
        sv = svd.singularValues();
    }
    return MatrixProductState<Scalar>(std::move(cores), m.d(), k, std::move(sv));
}

/// Left-to-right QR sweep followed by a right-to-left SVD truncation sweep.
/// The result has its orthogonality center at site 0. The discarded weight is
/// sqrt of the sum of all dropped sigma^2 over the sweep.
template <typename Scalar>
Truncated<Scalar> truncate(const MatrixProductState<Scalar>& m, const TruncationParams& params) {
    params.validate();
    auto cores = m.cores();
    detail::left_orthogonalize(cores, 0, cores.size() - 1);
    auto sweep = detail::svd_sweep(cores, params);
    return {MatrixProductState<Scalar>(std::move(cores), m.d(), 0, std::move(sweep.first_bond_sigma)),
            std::sqrt(sweep.discarded_sq)};
}

template <typename Scalar>
Scalar inner(const MatrixProductState<Scalar>& a, const MatrixProductState<Scalar>& b) {
    detail::check_compatible(a, b, "inner");
    Matrix<Scalar> env = Matrix<Scalar>::Ones(1, 1);
    for (int i = 0; i < a.n(); ++i) {
        const auto& ca = a.core(i);
        const auto& cb = b.core(i);
        Matrix<Scalar> next = Matrix<Scalar>::Zero(ca.right(), cb.right());
        for (Index s = 0; s < a.d(); ++s) next.noalias() += ca.slice(s).transpose() * env * cb.slice(s);
        env = std::move(next);
    }
    return env(0, 0);
}

template <typename Scalar>
Scalar norm(const MatrixProductState<Scalar>& a) {
    if (a.center()) return a.core(*a.center()).left_unfolding().norm();
    return std::sqrt(std::max(inner(a, a), Scalar{0}));
}

template <typename Scalar>
MatrixProductState<Scalar> add(const MatrixProductState<Scalar>& a, const MatrixProductState<Scalar>& b) {
    detail::check_compatible(a, b, "add");
    return MatrixProductState<Scalar>(detail::direct_sum(a.cores(), b.cores()), a.d());
}

/// Multiplies the represented tensor by alpha (applied to the center core, or
/// to core 0 when no center is set, so canonical structure is kept).
template <typename Scalar>
MatrixProductState<Scalar> scale(const MatrixProductState<Scalar>& a, Scalar alpha) {
    auto cores = a.cores();
    const int site = a.center().value_or(0);
    cores[static_cast<std::size_t>(site)].left_unfolding() *= alpha;
    Vector<Scalar> sv = a.center_singular_values() * std::abs(alpha);
    return MatrixProductState<Scalar>(std::move(cores), a.d(), a.center(), std::move(sv));
}

/// Entrywise product; bond dims multiply. Combined bond index is a + D_a * b.
template <typename Scalar>
MatrixProductState<Scalar> hadamard(const MatrixProductState<Scalar>& a,
                                    const MatrixProductState<Scalar>& b) {
    detail::check_compatible(a, b, "hadamard");
    std::vector<Core<Scalar>> cores;
    cores.reserve(static_cast<std::size_t>(a.n()));
    for (int i = 0; i < a.n(); ++i) {
        const auto& ca = a.core(i);
        const auto& cb = b.core(i);
        Core<Scalar> c(ca.left() * cb.left(), a.d(), ca.right() * cb.right());
        for (Index s = 0; s < a.d(); ++s)
            c.slice(s) = detail::kron<Scalar>(cb.slice(s), ca.slice(s));
        cores.push_back(std::move(c));
    }
    return MatrixProductState<Scalar>(std::move(cores), a.d());
}

namespace detail {

// Core (r, d, Da'*Db') of carry * (A (x) B) without forming the product core.
template <typename Scalar>
Core<Scalar> contract_hadamard(const Matrix<Scalar>& carry, const Core<Scalar>& ca,
                               const Core<Scalar>& cb) {
    const Index r = carry.rows();
    const Index da = ca.left(), db = cb.left();
    const Index ra = ca.right(), rb = cb.right();
    const Index d = ca.phys();
    Core<Scalar> out(r, d, ra * rb);
    Matrix<Scalar> t1(r * ra, db);
    for (Index s = 0; s < d; ++s) {
        const auto as = ca.slice(s);
        for (Index b = 0; b < db; ++b) {
            Eigen::Map<Matrix<Scalar>> blk(t1.col(b).data(), r, ra);
            blk.noalias() = carry.middleCols(da * b, da) * as;
        }
        const Matrix<Scalar> o = t1 * cb.slice(s); // (r*ra) x rb
        auto dst = out.slice(s);
        for (Index bp = 0; bp < rb; ++bp)
            dst.middleCols(ra * bp, ra) = Eigen::Map<const Matrix<Scalar>>(o.col(bp).data(), r, ra);
    }
    return out;
}

// Runs the left-to-right QR sweep over cores produced on the fly by
// `make_core(carry, i)`, then the SVD truncation sweep.
template <typename Scalar, typename MakeCore>
Truncated<Scalar> fused_truncate(int n, int d, MakeCore&& make_core, const TruncationParams& params) {
    params.validate();
    Chain<Scalar> cores;
    cores.reserve(static_cast<std::size_t>(n));
    Matrix<Scalar> carry = Matrix<Scalar>::Ones(1, 1);
    Matrix<Scalar> q, r;
    for (int i = 0; i < n; ++i) {
        Core<Scalar> c = make_core(carry, i);
        if (i == n - 1) {
            cores.push_back(std::move(c));
            break;
        }
        thin_qr<Scalar>(c.left_unfolding(), q, r);
        cores.push_back(Core<Scalar>::from_left_unfolding(std::move(q), c.left(), d));
        carry = std::move(r);
    }
    auto sweep = svd_sweep(cores, params);
    return {MatrixProductState<Scalar>(std::move(cores), d, 0, std::move(sweep.first_bond_sigma)),
            std::sqrt(sweep.discarded_sq)};
}

} // namespace detail

/// truncate(hadamard(a, b), params) without materializing the product bonds.
template <typename Scalar>
Truncated<Scalar> hadamard_truncate(const MatrixProductState<Scalar>& a,
                                    const MatrixProductState<Scalar>& b,
                                    const TruncationParams& params) {
    detail::check_compatible(a, b, "hadamard");
    return detail::fused_truncate<Scalar>(
        a.n(), a.d(),
        [&](const Matrix<Scalar>& carry, int i) {
            return detail::contract_hadamard(carry, a.core(i), b.core(i));
        },
        params);
}

/// Product state from one length-d vector per site.
template <typename Scalar>
MatrixProductState<Scalar> product_state(std::span<const Vector<Scalar>> factors) {
    if (factors.empty()) throw ShapeError("product_state: no factors");
    const Index d = factors.front().size();
    std::vector<Core<Scalar>> cores;
    for (const auto& f : factors) {
        if (f.size() != d) throw ShapeError("product_state: factor sizes differ");
        Core<Scalar> c(1, d, 1);
        c.left_unfolding().col(0) = f;
        cores.push_back(std::move(c));
    }
    return MatrixProductState<Scalar>(std::move(cores), static_cast<int>(d));
}

template <typename Scalar = double>
MatrixProductState<Scalar> ones_mps(int n, int d = 2) {
    std::vector<Vector<Scalar>> f(static_cast<std::size_t>(n), Vector<Scalar>::Ones(d));
    return product_state<Scalar>(f);
}

template <typename Scalar = double>
MatrixProductState<Scalar> basis_state(std::span<const int> digits, int d = 2) {
    std::vector<Vector<Scalar>> f;
    for (int s : digits) {
        if (s < 0 || s >= d) throw RangeError("basis_state: digit out of range");
        f.push_back(Vector<Scalar>::Unit(d, s));
    }
    return product_state<Scalar>(f);
}

/// Checks the isometry conditions implied by the recorded center: left
/// unfoldings left of it and right unfoldings right of it are orthonormal.
template <typename Scalar>
bool is_canonical(const MatrixProductState<Scalar>& m, double tol = 1e-10) {
    if (!m.center()) return false;
    const int k = *m.center();
    for (int i = 0; i < k; ++i)
        if (!detail::has_orthonormal_columns<Scalar>(m.core(i).left_unfolding(), tol)) return false;
    for (int i = k + 1; i < m.n(); ++i)
        if (!detail::has_orthonormal_columns<Scalar>(m.core(i).right_unfolding().transpose(), tol))
            return false;
    return true;
}

} // namespace qtn
