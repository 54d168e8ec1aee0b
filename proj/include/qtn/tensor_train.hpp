#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Core>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "qtn/errors.hpp"
#include "qtn/tensorization.hpp"

namespace qtn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline constexpr Index kUnboundedBond = std::numeric_limits<Index>::max();

/// Bond cap and relative singular-value threshold for SVD truncation.
///
/// At every bond, singular values with sigma_i <= eps_svd * sigma_1 are
/// dropped, at most chi_max are kept, and at least one always survives.
struct TruncationParams {
    Index chi_max{kUnboundedBond};
    double eps_svd{0.0};

    static constexpr TruncationParams exact() { return {}; }
    bool is_exact() const noexcept { return chi_max == kUnboundedBond && eps_svd == 0.0; }

    void validate() const {
        if (chi_max < 1) throw ConfigError("chi_max", "must be >= 1");
        if (!(eps_svd >= 0.0)) throw ConfigError("eps_svd", "must be >= 0");
    }
    bool operator==(const TruncationParams&) const = default;
};

/// One order-3 tensor-train core with index order (left, physical, right).
///
/// Storage is column-major with the left bond fastest, then the physical
/// index, then the right bond. The same buffer is therefore simultaneously the
/// left unfolding (left*phys x right) and the right unfolding
/// (left x phys*right); slice(s) is the left x right matrix A^(s).
template <typename Scalar>
class Core {
public:
    static_assert(std::is_floating_point_v<Scalar>, "cores hold real floating-point entries");

    using MatrixType = Matrix<Scalar>;
    using SliceMap = Eigen::Map<MatrixType, 0, Eigen::OuterStride<>>;
    using ConstSliceMap = Eigen::Map<const MatrixType, 0, Eigen::OuterStride<>>;

    Core() = default;
    Core(Index left, Index phys, Index right)
        : left_(left), phys_(phys), data_(MatrixType::Zero(left * phys, right)) {
        if (left < 1 || phys < 1 || right < 1) throw ShapeError("Core: dimensions must be >= 1");
    }

    static Core from_left_unfolding(MatrixType m, Index left, Index phys) {
        if (m.rows() != left * phys) throw ShapeError("Core: left unfolding has wrong row count");
        Core c;
        c.left_ = left;
        c.phys_ = phys;
        c.data_ = std::move(m);
        return c;
    }

    // m is (left x phys*right).
    static Core from_right_unfolding(const MatrixType& m, Index phys) {
        if (m.cols() % phys != 0) throw ShapeError("Core: right unfolding has wrong column count");
        Core c;
        c.left_ = m.rows();
        c.phys_ = phys;
        c.data_ = Eigen::Map<const MatrixType>(m.data(), m.rows() * phys, m.cols() / phys);
        return c;
    }

    Index left() const noexcept { return left_; }
    Index phys() const noexcept { return phys_; }
    Index right() const noexcept { return data_.cols(); }
    Index size() const noexcept { return data_.size(); }

    const MatrixType& left_unfolding() const noexcept { return data_; }
    MatrixType& left_unfolding() noexcept { return data_; }

    Eigen::Map<const MatrixType> right_unfolding() const {
        return Eigen::Map<const MatrixType>(data_.data(), left_, phys_ * right());
    }
    Eigen::Map<MatrixType> right_unfolding() {
        return Eigen::Map<MatrixType>(data_.data(), left_, phys_ * right());
    }

    ConstSliceMap slice(Index s) const {
        return ConstSliceMap(data_.data() + left_ * s, left_, right(),
                             Eigen::OuterStride<>(left_ * phys_));
    }
    SliceMap slice(Index s) {
        return SliceMap(data_.data() + left_ * s, left_, right(), Eigen::OuterStride<>(left_ * phys_));
    }

    Scalar operator()(Index l, Index s, Index r) const { return data_(l + left_ * s, r); }
    Scalar& operator()(Index l, Index s, Index r) { return data_(l + left_ * s, r); }

private:
    Index left_{0};
    Index phys_{0};
    MatrixType data_;
};

namespace detail {

template <typename Scalar>
using Chain = std::vector<Core<Scalar>>;

template <typename Scalar>
void check_chain(const Chain<Scalar>& cores, Index phys) {
    if (cores.empty()) throw ShapeError("tensor train needs at least one core");
    if (cores.front().left() != 1 || cores.back().right() != 1)
        throw ShapeError("tensor train boundary bonds must be 1");
    for (std::size_t i = 0; i < cores.size(); ++i) {
        if (cores[i].phys() != phys) throw ShapeError("core physical dimension mismatch");
        if (i + 1 < cores.size() && cores[i].right() != cores[i + 1].left())
            throw ShapeError("core bond dimensions are inconsistent at bond " + std::to_string(i));
    }
}

template <typename Scalar>
std::vector<Index> bond_dims(const Chain<Scalar>& cores) {
    std::vector<Index> b;
    b.reserve(cores.size() + 1);
    b.push_back(cores.front().left());
    for (const auto& c : cores) b.push_back(c.right());
    return b;
}

// Number of singular values kept under `params`; `sv` is sorted descending.
template <typename Derived>
Index keep_count(const Eigen::MatrixBase<Derived>& sv, const TruncationParams& params) {
    using Scalar = typename Derived::Scalar;
    if (sv.size() == 0) return 0;
    const Scalar cut = static_cast<Scalar>(params.eps_svd) * sv(0);
    Index r = 0;
    while (r < sv.size() && sv(r) > cut) ++r;
    r = std::min(r, params.chi_max);
    return std::max<Index>(r, 1);
}

template <typename Scalar>
struct TruncatedSvd {
    Matrix<Scalar> u;       // m x r
    Vector<Scalar> sigma;   // r, descending
    Matrix<Scalar> v;       // n x r
    Scalar discarded_sq{0}; // sum of dropped sigma^2
};

template <typename Scalar>
TruncatedSvd<Scalar> truncated_svd(const Matrix<Scalar>& m, const TruncationParams& params) {
    Eigen::JacobiSVD<Matrix<Scalar>> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw NumericalError("SVD did not converge");
    const auto& sv = svd.singularValues();
    const Index r = keep_count(sv, params);
    TruncatedSvd<Scalar> out;
    out.u = svd.matrixU().leftCols(r);
    out.sigma = sv.head(r);
    out.v = svd.matrixV().leftCols(r);
    out.discarded_sq = sv.tail(sv.size() - r).squaredNorm();
    return out;
}

// Thin QR: a = q * r with q (m x k) orthonormal columns, k = min(m, n).
template <typename Scalar>
void thin_qr(const Matrix<Scalar>& a, Matrix<Scalar>& q, Matrix<Scalar>& r) {
    const Index k = std::min(a.rows(), a.cols());
    Eigen::HouseholderQR<Matrix<Scalar>> qr(a);
    q = qr.householderQ() * Matrix<Scalar>::Identity(a.rows(), k);
    r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
}

// Makes cores [first, last) left-orthonormal, pushing the non-isometric
// factor into core `last`.
template <typename Scalar>
void left_orthogonalize(Chain<Scalar>& cores, std::size_t first, std::size_t last) {
    Matrix<Scalar> q, r;
    for (std::size_t i = first; i < last; ++i) {
        thin_qr<Scalar>(cores[i].left_unfolding(), q, r);
        const Index phys = cores[i].phys();
        cores[i] = Core<Scalar>::from_left_unfolding(std::move(q), cores[i].left(), phys);
        Matrix<Scalar> next = r * cores[i + 1].right_unfolding();
        cores[i + 1] = Core<Scalar>::from_right_unfolding(next, cores[i + 1].phys());
    }
}

// Makes cores (last, first] right-orthonormal, pushing the non-isometric
// factor into core `last`. Requires first >= last.
template <typename Scalar>
void right_orthogonalize(Chain<Scalar>& cores, std::size_t first, std::size_t last) {
    Matrix<Scalar> q, r;
    for (std::size_t i = first; i > last; --i) {
        const Index phys = cores[i].phys();
        thin_qr<Scalar>(cores[i].right_unfolding().transpose(), q, r);
        cores[i] = Core<Scalar>::from_right_unfolding(q.transpose(), phys);
        Matrix<Scalar> prev = cores[i - 1].left_unfolding() * r.transpose();
        cores[i - 1] = Core<Scalar>::from_left_unfolding(std::move(prev), cores[i - 1].left(),
                                                         cores[i - 1].phys());
    }
}

template <typename Scalar>
struct SweepResult {
    Scalar discarded_sq{0};
    Vector<Scalar> first_bond_sigma; // singular values kept at bond (0, 1)
};

// Right-to-left SVD truncation sweep. Assumes cores [0, n-1) are
// left-orthonormal, so each SVD happens at the orthogonality center. Leaves
// cores 1..n-1 right-orthonormal with the center at site 0.
template <typename Scalar>
SweepResult<Scalar> svd_sweep(Chain<Scalar>& cores, const TruncationParams& params) {
    SweepResult<Scalar> res;
    for (std::size_t i = cores.size() - 1; i > 0; --i) {
        const Index phys = cores[i].phys();
        Matrix<Scalar> b = cores[i].right_unfolding();
        auto t = truncated_svd<Scalar>(b, params);
        res.discarded_sq += t.discarded_sq;
        cores[i] = Core<Scalar>::from_right_unfolding(t.v.transpose(), phys);
        Matrix<Scalar> prev = cores[i - 1].left_unfolding() * (t.u * t.sigma.asDiagonal());
        cores[i - 1] = Core<Scalar>::from_left_unfolding(std::move(prev), cores[i - 1].left(),
                                                         cores[i - 1].phys());
        if (i == 1) res.first_bond_sigma = std::move(t.sigma);
    }
    return res;
}

// Dense vector (big-endian over physical indices) represented by the chain.
template <typename Scalar>
Vector<Scalar> contract_dense(const Chain<Scalar>& cores, Index cap) {
    const Index phys = cores.front().phys();
    Index total = 1;
    for (std::size_t i = 0; i < cores.size(); ++i) {
        if (total > cap / phys)
            throw CapacityError("densification of " + std::to_string(cores.size()) +
                                " sites exceeds the size cap " + std::to_string(cap));
        total *= phys;
    }
    Matrix<Scalar> x = Matrix<Scalar>::Ones(1, 1);
    for (const auto& c : cores) {
        Matrix<Scalar> next(x.rows() * phys, c.right());
        for (Index s = 0; s < phys; ++s)
            next(Eigen::seqN(s, x.rows(), phys), Eigen::all) = x * c.slice(s);
        x = std::move(next);
    }
    return x.col(0);
}

// Sequential TT-SVD of a big-endian dense vector of length phys^n.
template <typename Scalar>
Chain<Scalar> tt_svd(const Vector<Scalar>& data, Index phys, int n, const TruncationParams& params,
                     Scalar* discarded_sq = nullptr) {
    if (n < 1) throw ShapeError("tt_svd: order must be >= 1");
    if (data.size() != ipow(phys, n)) throw ShapeError("tt_svd: data length is not phys^n");
    Chain<Scalar> cores;
    cores.reserve(static_cast<std::size_t>(n));
    Matrix<Scalar> rest = data.transpose(); // D x phys^(n-k)
    Scalar dropped{0};
    for (int k = 0; k < n; ++k) {
        const Index bond = rest.rows();
        const Index tail = rest.cols() / phys;
        Matrix<Scalar> c(bond * phys, tail);
        for (Index s = 0; s < phys; ++s) c.middleRows(bond * s, bond) = rest.middleCols(s * tail, tail);
        if (k == n - 1) {
            cores.push_back(Core<Scalar>::from_left_unfolding(std::move(c), bond, phys));
            break;
        }
        auto t = truncated_svd<Scalar>(c, params);
        dropped += t.discarded_sq;
        rest = t.sigma.asDiagonal() * t.v.transpose();
        cores.push_back(Core<Scalar>::from_left_unfolding(std::move(t.u), bond, phys));
    }
    if (discarded_sq) *discarded_sq = dropped;
    return cores;
}

// Bond-wise direct sum: interior bonds add, boundary bonds stay 1.
template <typename Scalar>
Chain<Scalar> direct_sum(const Chain<Scalar>& a, const Chain<Scalar>& b) {
    const std::size_t n = a.size();
    const Index phys = a.front().phys();
    Chain<Scalar> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& ca = a[i];
        const auto& cb = b[i];
        if (n == 1) {
            Core<Scalar> c(1, phys, 1);
            c.left_unfolding() = ca.left_unfolding() + cb.left_unfolding();
            out.push_back(std::move(c));
            continue;
        }
        const bool first = (i == 0), last = (i == n - 1);
        const Index l = first ? 1 : ca.left() + cb.left();
        const Index r = last ? 1 : ca.right() + cb.right();
        Core<Scalar> c(l, phys, r);
        for (Index s = 0; s < phys; ++s) {
            auto dst = c.slice(s);
            const Index l0 = first ? 0 : ca.left();
            const Index r0 = last ? 0 : ca.right();
            dst.block(0, 0, ca.left(), ca.right()) = ca.slice(s);
            dst.block(l0, r0, cb.left(), cb.right()) = cb.slice(s);
        }
        out.push_back(std::move(c));
    }
    return out;
}

template <typename Scalar>
Matrix<Scalar> kron(const Eigen::Ref<const Matrix<Scalar>>& outer,
                    const Eigen::Ref<const Matrix<Scalar>>& inner) {
    Matrix<Scalar> out(outer.rows() * inner.rows(), outer.cols() * inner.cols());
    for (Index j = 0; j < outer.cols(); ++j)
        for (Index i = 0; i < outer.rows(); ++i)
            out.block(i * inner.rows(), j * inner.cols(), inner.rows(), inner.cols()) =
                outer(i, j) * inner;
    return out;
}

template <typename Scalar>
bool has_orthonormal_columns(const Matrix<Scalar>& m, double tol) {
    const Matrix<Scalar> g = m.transpose() * m;
    return (g - Matrix<Scalar>::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() <= tol;
}

} // namespace detail

} // namespace qtn
