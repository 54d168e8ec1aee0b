#include "qtn/tensorization.hpp"

#include <algorithm>
#include <limits>

namespace qtn {

std::string_view to_string(Boundary b) {
    switch (b) {
    case Boundary::periodic: return "periodic";
    case Boundary::dirichlet_zero: return "dirichlet_zero";
    }
    return "unknown";
}

Boundary boundary_from_string(std::string_view s) {
    if (s == "periodic") return Boundary::periodic;
    if (s == "dirichlet_zero" || s == "dirichlet") return Boundary::dirichlet_zero;
    throw ConfigError("unknown boundary '" + std::string(s) + "'");
}

std::string_view to_string(LayoutVariant v) {
    switch (v) {
    case LayoutVariant::sequential: return "sequential";
    case LayoutVariant::interleaved: return "interleaved";
    }
    return "unknown";
}

LayoutVariant layout_variant_from_string(std::string_view s) {
    if (s == "sequential") return LayoutVariant::sequential;
    if (s == "interleaved") return LayoutVariant::interleaved;
    throw ConfigError("unknown layout variant '" + std::string(s) + "'");
}

Index ipow(Index base, int exp) {
    if (exp < 0) throw RangeError("ipow: negative exponent");
    Index r = 1;
    for (int i = 0; i < exp; ++i) {
        if (r > std::numeric_limits<Index>::max() / base) throw RangeError("ipow: overflow");
        r *= base;
    }
    return r;
}

int exact_log(Index value, int d) {
    if (d < 2 || value < d) return -1;
    int k = 0;
    while (value > 1) {
        if (value % d != 0) return -1;
        value /= d;
        ++k;
    }
    return k;
}

// ---------------------------------------------------------------- GridSpec

GridSpec::GridSpec(std::vector<Axis> axes, Boundary boundary, int d)
    : axes_(std::move(axes)), boundary_(boundary), d_(d) {
    if (d_ < 2) throw ShapeError("GridSpec: local dimension d must be >= 2");
    if (axes_.empty() || axes_.size() > 2) throw ShapeError("GridSpec: only 1D and 2D grids");
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        const int k = exact_log(axes_[a].points, d_);
        if (k < 1)
            throw ShapeError("GridSpec: axis " + std::to_string(a) + " has " +
                             std::to_string(axes_[a].points) + " points, not a power of " +
                             std::to_string(d_));
        if (!(axes_[a].hi > axes_[a].lo)) throw ShapeError("GridSpec: empty axis extent");
        if (boundary_ == Boundary::dirichlet_zero && axes_[a].points < 3)
            throw ShapeError("GridSpec: Dirichlet axis needs at least 3 points");
        digits_.push_back(k);
        n_ += k;
        size_ *= axes_[a].points;
    }
}

GridSpec GridSpec::line(Index points, Boundary boundary, double lo, double hi, int d) {
    return GridSpec({Axis{points, lo, hi}}, boundary, d);
}

GridSpec GridSpec::square(Index points_per_axis, Boundary boundary, double lo, double hi, int d) {
    return GridSpec({Axis{points_per_axis, lo, hi}, Axis{points_per_axis, lo, hi}}, boundary, d);
}

double GridSpec::spacing(int a) const {
    const Axis& ax = axis(a);
    const double len = ax.hi - ax.lo;
    return boundary_ == Boundary::periodic ? len / static_cast<double>(ax.points)
                                           : len / static_cast<double>(ax.points - 1);
}

double GridSpec::coordinate(int a, Index i) const {
    if (i < 0 || i >= points(a)) throw RangeError("GridSpec: coordinate index out of range");
    return axis(a).lo + static_cast<double>(i) * spacing(a);
}

Index GridSpec::flat_index(std::span<const Index> coords) const {
    if (static_cast<int>(coords.size()) != spatial_dim())
        throw ShapeError("GridSpec: coordinate count does not match dimension");
    Index flat = 0;
    for (int a = 0; a < spatial_dim(); ++a) {
        if (coords[a] < 0 || coords[a] >= points(a))
            throw RangeError("GridSpec: grid coordinate out of range");
        flat = flat * points(a) + coords[a];
    }
    return flat;
}

std::vector<Index> GridSpec::coordinates_of(Index flat) const {
    if (flat < 0 || flat >= size_) throw RangeError("GridSpec: flat index out of range");
    std::vector<Index> c(axes_.size());
    for (int a = spatial_dim() - 1; a >= 0; --a) {
        c[a] = flat % points(a);
        flat /= points(a);
    }
    return c;
}

// ------------------------------------------------------------------ Layout

namespace {

std::vector<SiteLabel> make_ordering(const std::vector<int>& axis_digits, LayoutVariant variant) {
    std::vector<SiteLabel> order;
    const int dims = static_cast<int>(axis_digits.size());
    if (variant == LayoutVariant::sequential || dims == 1) {
        for (int a = 0; a < dims; ++a)
            for (int k = axis_digits[a] - 1; k >= 0; --k) order.push_back({a, k});
        return order;
    }
    const int k0 = axis_digits.front();
    if (!std::all_of(axis_digits.begin(), axis_digits.end(), [&](int k) { return k == k0; }))
        throw ShapeError("Layout: interleaved ordering needs equal digit counts per axis");
    for (int k = k0 - 1; k >= 0; --k)
        for (int a = 0; a < dims; ++a) order.push_back({a, k});
    return order;
}

} // namespace

Layout::Layout(int d, std::vector<int> axis_digits, LayoutVariant variant)
    : d_(d), axis_digits_(std::move(axis_digits)), variant_(variant) {
    ordering_ = make_ordering(axis_digits_, variant_);
    validate();
}

Layout::Layout(int d, std::vector<int> axis_digits, std::vector<SiteLabel> ordering)
    : d_(d), axis_digits_(std::move(axis_digits)), ordering_(std::move(ordering)),
      variant_(LayoutVariant::sequential) {
    validate();
    if (!identity_) variant_ = LayoutVariant::interleaved;
}

Layout Layout::for_grid(const GridSpec& grid, LayoutVariant variant) {
    std::vector<int> digits;
    for (int a = 0; a < grid.spatial_dim(); ++a) digits.push_back(grid.digits(a));
    return Layout(grid.d(), std::move(digits), variant);
}

void Layout::validate() {
    if (d_ < 2) throw ShapeError("Layout: d must be >= 2");
    if (axis_digits_.empty()) throw ShapeError("Layout: no axes");
    int total = 0;
    for (int k : axis_digits_) {
        if (k < 1) throw ShapeError("Layout: every axis needs at least one digit");
        total += k;
    }
    if (static_cast<int>(ordering_.size()) != total)
        throw ShapeError("Layout: ordering does not cover every (axis, significance) pair");
    std::vector<std::vector<bool>> seen(axis_digits_.size());
    for (std::size_t a = 0; a < axis_digits_.size(); ++a) seen[a].assign(axis_digits_[a], false);
    for (const SiteLabel& s : ordering_) {
        if (s.axis < 0 || s.axis >= spatial_dim() || s.significance < 0 ||
            s.significance >= axis_digits_[s.axis])
            throw ShapeError("Layout: site label out of range");
        if (seen[s.axis][s.significance]) throw ShapeError("Layout: ordering is not a bijection");
        seen[s.axis][s.significance] = true;
    }
    grid_size_ = ipow(d_, total);
    const auto seq = make_ordering(axis_digits_, LayoutVariant::sequential);
    identity_ = (seq == ordering_);
    to_tensor_.clear();
    if (!identity_ && grid_size_ <= (Index{1} << 24)) {
        to_tensor_.resize(static_cast<std::size_t>(grid_size_));
        for (Index i = 0; i < grid_size_; ++i) {
            const auto digits = index_to_digits(i, *this);
            Index t = 0;
            for (int s : digits) t = t * d_ + s;
            to_tensor_[static_cast<std::size_t>(i)] = t;
        }
    }
}

std::vector<int> Layout::sites_of_axis(int axis) const {
    std::vector<int> sites;
    for (int j = 0; j < n(); ++j)
        if (ordering_[j].axis == axis) sites.push_back(j);
    std::sort(sites.begin(), sites.end(), [&](int a, int b) {
        return ordering_[a].significance > ordering_[b].significance;
    });
    return sites;
}

Index Layout::tensor_index(Index flat) const {
    if (identity_) {
        if (flat < 0 || flat >= grid_size_) throw RangeError("Layout: flat index out of range");
        return flat;
    }
    if (!to_tensor_.empty()) {
        if (flat < 0 || flat >= grid_size_) throw RangeError("Layout: flat index out of range");
        return to_tensor_[static_cast<std::size_t>(flat)];
    }
    const auto digits = index_to_digits(flat, *this);
    Index t = 0;
    for (int s : digits) t = t * d_ + s;
    return t;
}

Index Layout::flat_index(Index tensor_index) const {
    if (tensor_index < 0 || tensor_index >= grid_size_)
        throw RangeError("Layout: tensor index out of range");
    std::vector<int> digits(static_cast<std::size_t>(n()));
    for (int j = n() - 1; j >= 0; --j) {
        digits[j] = static_cast<int>(tensor_index % d_);
        tensor_index /= d_;
    }
    return digits_to_index(digits, *this);
}

// ------------------------------------------------------- digit conversion

namespace {

std::vector<int> coords_to_digits(std::span<const Index> coords, const Layout& layout) {
    std::vector<int> digits(static_cast<std::size_t>(layout.n()));
    for (int j = 0; j < layout.n(); ++j) {
        const SiteLabel& s = layout.ordering()[j];
        const Index c = coords[s.axis];
        digits[j] = static_cast<int>((c / ipow(layout.d(), s.significance)) % layout.d());
    }
    return digits;
}

} // namespace

std::vector<int> index_to_digits(Index i, const Layout& layout) {
    if (i < 0 || i >= layout.grid_size())
        throw RangeError("index_to_digits: index " + std::to_string(i) + " out of range");
    std::vector<Index> coords(static_cast<std::size_t>(layout.spatial_dim()));
    for (int a = layout.spatial_dim() - 1; a >= 0; --a) {
        const Index extent = ipow(layout.d(), layout.axis_digits(a));
        coords[a] = i % extent;
        i /= extent;
    }
    return coords_to_digits(coords, layout);
}

std::vector<int> index_to_digits(std::array<Index, 2> row_col, const Layout& layout) {
    if (layout.spatial_dim() != 2) throw ShapeError("index_to_digits: layout is not 2D");
    for (int a = 0; a < 2; ++a)
        if (row_col[a] < 0 || row_col[a] >= ipow(layout.d(), layout.axis_digits(a)))
            throw RangeError("index_to_digits: grid coordinate out of range");
    return coords_to_digits(row_col, layout);
}

Index digits_to_index(std::span<const int> digits, const Layout& layout) {
    if (static_cast<int>(digits.size()) != layout.n())
        throw ShapeError("digits_to_index: digit count does not match layout");
    std::vector<Index> coords(static_cast<std::size_t>(layout.spatial_dim()), 0);
    for (int j = 0; j < layout.n(); ++j) {
        if (digits[j] < 0 || digits[j] >= layout.d())
            throw RangeError("digits_to_index: digit out of range");
        const SiteLabel& s = layout.ordering()[j];
        coords[s.axis] += digits[j] * ipow(layout.d(), s.significance);
    }
    Index flat = 0;
    for (int a = 0; a < layout.spatial_dim(); ++a)
        flat = flat * ipow(layout.d(), layout.axis_digits(a)) + coords[a];
    return flat;
}

} // namespace qtn
