#include "smoothlab/grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "smoothlab/error.hpp"

namespace smoothlab {

GridSpec::GridSpec(int dimension, std::span<const double> extents, std::span<const int> points) {
    if (dimension < 1 || dimension > kMaxDimension)
        throw Error(ErrorKind::invalid_argument, "grid dimension must be 1, 2 or 3");
    if (extents.size() != static_cast<std::size_t>(dimension) ||
        points.size() != static_cast<std::size_t>(dimension))
        throw Error(ErrorKind::invalid_argument, "grid extents/points must have one entry per axis");
    dim_ = dimension;
    size_ = 1;
    for (int a = 0; a < dimension; ++a) {
        if (!(extents[a] > 0.0) || !std::isfinite(extents[a]))
            throw Error(ErrorKind::invalid_argument, "grid extent must be positive and finite");
        if (points[a] < 8 || points[a] % 2 != 0)
            throw Error(ErrorKind::invalid_argument, "grid point count must be even and >= 8");
        extent_[a] = extents[a];
        points_[a] = points[a];
        size_ *= static_cast<std::size_t>(points[a]);
        if (size_ > kPointBudget)
            throw Error(ErrorKind::budget, "grid exceeds the 2^24 point budget");
    }
}

GridSpec GridSpec::cube(int dimension, double extent, int points) {
    std::array<double, 3> l{extent, extent, extent};
    std::array<int, 3> n{points, points, points};
    return GridSpec(dimension, std::span<const double>(l.data(), dimension),
                    std::span<const int>(n.data(), dimension));
}

double GridSpec::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= spacing(a);
    return v;
}

double GridSpec::frequency(int axis, int index) const {
    return 2.0 * std::numbers::pi * signed_index(axis, index) / extent_[axis];
}

double GridSpec::coordinate(int axis, int index) const {
    return -0.5 * extent_[axis] + index * spacing(axis);
}

double GridSpec::nyquist() const {
    double k = INFINITY;
    for (int a = 0; a < dim_; ++a) k = std::min(k, std::numbers::pi / spacing(a));
    return k;
}

std::array<int, 3> GridSpec::unravel(std::size_t flat) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int a = dim_ - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(flat % points_[a]);
        flat /= points_[a];
    }
    return idx;
}

std::size_t GridSpec::ravel(const std::array<int, 3>& index) const {
    std::size_t flat = 0;
    for (int a = 0; a < dim_; ++a) flat = flat * points_[a] + static_cast<std::size_t>(index[a]);
    return flat;
}

Vec GridSpec::frequency_at(std::size_t flat) const {
    const auto idx = unravel(flat);
    Vec xi(dim_);
    for (int a = 0; a < dim_; ++a) xi[a] = frequency(a, idx[a]);
    return xi;
}

Vec GridSpec::position_at(std::size_t flat) const {
    const auto idx = unravel(flat);
    Vec x(dim_);
    for (int a = 0; a < dim_; ++a) x[a] = coordinate(a, idx[a]);
    return x;
}

bool GridSpec::operator==(const GridSpec& other) const {
    if (dim_ != other.dim_) return false;
    for (int a = 0; a < dim_; ++a)
        if (extent_[a] != other.extent_[a] || points_[a] != other.points_[a]) return false;
    return true;
}

std::vector<Vec> frequency_lattice(const GridSpec& grid) {
    std::vector<Vec> out;
    out.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out.push_back(grid.frequency_at(i));
    return out;
}

ComplexField::ComplexField(GridSpec grid, Space space)
    : grid_(std::move(grid)), values_(grid_.size()), space_(space) {}

ComplexField::ComplexField(GridSpec grid, std::vector<cplx> values, Space space)
    : grid_(std::move(grid)), values_(std::move(values)), space_(space) {
    if (values_.size() != grid_.size())
        throw Error(ErrorKind::shape_mismatch, "field length does not match grid size");
    if (!all_finite()) throw Error(ErrorKind::non_finite, "field contains non-finite entries");
}

double ComplexField::squared_norm() const {
    double s = 0.0;
    for (const auto& v : values_) s += std::norm(v);
    return s * grid_.cell_volume();
}

double ComplexField::l2_norm() const { return std::sqrt(squared_norm()); }

bool ComplexField::all_finite() const {
    for (const auto& v : values_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

namespace {
void require_compatible(const ComplexField& a, const ComplexField& b) {
    if (!(a.grid() == b.grid()) || a.space() != b.space())
        throw Error(ErrorKind::shape_mismatch, "fields live on different grids or spaces");
}
}  // namespace

ComplexField& ComplexField::operator+=(const ComplexField& other) {
    require_compatible(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

ComplexField& ComplexField::operator-=(const ComplexField& other) {
    require_compatible(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

ComplexField& ComplexField::operator*=(cplx scale) {
    for (auto& v : values_) v *= scale;
    return *this;
}

ComplexField operator+(ComplexField a, const ComplexField& b) { return a += b; }
ComplexField operator-(ComplexField a, const ComplexField& b) { return a -= b; }
ComplexField operator*(cplx scale, ComplexField a) { return a *= scale; }

double relative_distance(const ComplexField& a, const ComplexField& b) {
    const double denom = std::max(b.l2_norm(), 1e-300);
    return (a - b).l2_norm() / denom;
}

}  // namespace smoothlab
