#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace smoothlab {

using cplx = std::complex<double>;

/// Small fixed-capacity vectors/matrices: dimensions never exceed 3.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

inline constexpr int kMaxDimension = 3;
inline constexpr std::size_t kPointBudget = std::size_t{1} << 24;

/// Periodic sampling of R^n on the torus prod_j [-L_j/2, L_j/2).
///
/// Point j on axis a sits at x = -L_a/2 + j h_a. The frequency of FFT index i is
/// xi = 2 pi k / L_a with k the signed index in [-N_a/2, N_a/2); the Nyquist index
/// i = N_a/2 maps to k = -N_a/2.
class GridSpec {
public:
    GridSpec() = default;

    /// Validates: 1 <= n <= 3, N_j even and >= 8, L_j > 0, prod N_j <= 2^24.
    GridSpec(int dimension, std::span<const double> extents, std::span<const int> points);

    static GridSpec cube(int dimension, double extent, int points);

    int dimension() const { return dim_; }
    double extent(int axis) const { return extent_[axis]; }
    int points(int axis) const { return points_[axis]; }
    double spacing(int axis) const { return extent_[axis] / points_[axis]; }
    double cell_volume() const;
    std::size_t size() const { return size_; }

    int signed_index(int axis, int index) const {
        const int n = points_[axis];
        return index < n / 2 ? index : index - n;
    }
    double frequency(int axis, int index) const;
    double coordinate(int axis, int index) const;
    /// Largest representable |xi_j| on each axis (pi / h_j), the smallest over axes.
    double nyquist() const;

    /// Row-major multi-index of a flat offset (last axis fastest).
    std::array<int, 3> unravel(std::size_t flat) const;
    std::size_t ravel(const std::array<int, 3>& index) const;

    Vec frequency_at(std::size_t flat) const;
    Vec position_at(std::size_t flat) const;

    bool operator==(const GridSpec& other) const;

private:
    int dim_ = 0;
    std::array<double, 3> extent_{};
    std::array<int, 3> points_{1, 1, 1};
    std::size_t size_ = 0;
};

/// All lattice frequencies, FFT-ordered, flat row-major.
std::vector<Vec> frequency_lattice(const GridSpec& grid);

enum class Space { physical, frequency };

/// Complex samples on a grid. Physical fields hold point values; frequency fields
/// hold the unitary (centred) DFT coefficients. Both carry the same L^2 norm:
/// sqrt(cell_volume * sum |v|^2).
class ComplexField {
public:
    ComplexField() = default;
    ComplexField(GridSpec grid, Space space);
    ComplexField(GridSpec grid, std::vector<cplx> values, Space space);

    const GridSpec& grid() const { return grid_; }
    Space space() const { return space_; }
    std::span<cplx> values() { return values_; }
    std::span<const cplx> values() const { return values_; }
    std::vector<cplx>& data() { return values_; }
    const std::vector<cplx>& data() const { return values_; }
    cplx& operator[](std::size_t i) { return values_[i]; }
    const cplx& operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

    double l2_norm() const;
    double squared_norm() const;
    bool all_finite() const;

    ComplexField& operator+=(const ComplexField& other);
    ComplexField& operator-=(const ComplexField& other);
    ComplexField& operator*=(cplx scale);

private:
    GridSpec grid_;
    std::vector<cplx> values_;
    Space space_ = Space::physical;
};

ComplexField operator+(ComplexField a, const ComplexField& b);
ComplexField operator-(ComplexField a, const ComplexField& b);
ComplexField operator*(cplx scale, ComplexField a);

/// Relative L^2 distance ||a - b|| / max(||b||, tiny).
double relative_distance(const ComplexField& a, const ComplexField& b);

}  // namespace smoothlab
