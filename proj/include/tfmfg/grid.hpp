#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace tfmfg {

/// Uniform periodic grid on the unit torus in one or two dimensions.
///
/// Point x_i = i h (1D) or x_{i,j} = (i h, j h) (2D) with h = 1 / n. Index
/// arithmetic wraps modulo n on every axis. Values are stored row-major: in 2D
/// axis 0 (index i) has stride n and axis 1 (index j) has stride 1.
class TorusGrid {
public:
    TorusGrid(int dim, int cells_per_axis);

    int dim() const noexcept { return dim_; }
    int cells_per_axis() const noexcept { return n_; }
    double h() const noexcept { return 1.0 / n_; }
    /// h^dim, the weight of one point in the discrete inner product.
    double cell_volume() const noexcept;
    std::size_t size() const noexcept { return size_; }

    /// Flat index of the point translated by `offset` cells along `axis`.
    std::size_t shift(std::size_t flat, int axis, long offset) const noexcept;
    std::array<int, 2> multi_index(std::size_t flat) const noexcept;
    std::size_t flat_index(long i, long j = 0) const noexcept;
    /// Physical coordinates; only the first dim() entries are meaningful.
    std::array<double, 2> coordinates(std::size_t flat) const noexcept;

    bool operator==(const TorusGrid&) const = default;

private:
    int dim_;
    int n_;
    std::size_t size_;
};

/// Real-valued field on a TorusGrid.
class GridFunction {
public:
    explicit GridFunction(const TorusGrid& grid, double fill = 0.0);
    /// Throws InvalidArgument on a size mismatch or a non-finite value.
    GridFunction(const TorusGrid& grid, std::vector<double> values);

    using Sampler = std::function<double(std::span<const double> x)>;
    /// Point evaluation of `f` at every grid node.
    static GridFunction sample(const TorusGrid& grid, const Sampler& f);

    const TorusGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    const double* data() const noexcept { return values_.data(); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    double& operator[](std::size_t i) noexcept { return values_[i]; }

    bool all_finite() const noexcept;
    double min() const noexcept;
    double max() const noexcept;

    GridFunction& operator+=(const GridFunction& other);
    GridFunction& operator-=(const GridFunction& other);
    GridFunction& operator*=(double s) noexcept;
    GridFunction& operator+=(double c) noexcept;

private:
    TorusGrid grid_;
    std::vector<double> values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(double s, GridFunction a);

/// Throws InvalidArgument unless both functions live on the same grid.
void require_same_grid(const GridFunction& a, const GridFunction& b);

/// Element of K_h: nonnegative grid function with unit discrete mass.
class DiscreteMeasure {
public:
    static constexpr double kMassTolerance = 1e-12;

    /// Throws InvalidArgument if a value is negative or |h^d Σ m - 1| > kMassTolerance.
    explicit DiscreteMeasure(GridFunction density);

    const GridFunction& density() const noexcept { return density_; }
    operator const GridFunction&() const noexcept { return density_; }  // NOLINT
    const TorusGrid& grid() const noexcept { return density_.grid(); }
    double mass() const noexcept;

private:
    GridFunction density_;
};

/// [D_h U] at every point: (D⁺U)_i, (D⁺U)_{i-1} per axis, so 2 entries in 1D
/// and 4 in 2D, ordered (q1, q2, q3, q4).
class DiscreteGradient {
public:
    DiscreteGradient(const TorusGrid& grid, std::vector<double> entries);

    const TorusGrid& grid() const noexcept { return grid_; }
    std::size_t components() const noexcept { return 2 * static_cast<std::size_t>(grid_.dim()); }
    std::span<const double> at(std::size_t point) const noexcept {
        return {entries_.data() + point * components(), components()};
    }
    std::span<const double> entries() const noexcept { return entries_; }

private:
    TorusGrid grid_;
    std::vector<double> entries_;
};

/// (u, v)_2 = h^d Σ u_i v_i
double inner_product(const GridFunction& u, const GridFunction& v);
double norm_l2(const GridFunction& u);
double norm_inf(const GridFunction& u);
/// Discrete mass (u, 1)_2.
double mass(const GridFunction& u);

/// (D⁺u)_i = (u_{i+e} - u_i) / h along `axis`, periodic.
GridFunction forward_diff(const GridFunction& u, int axis);
DiscreteGradient discrete_gradient(const GridFunction& u);
/// Writes [D_h u] at a single point into `out` (size 2·dim).
void discrete_gradient_at(const GridFunction& u, std::size_t point, std::span<double> out) noexcept;
/// Five-point (2D) or three-point (1D) periodic Laplacian.
GridFunction discrete_laplacian(const GridFunction& u);

/// Cell averages of a density: 5-point Gauss–Legendre per axis on each cell
/// [x_i - h/2, x_i + h/2]^d, renormalized to unit discrete mass.
DiscreteMeasure cell_average_density(const TorusGrid& grid, const GridFunction::Sampler& m0);

}  // namespace tfmfg
