#include "tfmfg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "tfmfg/error.hpp"
#include "tfmfg/kernels.hpp"

namespace tfmfg {

TorusGrid::TorusGrid(int dim, int cells_per_axis) : dim_(dim), n_(cells_per_axis), size_(0) {
    if (dim != 1 && dim != 2) throw InvalidArgument("TorusGrid: dim must be 1 or 2");
    if (cells_per_axis < 2) throw InvalidArgument("TorusGrid: need at least 2 cells per axis");
    size_ = dim == 1 ? static_cast<std::size_t>(n_)
                     : static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
}

double TorusGrid::cell_volume() const noexcept {
    const double h = 1.0 / n_;
    return dim_ == 1 ? h : h * h;
}

std::size_t TorusGrid::shift(std::size_t flat, int axis, long offset) const noexcept {
    const long n = n_;
    auto wrap = [n](long i) { return ((i % n) + n) % n; };
    if (dim_ == 1) return static_cast<std::size_t>(wrap(static_cast<long>(flat) + offset));
    const long i = static_cast<long>(flat) / n;
    const long j = static_cast<long>(flat) % n;
    if (axis == 0) return static_cast<std::size_t>(wrap(i + offset) * n + j);
    return static_cast<std::size_t>(i * n + wrap(j + offset));
}

std::array<int, 2> TorusGrid::multi_index(std::size_t flat) const noexcept {
    if (dim_ == 1) return {static_cast<int>(flat), 0};
    return {static_cast<int>(flat / n_), static_cast<int>(flat % n_)};
}

std::size_t TorusGrid::flat_index(long i, long j) const noexcept {
    const long n = n_;
    auto wrap = [n](long k) { return ((k % n) + n) % n; };
    if (dim_ == 1) return static_cast<std::size_t>(wrap(i));
    return static_cast<std::size_t>(wrap(i) * n + wrap(j));
}

std::array<double, 2> TorusGrid::coordinates(std::size_t flat) const noexcept {
    const auto ij = multi_index(flat);
    return {ij[0] * h(), dim_ == 2 ? ij[1] * h() : 0.0};
}

GridFunction::GridFunction(const TorusGrid& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

GridFunction::GridFunction(const TorusGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw InvalidArgument("GridFunction: expected " + std::to_string(grid_.size()) + " values, got " +
                              std::to_string(values_.size()));
    if (!all_finite()) throw InvalidArgument("GridFunction: non-finite value");
}

GridFunction GridFunction::sample(const TorusGrid& grid, const Sampler& f) {
    std::vector<double> v(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const auto x = grid.coordinates(p);
        v[p] = f(std::span<const double>(x.data(), static_cast<std::size_t>(grid.dim())));
    }
    return GridFunction(grid, std::move(v));
}

bool GridFunction::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

double GridFunction::min() const noexcept { return *std::min_element(values_.begin(), values_.end()); }
double GridFunction::max() const noexcept { return *std::max_element(values_.begin(), values_.end()); }

GridFunction& GridFunction::operator+=(const GridFunction& other) {
    require_same_grid(*this, other);
    kernels::axpby(1.0, other.values(), 1.0, values());
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
    require_same_grid(*this, other);
    kernels::axpby(-1.0, other.values(), 1.0, values());
    return *this;
}

GridFunction& GridFunction::operator*=(double s) noexcept {
    for (double& v : values_) v *= s;
    return *this;
}

GridFunction& GridFunction::operator+=(double c) noexcept {
    for (double& v : values_) v += c;
    return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(double s, GridFunction a) { return a *= s; }

void require_same_grid(const GridFunction& a, const GridFunction& b) {
    if (!(a.grid() == b.grid())) throw InvalidArgument("grid functions live on different grids");
}

DiscreteMeasure::DiscreteMeasure(GridFunction density) : density_(std::move(density)) {
    if (density_.min() < 0.0) throw InvalidArgument("DiscreteMeasure: negative value");
    if (std::fabs(mass() - 1.0) > kMassTolerance)
        throw InvalidArgument("DiscreteMeasure: discrete mass differs from 1");
}

double DiscreteMeasure::mass() const noexcept { return tfmfg::mass(density_); }

DiscreteGradient::DiscreteGradient(const TorusGrid& grid, std::vector<double> entries)
    : grid_(grid), entries_(std::move(entries)) {
    if (entries_.size() != grid_.size() * components())
        throw InvalidArgument("DiscreteGradient: wrong number of entries");
}

double inner_product(const GridFunction& u, const GridFunction& v) {
    require_same_grid(u, v);
    return u.grid().cell_volume() * kernels::dot(u.values(), v.values());
}

double norm_l2(const GridFunction& u) { return std::sqrt(inner_product(u, u)); }

double norm_inf(const GridFunction& u) { return kernels::max_abs(u.values()); }

double mass(const GridFunction& u) { return u.grid().cell_volume() * kernels::sum(u.values()); }

GridFunction forward_diff(const GridFunction& u, int axis) {
    const TorusGrid& g = u.grid();
    if (axis < 0 || axis >= g.dim()) throw InvalidArgument("forward_diff: invalid axis");
    const double inv_h = g.cells_per_axis();
    GridFunction out(g);
    for (std::size_t p = 0; p < g.size(); ++p) out[p] = (u[g.shift(p, axis, 1)] - u[p]) * inv_h;
    return out;
}

void discrete_gradient_at(const GridFunction& u, std::size_t point, std::span<double> out) noexcept {
    const TorusGrid& g = u.grid();
    const double inv_h = g.cells_per_axis();
    for (int axis = 0; axis < g.dim(); ++axis) {
        const double here = u[point];
        out[2 * axis] = (u[g.shift(point, axis, 1)] - here) * inv_h;
        out[2 * axis + 1] = (here - u[g.shift(point, axis, -1)]) * inv_h;
    }
}

DiscreteGradient discrete_gradient(const GridFunction& u) {
    const TorusGrid& g = u.grid();
    const std::size_t c = 2 * static_cast<std::size_t>(g.dim());
    std::vector<double> entries(g.size() * c);
    for (std::size_t p = 0; p < g.size(); ++p)
        discrete_gradient_at(u, p, std::span<double>(entries.data() + p * c, c));
    return DiscreteGradient(g, std::move(entries));
}

GridFunction discrete_laplacian(const GridFunction& u) {
    const TorusGrid& g = u.grid();
    const double inv_h2 = static_cast<double>(g.cells_per_axis()) * g.cells_per_axis();
    GridFunction out(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
        double acc = -2.0 * g.dim() * u[p];
        for (int axis = 0; axis < g.dim(); ++axis) acc += u[g.shift(p, axis, 1)] + u[g.shift(p, axis, -1)];
        out[p] = acc * inv_h2;
    }
    return out;
}

namespace {

struct QuadratureRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;  // sum to 2
};

QuadratureRule gauss_legendre_5() {
    using Rule = boost::math::quadrature::gauss<double, 5>;
    const auto& x = Rule::abscissa();
    const auto& w = Rule::weights();
    QuadratureRule r;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k] == 0.0) {
            r.nodes.push_back(0.0);
            r.weights.push_back(w[k]);
        } else {
            r.nodes.push_back(-x[k]);
            r.weights.push_back(w[k]);
            r.nodes.push_back(x[k]);
            r.weights.push_back(w[k]);
        }
    }
    return r;
}

}  // namespace

DiscreteMeasure cell_average_density(const TorusGrid& grid, const GridFunction::Sampler& m0) {
    static const QuadratureRule rule = gauss_legendre_5();
    const double h = grid.h();
    const std::size_t q = rule.nodes.size();
    std::vector<double> values(grid.size(), 0.0);

    for (std::size_t p = 0; p < grid.size(); ++p) {
        const auto centre = grid.coordinates(p);
        double acc = 0.0;
        std::array<double, 2> x{};
        if (grid.dim() == 1) {
            for (std::size_t a = 0; a < q; ++a) {
                x[0] = centre[0] + 0.5 * h * rule.nodes[a];
                const double s = m0(std::span<const double>(x.data(), 1));
                if (!(s >= 0.0) || !std::isfinite(s))
                    throw InvalidArgument("cell_average_density: sampler returned a negative or non-finite value");
                acc += 0.5 * rule.weights[a] * s;
            }
        } else {
            for (std::size_t a = 0; a < q; ++a) {
                for (std::size_t b = 0; b < q; ++b) {
                    x[0] = centre[0] + 0.5 * h * rule.nodes[a];
                    x[1] = centre[1] + 0.5 * h * rule.nodes[b];
                    const double s = m0(std::span<const double>(x.data(), 2));
                    if (!(s >= 0.0) || !std::isfinite(s))
                        throw InvalidArgument("cell_average_density: sampler returned a negative or non-finite value");
                    acc += 0.25 * rule.weights[a] * rule.weights[b] * s;
                }
            }
        }
        values[p] = acc;
    }

    GridFunction density(grid, std::move(values));
    const double total = mass(density);
    if (!(total > 0.0)) throw InvalidArgument("cell_average_density: degenerate (zero) density");
    density *= 1.0 / total;
    return DiscreteMeasure(std::move(density));
}

}  // namespace tfmfg
