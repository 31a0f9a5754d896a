#pragma once

#include <functional>
#include <span>

#include "tfmfg/caputo.hpp"
#include "tfmfg/grid.hpp"

namespace tfmfg {

/// Local affine coupling f_h[M]_i = F₀(x_i, t_n) + λ M_i.
class CouplingCost {
public:
    using Potential = std::function<double(std::span<const double> x, double t)>;

    CouplingCost(TorusGrid grid, TimeAxis axis, double lambda, Potential potential);

    /// F₀(x, t) = 5 (x₁ - (1 - sin 2πt)/2)², the running cost of the 1D experiments.
    static CouplingCost moving_target(const TorusGrid& grid, const TimeAxis& axis, double lambda);
    /// F₀ ≡ 0.
    static CouplingCost density_only(const TorusGrid& grid, const TimeAxis& axis, double lambda);

    double lambda() const noexcept { return lambda_; }
    /// True when f_h does not depend on M (λ = 0).
    bool decoupled() const noexcept { return lambda_ == 0.0; }
    const TorusGrid& grid() const noexcept { return grid_; }
    const TimeAxis& axis() const noexcept { return axis_; }

    /// F₀ at every grid point for time index n.
    GridFunction potential_at(int time_index) const;

    GridFunction eval(const GridFunction& m, int time_index) const;

private:
    TorusGrid grid_;
    TimeAxis axis_;
    double lambda_;
    Potential potential_;
};

GridFunction eval_coupling(const CouplingCost& c, const DiscreteMeasure& m, int time_index);

/// (f_h[M] - f_h[M̄], M - M̄)_2, equal to λ ‖M - M̄‖² for the affine family.
double monotonicity_gap(const CouplingCost& c, const GridFunction& m, const GridFunction& m_bar, int time_index);

/// max |f_i - f_j| / |x_i - x_j| over all point pairs (Euclidean distance in
/// the unit cube, not the torus distance; F₀ is not periodic in x).
double spatial_lipschitz_constant(const CouplingCost& c, const GridFunction& m, int time_index);

}  // namespace tfmfg
