#include "tfmfg/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tfmfg/error.hpp"
#include "tfmfg/kernels.hpp"

namespace tfmfg {

CouplingCost::CouplingCost(TorusGrid grid, TimeAxis axis, double lambda, Potential potential)
    : grid_(grid), axis_(axis), lambda_(lambda), potential_(std::move(potential)) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("CouplingCost: lambda must be >= 0");
    if (!potential_) throw InvalidArgument("CouplingCost: empty potential");
}

CouplingCost CouplingCost::moving_target(const TorusGrid& grid, const TimeAxis& axis, double lambda) {
    return CouplingCost(grid, axis, lambda, [](std::span<const double> x, double t) {
        const double target = 0.5 * (1.0 - std::sin(2.0 * std::numbers::pi * t));
        const double d = x[0] - target;
        return 5.0 * d * d;
    });
}

CouplingCost CouplingCost::density_only(const TorusGrid& grid, const TimeAxis& axis, double lambda) {
    return CouplingCost(grid, axis, lambda, [](std::span<const double>, double) { return 0.0; });
}

GridFunction CouplingCost::potential_at(int time_index) const {
    if (time_index < 0 || time_index > axis_.steps()) throw InvalidArgument("CouplingCost: time index out of range");
    const double t = axis_.time(time_index);
    return GridFunction::sample(grid_, [&](std::span<const double> x) { return potential_(x, t); });
}

GridFunction CouplingCost::eval(const GridFunction& m, int time_index) const {
    if (!(m.grid() == grid_)) throw InvalidArgument("CouplingCost: density on a different grid");
    GridFunction out = potential_at(time_index);
    if (lambda_ != 0.0) kernels::axpby(lambda_, m.values(), 1.0, out.values());
    return out;
}

GridFunction eval_coupling(const CouplingCost& c, const DiscreteMeasure& m, int time_index) {
    return c.eval(m.density(), time_index);
}

double monotonicity_gap(const CouplingCost& c, const GridFunction& m, const GridFunction& m_bar, int time_index) {
    require_same_grid(m, m_bar);
    return inner_product(c.eval(m, time_index) - c.eval(m_bar, time_index), m - m_bar);
}

double spatial_lipschitz_constant(const CouplingCost& c, const GridFunction& m, int time_index) {
    const GridFunction f = c.eval(m, time_index);
    const TorusGrid& g = f.grid();
    double worst = 0.0;
    for (std::size_t a = 0; a < g.size(); ++a) {
        const auto xa = g.coordinates(a);
        for (std::size_t b = a + 1; b < g.size(); ++b) {
            const auto xb = g.coordinates(b);
            const double dist = std::hypot(xa[0] - xb[0], xa[1] - xb[1]);
            worst = std::max(worst, std::fabs(f[a] - f[b]) / dist);
        }
    }
    return worst;
}

}  // namespace tfmfg
