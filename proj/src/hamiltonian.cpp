#include "tfmfg/hamiltonian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "tfmfg/error.hpp"

namespace tfmfg {

NumericalHamiltonian::NumericalHamiltonian(double beta, double scale, GridFunction potential)
    : beta_(beta), scale_(scale), potential_(std::move(potential)) {
    if (!(beta >= 2.0) || !std::isfinite(beta)) throw InvalidArgument("NumericalHamiltonian: beta must be >= 2");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("NumericalHamiltonian: scale must be > 0");
}

NumericalHamiltonian NumericalHamiltonian::quadratic(const TorusGrid& grid) {
    return NumericalHamiltonian(2.0, 0.5, GridFunction(grid, 0.0));
}

double NumericalHamiltonian::power_sum(std::span<const double> q) const noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        const double part = (k % 2 == 0) ? std::min(q[k], 0.0) : std::max(q[k], 0.0);
        s += part * part;
    }
    return s;
}

double NumericalHamiltonian::eval_g(std::size_t cell, std::span<const double> q) const noexcept {
    const double s = power_sum(q);
    const double p = beta_ == 2.0 ? s : std::pow(s, 0.5 * beta_);
    return scale_ * p + potential_[cell];
}

void NumericalHamiltonian::grad_g(std::size_t, std::span<const double> q, std::span<double> out) const noexcept {
    const double s = power_sum(q);
    const double factor = scale_ * beta_ * (beta_ == 2.0 ? 1.0 : std::pow(s, 0.5 * beta_ - 1.0));
    for (std::size_t k = 0; k < q.size(); ++k) {
        const double part = (k % 2 == 0) ? std::min(q[k], 0.0) : std::max(q[k], 0.0);
        out[k] = factor * part;
    }
}

double NumericalHamiltonian::eval_H(std::size_t cell, std::span<const double> p) const noexcept {
    double s = 0.0;
    for (double v : p) s += v * v;
    const double pw = beta_ == 2.0 ? s : std::pow(s, 0.5 * beta_);
    return scale_ * pw + potential_[cell];
}

double HamiltonianReport::worst() const noexcept {
    return std::max({monotonicity, consistency, convexity});
}

HamiltonianReport verify_assumptions(const NumericalHamiltonian& h, std::size_t sample_count, std::uint64_t seed) {
    return verify_assumptions(
        h.grid(), [&h](std::size_t c, std::span<const double> q) { return h.eval_g(c, q); },
        [&h](std::size_t c, std::span<const double> q, std::span<double> out) { h.grad_g(c, q, out); },
        [&h](std::size_t c, std::span<const double> p) { return h.eval_H(c, p); }, sample_count, seed);
}

HamiltonianReport verify_assumptions(const TorusGrid& grid, const HamiltonianFn& g, const HamiltonianGradFn& grad,
                                     const ContinuousHamiltonianFn& H, std::size_t sample_count,
                                     std::uint64_t seed) {
    if (sample_count < 1) throw InvalidArgument("verify_assumptions: need at least one sample");
    const std::size_t m = 2 * static_cast<std::size_t>(grid.dim());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    std::uniform_real_distribution<double> step(1e-3, 1.0);
    std::uniform_int_distribution<std::size_t> cell_dist(0, grid.size() - 1);

    HamiltonianReport r;
    r.samples = sample_count;
    std::array<double, 4> q{}, q2{}, mid{}, gq{}, p{};
    constexpr double fd_step = 1e-6;

    for (std::size_t s = 0; s < sample_count; ++s) {
        const std::size_t cell = cell_dist(rng);
        for (std::size_t k = 0; k < m; ++k) q[k] = coord(rng);
        const std::span<const double> qs(q.data(), m);
        const double g0 = g(cell, qs);

        // monotonicity
        for (std::size_t k = 0; k < m; ++k) {
            q2 = q;
            q2[k] += step(rng);
            const double g1 = g(cell, std::span<const double>(q2.data(), m));
            const double v = (k % 2 == 0) ? g1 - g0 : g0 - g1;
            r.monotonicity = std::max(r.monotonicity, v);
        }

        // consistency
        for (int a = 0; a < grid.dim(); ++a) {
            p[a] = coord(rng);
            q2[2 * a] = p[a];
            q2[2 * a + 1] = p[a];
        }
        const double gc = g(cell, std::span<const double>(q2.data(), m));
        const double hc = H(cell, std::span<const double>(p.data(), static_cast<std::size_t>(grid.dim())));
        r.consistency = std::max(r.consistency, std::fabs(gc - hc));

        // differentiability: central differences against the analytic gradient.
        grad(cell, qs, std::span<double>(gq.data(), m));
        for (std::size_t k = 0; k < m; ++k) {
            q2 = q;
            q2[k] = q[k] + fd_step;
            const double up = g(cell, std::span<const double>(q2.data(), m));
            q2[k] = q[k] - fd_step;
            const double dn = g(cell, std::span<const double>(q2.data(), m));
            const double fd = (up - dn) / (2.0 * fd_step);
            r.gradient = std::max(r.gradient, std::fabs(fd - gq[k]) / std::max(1.0, std::fabs(gq[k])));
        }

        // convexity
        for (std::size_t k = 0; k < m; ++k) {
            q2[k] = coord(rng);
            mid[k] = 0.5 * (q[k] + q2[k]);
        }
        const double gb = g(cell, std::span<const double>(q2.data(), m));
        const double gm = g(cell, std::span<const double>(mid.data(), m));
        r.convexity = std::max(r.convexity, gm - 0.5 * (g0 + gb));
    }
    return r;
}

}  // namespace tfmfg
