#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "tfmfg/grid.hpp"

namespace tfmfg {

/// Godunov-type numerical Hamiltonian
///     g(x, q) = s · ((q₁⁻)² + (q₂⁺)² + (q₃⁻)² + (q₄⁺)²)^{β/2} + c(x)
/// consistent with H(x, p) = s |p|^β + c(x). In 1D only (q₁, q₂) enter.
/// Odd entries (q₁, q₃) are forward differences and enter through their
/// negative part, even entries (q₂, q₄) are backward differences and enter
/// through their positive part.
///
/// s = 1 gives |p|^β + c; s = 1/2, β = 2 gives the quadratic p²/2 + c.
class NumericalHamiltonian {
public:
    NumericalHamiltonian(double beta, double scale, GridFunction potential);

    /// β = 2, s = 1/2, c ≡ 0 on `grid`.
    static NumericalHamiltonian quadratic(const TorusGrid& grid);

    double beta() const noexcept { return beta_; }
    double scale() const noexcept { return scale_; }
    int dim() const noexcept { return potential_.grid().dim(); }
    const TorusGrid& grid() const noexcept { return potential_.grid(); }
    const GridFunction& potential() const noexcept { return potential_; }

    double eval_g(std::size_t cell, std::span<const double> q) const noexcept;
    /// Exact partial derivatives of eval_g; the (·)± kink at q_k = 0 uses slope 0.
    void grad_g(std::size_t cell, std::span<const double> q, std::span<double> out) const noexcept;
    double eval_H(std::size_t cell, std::span<const double> p) const noexcept;

private:
    double power_sum(std::span<const double> q) const noexcept;

    double beta_;
    double scale_;
    GridFunction potential_;
};

/// Worst observed violations of the structural assumptions on g. Every field
/// is a nonnegative magnitude; zero means no violation was found.
struct HamiltonianReport {
    std::size_t samples = 0;
    double monotonicity = 0.0;  // g nonincreasing in q₁, q₃ and nondecreasing in q₂, q₄
    double consistency = 0.0;   // |g(x, p₁, p₁, p₂, p₂) - H(x, p)|
    double convexity = 0.0;     // g(midpoint) - mean of endpoint values, positive part
    /// Relative mismatch of grad_g against central differences (step 1e-6).
    /// Limited by finite-difference round-off, so it is not part of worst().
    double gradient = 0.0;

    /// Largest of the monotonicity, consistency and convexity violations.
    double worst() const noexcept;
};

using HamiltonianFn = std::function<double(std::size_t cell, std::span<const double> q)>;
using HamiltonianGradFn = std::function<void(std::size_t cell, std::span<const double> q, std::span<double> out)>;
using ContinuousHamiltonianFn = std::function<double(std::size_t cell, std::span<const double> p)>;

/// Samples random q tuples, perturbations and pairs with a fixed seed and
/// reports the worst violation of each assumption.
HamiltonianReport verify_assumptions(const NumericalHamiltonian& h, std::size_t sample_count,
                                     std::uint64_t seed = 20240607);

/// Same checks for an arbitrary g given as callables on `grid`.
HamiltonianReport verify_assumptions(const TorusGrid& grid, const HamiltonianFn& g, const HamiltonianGradFn& grad,
                                     const ContinuousHamiltonianFn& H, std::size_t sample_count,
                                     std::uint64_t seed = 20240607);

}  // namespace tfmfg
