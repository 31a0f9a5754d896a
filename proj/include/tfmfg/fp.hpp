#pragma once

#include <span>
#include <vector>

#include "tfmfg/caputo.hpp"
#include "tfmfg/grid.hpp"
#include "tfmfg/hamiltonian.hpp"
#include "tfmfg/stencil.hpp"

namespace tfmfg {

/// Discrete transport term B(U, ·) of the density equation, frozen at one value step U.
///
/// Per axis, with g₁ = ∂g/∂q₁ and g₂ = ∂g/∂q₂ evaluated at [D_hU] of the named cell,
///     B(U, M)_i = (1/h)[M_i g₁(i) - M_{i-1} g₁(i-1) + M_{i+1} g₂(i+1) - M_i g₂(i)],
/// so that -(B(U, M), W)₂ = h^d Σ_i M_i ∇g(x_i, [D_hU]_i)·[D_hW]_i.
class TransportOperator {
public:
    TransportOperator(const GridFunction& u_step, const NumericalHamiltonian& hamiltonian);

    const TorusGrid& grid() const noexcept { return grid_; }
    /// ∂g/∂q_k at point p.
    double gradient(std::size_t p, int k) const noexcept { return grad_[p * components() + static_cast<std::size_t>(k)]; }
    std::size_t components() const noexcept { return 2 * static_cast<std::size_t>(grid_.dim()); }

    GridFunction apply(const GridFunction& m) const;
    /// A = -σΔ_h - B as a stencil matrix.
    StencilMatrix full_operator(double sigma) const;

private:
    TorusGrid grid_;
    std::vector<double> grad_;
};

TransportOperator assemble_transport(const GridFunction& u_step, const NumericalHamiltonian& hamiltonian);

using DensityTrajectory = std::vector<GridFunction>;

struct FpStepResult {
    GridFunction m;
    /// ‖(I + ρA)M - rhs‖_∞ / ‖rhs‖_∞
    double linear_residual = 0.0;
    /// min_p (1 + ρA_pp - ρ Σ_q |A_pq|), the row diagonal-dominance margin of I + ρA.
    double dominance_margin = 0.0;
};

/// Solves (I + ρA)M^{n+1} = Σ_{k=0}^{n} c_k^{n+1} M^k + ρ b^{n+1} for history = M⁰..Mⁿ.
/// Throws SchemeError when I + ρA violates the M-matrix sign pattern, is
/// singular, or the linear residual exceeds 1e-12.
FpStepResult fp_step(const L1Weights& weights, const StencilMatrix& a, std::span<const GridFunction> history,
                     const GridFunction* source = nullptr);

struct FpSweepStats {
    double max_linear_residual = 0.0;
    double min_dominance_margin = 0.0;
};

/// M⁰ = m0 and one fp_step per n = 0..N-1 with A assembled at Uⁿ. `source`,
/// when non-empty, holds b¹..b^N; without it every step is checked for K_h
/// membership (values below -1e-12 or mass drift above 1e-10 throw SchemeError).
DensityTrajectory forward_sweep(std::span<const GridFunction> u_traj, const DiscreteMeasure& m0,
                                const L1Weights& weights, const NumericalHamiltonian& hamiltonian, double sigma,
                                std::span<const GridFunction> source = {}, FpSweepStats* stats = nullptr);

struct MassReport {
    static constexpr double kMassTolerance = 1e-10;
    static constexpr double kNegativeTolerance = 1e-12;

    std::vector<double> mass_deviation;  // |(Mⁿ, 1)₂ - 1|
    std::vector<double> min_value;
    double max_deviation = 0.0;
    double global_min = 0.0;
    /// First step violating either tolerance, -1 when none does.
    int first_violation = -1;

    bool ok() const noexcept { return first_violation < 0; }
};

MassReport mass_and_positivity_report(std::span<const GridFunction> traj);

/// max_n |Σ_{k=0}^{n} b_k ((M^{n+1-k}, 1)₂ - (M^{n-k}, 1)₂) / Δt|, the mass balance computed through the increment form.
double conservation_residual(const L1Weights& weights, std::span<const GridFunction> traj);

/// b^{n+1} = D M^{n+1} + A(Uⁿ) M^{n+1} for n = 0..N-1.
std::vector<GridFunction> fp_equation_residuals(std::span<const GridFunction> u_traj,
                                                std::span<const GridFunction> m_traj, const L1Weights& weights,
                                                const NumericalHamiltonian& hamiltonian, double sigma);

}  // namespace tfmfg
