#pragma once

#include <span>
#include <vector>

#include "tfmfg/caputo.hpp"
#include "tfmfg/coupling.hpp"
#include "tfmfg/grid.hpp"
#include "tfmfg/hamiltonian.hpp"
#include "tfmfg/stencil.hpp"

namespace tfmfg {

/// Iteration controls shared by the per-step Newton solves and the coupled
/// fixed-point loop.
struct SolverConfig {
    double newton_tol = 1e-10;
    int newton_max = 100;
    double fp_tol = 1e-8;
    int fp_max = 200;
    double theta = 0.5;
    /// History length of the Anderson extrapolation applied on top of the
    /// damped density update; 0 gives the plain damped iteration.
    int anderson_depth = 0;

    /// Throws InvalidArgument on nonpositive tolerances, θ outside (0, 1] or a negative depth.
    void validate() const;
};

/// δ U - σ Δ_h U + g(x, [D_h U]) = V
struct HjbStepProblem {
    double delta;
    GridFunction rhs;
    const NumericalHamiltonian& hamiltonian;
    double sigma;
};

struct StationaryResult {
    GridFunction u;
    int iterations = 0;
    double residual = 0.0;
    int fallback_steps = 0;
};

/// Pointwise residual δ U - σ Δ_h U + g(x, [D_h U]) - V.
GridFunction stationary_residual(const HjbStepProblem& p, const GridFunction& u);
/// Jacobian of stationary_residual at u, using the subgradient selection of grad_g at kinks.
StencilMatrix stationary_jacobian(const HjbStepProblem& p, const GridFunction& u);

/// Semismooth Newton with step halving on the sup-norm residual; falls back
/// to explicit relaxation U ← U - τ F(U) when the line search stalls. The
/// initial guess defaults to V / δ. Throws ConvergenceError after
/// config.newton_max iterations.
StationaryResult solve_stationary(const HjbStepProblem& p, const SolverConfig& config,
                                  const GridFunction* initial_guess = nullptr);

using ValueTrajectory = std::vector<GridFunction>;

/// Backward implicit sweep: U^N = u_T and, for n = N-1..0, the stationary
/// problem with δ = 1/ρ and V = (1/ρ) Σ_{k>n} c̄_n^k U^k + f_h[M^{n+1}] + aⁿ.
/// `source`, when non-empty, holds a⁰..a^{N-1}. Failures carry the step index.
ValueTrajectory backward_sweep(std::span<const GridFunction> m_traj, const GridFunction& u_terminal,
                               const L1Weights& weights, const NumericalHamiltonian& hamiltonian,
                               const CouplingCost& coupling, double sigma, const SolverConfig& config,
                               std::span<const GridFunction> source = {});

/// aⁿ = D̄Uⁿ - σΔ_hUⁿ + g(x, [D_hUⁿ]) - f_h[M^{n+1}] for n = 0..N-1.
std::vector<GridFunction> hjb_equation_residuals(std::span<const GridFunction> u_traj,
                                                 std::span<const GridFunction> m_traj, const L1Weights& weights,
                                                 const NumericalHamiltonian& hamiltonian,
                                                 const CouplingCost& coupling, double sigma);

/// max over n, i of |aⁿ_i - sourceⁿ_i| (source defaults to zero).
double hjb_residual(std::span<const GridFunction> u_traj, std::span<const GridFunction> m_traj,
                    const L1Weights& weights, const NumericalHamiltonian& hamiltonian, const CouplingCost& coupling,
                    double sigma, std::span<const GridFunction> source = {});

/// ‖D_h Uⁿ‖_∞ for every step.
std::vector<double> lipschitz_seminorm(std::span<const GridFunction> u_traj);

}  // namespace tfmfg
