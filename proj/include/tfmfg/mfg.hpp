#pragma once

#include <span>
#include <vector>

#include "tfmfg/caputo.hpp"
#include "tfmfg/coupling.hpp"
#include "tfmfg/fp.hpp"
#include "tfmfg/grid.hpp"
#include "tfmfg/hamiltonian.hpp"
#include "tfmfg/hjb.hpp"

namespace tfmfg {

/// Discretized coupled problem: value equation backward from u_T, density
/// equation forward from the cell-averaged m₀, both on the same grid and axis.
class MfgProblem {
public:
    /// Samples u_T at the nodes and cell-averages m₀ onto K_h.
    MfgProblem(const TorusGrid& grid, const TimeAxis& axis, double alpha, double sigma,
               NumericalHamiltonian hamiltonian, CouplingCost coupling, const GridFunction::Sampler& m0,
               const GridFunction::Sampler& u_terminal);

    const TorusGrid& grid() const noexcept { return grid_; }
    const TimeAxis& axis() const noexcept { return weights_.axis(); }
    const L1Weights& weights() const noexcept { return weights_; }
    double alpha() const noexcept { return weights_.alpha(); }
    double sigma() const noexcept { return sigma_; }
    const NumericalHamiltonian& hamiltonian() const noexcept { return hamiltonian_; }
    const CouplingCost& coupling() const noexcept { return coupling_; }
    const DiscreteMeasure& m0() const noexcept { return m0_; }
    const GridFunction& u_terminal() const noexcept { return u_terminal_; }

private:
    TorusGrid grid_;
    L1Weights weights_;
    double sigma_;
    NumericalHamiltonian hamiltonian_;
    CouplingCost coupling_;
    DiscreteMeasure m0_;
    GridFunction u_terminal_;
};

/// Optional perturbations aⁿ (value equation, n = 0..N-1) and b^{n+1}
/// (density equation) injected into both sweeps.
struct MfgSources {
    std::vector<GridFunction> value;
    std::vector<GridFunction> density;
};

ValueTrajectory map_psi1(std::span<const GridFunction> m_traj, const MfgProblem& problem, const SolverConfig& config,
                         std::span<const GridFunction> source = {});
DensityTrajectory map_psi2(std::span<const GridFunction> u_traj, const MfgProblem& problem,
                           const SolverConfig& config, std::span<const GridFunction> source = {},
                           FpSweepStats* stats = nullptr);

struct MfgSolution {
    ValueTrajectory u;
    DensityTrajectory m;
    int iterations = 0;
    /// sup_n ‖Φ(M)ⁿ - Mⁿ‖₂ at the last iteration.
    double residual = 0.0;
    std::vector<double> history;
    bool converged = false;
    FpSweepStats fp_stats;
    /// Smallest value and largest mass deviation over all iterates fed to Φ.
    double iterate_min = 0.0;
    double iterate_mass_dev = 0.0;
};

/// Damped iteration M ← (1-θ)M + θΦ(M), Φ = Ψ₂∘Ψ₁, starting from `initial`
/// or from m₀ at every step. Each damped iterate is renormalized to unit mass.
/// When the coupling is decoupled θ = 1 is used, so the residual vanishes at
/// the second iteration. On exit m is the last Φ(M) and u = Ψ₁(m). Failure to
/// reach fp_tol is reported through `converged`, never thrown.
MfgSolution solve_mfg(const MfgProblem& problem, const SolverConfig& config,
                      const DensityTrajectory* initial = nullptr, const MfgSources* sources = nullptr);

/// The three duality terms of the uniqueness argument, each summed over n = 0..N-1 with weight h^d:
///   coupling       Σ (f_h[M^{n+1}] - f_h[M̃^{n+1}], M^{n+1} - M̃^{n+1})₂
///   bregman        Σ (M^{n+1}, Rⁿ(U, Ũ))₂
///   bregman_tilde  Σ (M̃^{n+1}, Rⁿ(Ũ, U))₂
/// with Rⁿ(U, Ũ) = g([D_hŨⁿ]) - g([D_hUⁿ]) - ∇g([D_hUⁿ])·([D_hŨⁿ] - [D_hUⁿ]).
struct DualityGap {
    double coupling = 0.0;
    double bregman = 0.0;
    double bregman_tilde = 0.0;
};

DualityGap duality_gap(std::span<const GridFunction> u, std::span<const GridFunction> m,
                       std::span<const GridFunction> u_tilde, std::span<const GridFunction> m_tilde,
                       const MfgProblem& problem);

/// Both sides of the duality identity for two pairs sharing m₀ and u_T:
///   coupling + bregman + bregman_tilde = Σ (ãⁿ - aⁿ, M^{n+1} - M̃^{n+1})₂ + Σ (b^{n+1} - b̃^{n+1}, Uⁿ - Ũⁿ)₂
/// where a, b (ã, b̃) are the equation residuals of each pair, recomputed here.
struct IdentityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double scale = 0.0;
    double relative() const noexcept;
};

IdentityCheck duality_identity(std::span<const GridFunction> u, std::span<const GridFunction> m,
                               std::span<const GridFunction> u_tilde, std::span<const GridFunction> m_tilde,
                               const MfgProblem& problem);

/// sup_n ‖Aⁿ - Bⁿ‖₂
double sup_l2_distance(std::span<const GridFunction> a, std::span<const GridFunction> b);

}  // namespace tfmfg
