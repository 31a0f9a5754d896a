#include "tfmfg/hjb.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "tfmfg/error.hpp"
#include "tfmfg/kernels.hpp"

namespace tfmfg {

void SolverConfig::validate() const {
    if (!(newton_tol > 0.0)) throw InvalidArgument("SolverConfig: newton_tol must be positive");
    if (newton_max < 1) throw InvalidArgument("SolverConfig: newton_max must be at least 1");
    if (!(fp_tol > 0.0)) throw InvalidArgument("SolverConfig: fp_tol must be positive");
    if (fp_max < 1) throw InvalidArgument("SolverConfig: fp_max must be at least 1");
    if (!(theta > 0.0 && theta <= 1.0)) throw InvalidArgument("SolverConfig: theta must lie in (0, 1]");
    if (anderson_depth < 0) throw InvalidArgument("SolverConfig: anderson_depth must be nonnegative");
}

namespace {

constexpr int kMaxHalvings = 30;
constexpr int kRelaxationSweeps = 50;

void check_problem(const HjbStepProblem& p) {
    if (!(p.delta > 0.0) || !std::isfinite(p.delta)) throw InvalidArgument("HjbStepProblem: delta must be positive");
    if (!(p.sigma >= 0.0)) throw InvalidArgument("HjbStepProblem: sigma must be nonnegative");
    if (!p.rhs.all_finite()) throw InvalidArgument("HjbStepProblem: rhs must be finite");
    if (!(p.rhs.grid() == p.hamiltonian.grid())) throw InvalidArgument("HjbStepProblem: grid mismatch");
}

/// g(x_p, [D_h u]_p) at every point.
GridFunction hamiltonian_term(const NumericalHamiltonian& ham, const GridFunction& u) {
    const TorusGrid& g = u.grid();
    const std::size_t m = 2 * static_cast<std::size_t>(g.dim());
    std::array<double, 4> q{};
    GridFunction out(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
        discrete_gradient_at(u, p, std::span<double>(q.data(), m));
        out[p] = ham.eval_g(p, std::span<const double>(q.data(), m));
    }
    return out;
}

}  // namespace

GridFunction stationary_residual(const HjbStepProblem& p, const GridFunction& u) {
    require_same_grid(u, p.rhs);
    GridFunction r = hamiltonian_term(p.hamiltonian, u);
    const GridFunction lap = discrete_laplacian(u);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += p.delta * u[i] - p.sigma * lap[i] - p.rhs[i];
    return r;
}

StencilMatrix stationary_jacobian(const HjbStepProblem& p, const GridFunction& u) {
    require_same_grid(u, p.rhs);
    const TorusGrid& g = u.grid();
    const int d = g.dim();
    const std::size_t m = 2 * static_cast<std::size_t>(d);
    const double h = g.h();
    const double diff = p.sigma / (h * h);
    std::array<double, 4> q{}, dg{};
    StencilMatrix J(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        discrete_gradient_at(u, i, std::span<double>(q.data(), m));
        p.hamiltonian.grad_g(i, std::span<const double>(q.data(), m), std::span<double>(dg.data(), m));
        double diag = p.delta + 2.0 * d * diff;
        for (int a = 0; a < d; ++a) {
            const double g_fwd = dg[2 * a];
            const double g_bwd = dg[2 * a + 1];
            diag += (g_bwd - g_fwd) / h;
            J.upper[a][i] = -diff + g_fwd / h;
            J.lower[a][i] = -diff - g_bwd / h;
        }
        J.diag[i] = diag;
    }
    return J;
}

StationaryResult solve_stationary(const HjbStepProblem& p, const SolverConfig& config,
                                  const GridFunction* initial_guess) {
    check_problem(p);
    StationaryResult out{initial_guess ? *initial_guess : (1.0 / p.delta) * p.rhs};
    require_same_grid(out.u, p.rhs);
    GridFunction& u = out.u;
    GridFunction f = stationary_residual(p, u);
    double r = norm_inf(f);
    StencilSolver solver;

    while (!(r <= config.newton_tol)) {
        if (out.iterations >= config.newton_max || !std::isfinite(r))
            throw ConvergenceError("solve_stationary: no convergence after " + std::to_string(out.iterations) +
                                       " iterations",
                                   r);
        ++out.iterations;
        const StencilMatrix J = stationary_jacobian(p, u);
        solver.factorize(J);
        const GridFunction dir = solver.solve(f);

        bool accepted = false;
        double step = 1.0;
        for (int k = 0; k <= kMaxHalvings && !accepted; ++k, step *= 0.5) {
            GridFunction trial = u;
            kernels::axpby(-step, dir.values(), 1.0, trial.values());
            GridFunction f_trial = stationary_residual(p, trial);
            const double r_trial = norm_inf(f_trial);
            if (r_trial < r) {
                u = std::move(trial);
                f = std::move(f_trial);
                r = r_trial;
                accepted = true;
            }
        }
        if (accepted) continue;

        // Stalled line search: explicit relaxation, stable for τ ≤ 1 / max diag.
        const double max_diag = *std::max_element(J.diag.begin(), J.diag.end());
        const double tau = std::min(0.5 / p.delta, 1.0 / max_diag);
        for (int k = 0; k < kRelaxationSweeps; ++k) {
            kernels::axpby(-tau, f.values(), 1.0, u.values());
            f = stationary_residual(p, u);
            ++out.fallback_steps;
        }
        r = norm_inf(f);
    }
    out.residual = r;
    return out;
}

ValueTrajectory backward_sweep(std::span<const GridFunction> m_traj, const GridFunction& u_terminal,
                               const L1Weights& weights, const NumericalHamiltonian& hamiltonian,
                               const CouplingCost& coupling, double sigma, const SolverConfig& config,
                               std::span<const GridFunction> source) {
    const int N = weights.steps();
    if (m_traj.size() != static_cast<std::size_t>(N) + 1)
        throw InvalidArgument("backward_sweep: density trajectory must have N+1 entries");
    if (!source.empty() && source.size() != static_cast<std::size_t>(N))
        throw InvalidArgument("backward_sweep: source must have N entries");
    if (!u_terminal.all_finite()) throw InvalidArgument("backward_sweep: terminal datum must be finite");

    const double delta = 1.0 / weights.rho();
    ValueTrajectory u(static_cast<std::size_t>(N) + 1, u_terminal);
    std::vector<const double*> rows;
    rows.reserve(static_cast<std::size_t>(N));
    GridFunction memory(u_terminal.grid());

    for (int n = N - 1; n >= 0; --n) {
        const std::vector<double> w = weights.backward_row(n);
        rows.clear();
        for (int k = n + 1; k <= N; ++k) rows.push_back(u[k].data());
        kernels::weighted_accumulate(w, rows, memory.values());

        GridFunction v = coupling.eval(m_traj[n + 1], n + 1);
        kernels::axpby(delta, memory.values(), 1.0, v.values());
        if (!source.empty()) v += source[n];

        const HjbStepProblem problem{delta, std::move(v), hamiltonian, sigma};
        try {
            u[n] = solve_stationary(problem, config, &u[n + 1]).u;
        } catch (const ConvergenceError& e) {
            throw ConvergenceError(std::string(e.what()) + " at step " + std::to_string(n), e.residual(), n);
        } catch (const SchemeError& e) {
            throw SchemeError(std::string(e.what()) + " at step " + std::to_string(n), n);
        }
    }
    return u;
}

std::vector<GridFunction> hjb_equation_residuals(std::span<const GridFunction> u_traj,
                                                 std::span<const GridFunction> m_traj, const L1Weights& weights,
                                                 const NumericalHamiltonian& hamiltonian,
                                                 const CouplingCost& coupling, double sigma) {
    const auto N = static_cast<std::size_t>(weights.steps());
    if (u_traj.size() != N + 1 || m_traj.size() != N + 1)
        throw InvalidArgument("hjb_equation_residuals: trajectories must have N+1 entries");
    std::vector<GridFunction> out;
    out.reserve(N);
    for (std::size_t n = 0; n < N; ++n) {
        GridFunction a = backward_caputo(weights, u_traj.subspan(n));
        a += hamiltonian_term(hamiltonian, u_traj[n]);
        kernels::axpby(-sigma, discrete_laplacian(u_traj[n]).values(), 1.0, a.values());
        a -= coupling.eval(m_traj[n + 1], static_cast<int>(n) + 1);
        out.push_back(std::move(a));
    }
    return out;
}

double hjb_residual(std::span<const GridFunction> u_traj, std::span<const GridFunction> m_traj,
                    const L1Weights& weights, const NumericalHamiltonian& hamiltonian, const CouplingCost& coupling,
                    double sigma, std::span<const GridFunction> source) {
    std::vector<GridFunction> a = hjb_equation_residuals(u_traj, m_traj, weights, hamiltonian, coupling, sigma);
    if (!source.empty() && source.size() != a.size())
        throw InvalidArgument("hjb_residual: source must have N entries");
    double worst = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) {
        if (!source.empty()) a[n] -= source[n];
        worst = std::max(worst, norm_inf(a[n]));
    }
    return worst;
}

std::vector<double> lipschitz_seminorm(std::span<const GridFunction> u_traj) {
    std::vector<double> out;
    out.reserve(u_traj.size());
    for (const GridFunction& u : u_traj) {
        double s = 0.0;
        for (int a = 0; a < u.grid().dim(); ++a) s = std::max(s, norm_inf(forward_diff(u, a)));
        out.push_back(s);
    }
    return out;
}

}  // namespace tfmfg
