#include "tfmfg/mfg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "tfmfg/error.hpp"
#include "tfmfg/kernels.hpp"

namespace tfmfg {

MfgProblem::MfgProblem(const TorusGrid& grid, const TimeAxis& axis, double alpha, double sigma,
                       NumericalHamiltonian hamiltonian, CouplingCost coupling, const GridFunction::Sampler& m0,
                       const GridFunction::Sampler& u_terminal)
    : grid_(grid),
      weights_(FractionalOrder(alpha), axis),
      sigma_(sigma),
      hamiltonian_(std::move(hamiltonian)),
      coupling_(std::move(coupling)),
      m0_(cell_average_density(grid, m0)),
      u_terminal_(GridFunction::sample(grid, u_terminal)) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("MfgProblem: sigma must be nonnegative");
    if (!(hamiltonian_.grid() == grid_)) throw InvalidArgument("MfgProblem: hamiltonian grid mismatch");
    if (!(coupling_.grid() == grid_) || !(coupling_.axis() == axis))
        throw InvalidArgument("MfgProblem: coupling discretization mismatch");
}

ValueTrajectory map_psi1(std::span<const GridFunction> m_traj, const MfgProblem& problem, const SolverConfig& config,
                         std::span<const GridFunction> source) {
    return backward_sweep(m_traj, problem.u_terminal(), problem.weights(), problem.hamiltonian(), problem.coupling(),
                          problem.sigma(), config, source);
}

DensityTrajectory map_psi2(std::span<const GridFunction> u_traj, const MfgProblem& problem, const SolverConfig&,
                           std::span<const GridFunction> source, FpSweepStats* stats) {
    return forward_sweep(u_traj, problem.m0(), problem.weights(), problem.hamiltonian(), problem.sigma(), source,
                         stats);
}

double sup_l2_distance(std::span<const GridFunction> a, std::span<const GridFunction> b) {
    if (a.size() != b.size()) throw InvalidArgument("sup_l2_distance: length mismatch");
    double worst = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) worst = std::max(worst, norm_l2(a[n] - b[n]));
    return worst;
}

namespace {

/// Projects a density trajectory back onto K_h^N: negative values are
/// clipped and every step is rescaled to unit mass.
void project_onto_kh(DensityTrajectory& m) {
    for (GridFunction& step : m) {
        for (double& v : step.values()) v = std::max(v, 0.0);
        step *= 1.0 / mass(step);
    }
}

/// Windowed Anderson extrapolation (type II) for the residual f = Φ(M) - M.
class AndersonMixer {
public:
    AndersonMixer(int depth, double theta) : depth_(depth), theta_(theta) {}

    /// Returns the next iterate given the current iterate x and its image g = Φ(x).
    Eigen::VectorXd next(const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
        const Eigen::VectorXd f = g - x;
        if (has_prev_) {
            dx_.push_back(x - x_prev_);
            df_.push_back(f - f_prev_);
            if (static_cast<int>(dx_.size()) > depth_) {
                dx_.erase(dx_.begin());
                df_.erase(df_.begin());
            }
        }
        x_prev_ = x;
        f_prev_ = f;
        has_prev_ = true;
        Eigen::VectorXd out = x + theta_ * f;
        if (dx_.empty()) return out;
        const auto cols = static_cast<Eigen::Index>(dx_.size());
        Eigen::MatrixXd DF(f.size(), cols), DX(f.size(), cols);
        for (Eigen::Index k = 0; k < cols; ++k) {
            DF.col(k) = df_[k];
            DX.col(k) = dx_[k];
        }
        const Eigen::VectorXd gamma = DF.colPivHouseholderQr().solve(f);
        out -= (DX + theta_ * DF) * gamma;
        return out;
    }

private:
    int depth_;
    double theta_;
    bool has_prev_ = false;
    Eigen::VectorXd x_prev_, f_prev_;
    std::vector<Eigen::VectorXd> dx_, df_;
};

Eigen::VectorXd flatten(const DensityTrajectory& m) {
    const auto size = static_cast<Eigen::Index>(m.front().size());
    Eigen::VectorXd v(size * static_cast<Eigen::Index>(m.size()));
    for (std::size_t n = 0; n < m.size(); ++n)
        v.segment(static_cast<Eigen::Index>(n) * size, size) = Eigen::Map<const Eigen::VectorXd>(m[n].data(), size);
    return v;
}

void unflatten(const Eigen::VectorXd& v, DensityTrajectory& m) {
    const auto size = static_cast<Eigen::Index>(m.front().size());
    for (std::size_t n = 0; n < m.size(); ++n)
        Eigen::Map<Eigen::VectorXd>(m[n].values().data(), size) = v.segment(static_cast<Eigen::Index>(n) * size, size);
}

}  // namespace

MfgSolution solve_mfg(const MfgProblem& problem, const SolverConfig& config, const DensityTrajectory* initial,
                      const MfgSources* sources) {
    config.validate();
    const auto steps = static_cast<std::size_t>(problem.weights().steps()) + 1;
    DensityTrajectory m = initial ? *initial : DensityTrajectory(steps, problem.m0().density());
    if (m.size() != steps) throw InvalidArgument("solve_mfg: initial iterate must have N+1 entries");
    const std::span<const GridFunction> a = sources ? std::span<const GridFunction>(sources->value)
                                                    : std::span<const GridFunction>();
    const std::span<const GridFunction> b = sources ? std::span<const GridFunction>(sources->density)
                                                    : std::span<const GridFunction>();
    const bool decoupled = problem.coupling().decoupled();
    const double theta = decoupled ? 1.0 : config.theta;
    const bool accelerate = !decoupled && config.anderson_depth > 0;
    AndersonMixer mixer(config.anderson_depth, theta);

    MfgSolution sol;
    sol.iterate_min = std::numeric_limits<double>::infinity();
    DensityTrajectory image;
    while (sol.iterations < config.fp_max) {
        ++sol.iterations;
        for (const GridFunction& step : m) {
            sol.iterate_min = std::min(sol.iterate_min, step.min());
            sol.iterate_mass_dev = std::max(sol.iterate_mass_dev, std::fabs(mass(step) - 1.0));
        }
        const ValueTrajectory u = map_psi1(m, problem, config, a);
        image = map_psi2(u, problem, config, b, &sol.fp_stats);
        sol.residual = sup_l2_distance(image, m);
        sol.history.push_back(sol.residual);
        if (sol.residual < config.fp_tol) {
            sol.converged = true;
            break;
        }
        if (accelerate) {
            unflatten(mixer.next(flatten(m), flatten(image)), m);
        } else {
            for (std::size_t n = 0; n < steps; ++n)
                kernels::axpby(theta, image[n].values(), 1.0 - theta, m[n].values());
        }
        // Convex combinations stay in K_h, so without acceleration this only
        // removes round-off drift. Perturbed density equations leave K_h by design.
        if (b.empty()) project_onto_kh(m);
    }
    sol.m = std::move(image);
    sol.u = map_psi1(sol.m, problem, config, a);
    return sol;
}

namespace {

void check_pairs(std::span<const GridFunction> u, std::span<const GridFunction> m,
                 std::span<const GridFunction> u_tilde, std::span<const GridFunction> m_tilde,
                 const MfgProblem& problem) {
    const auto steps = static_cast<std::size_t>(problem.weights().steps()) + 1;
    if (u.size() != steps || m.size() != steps || u_tilde.size() != steps || m_tilde.size() != steps)
        throw InvalidArgument("duality_gap: trajectories must have N+1 entries");
    for (std::size_t n = 0; n < steps; ++n) {
        for (const GridFunction* f : {&u[n], &m[n], &u_tilde[n], &m_tilde[n]})
            if (!(f->grid() == problem.grid())) throw InvalidArgument("duality_gap: grid mismatch");
    }
}

/// h^d Σ_i w_i Rⁿ_i(U, Ũ)
double weighted_bregman(const NumericalHamiltonian& ham, const GridFunction& u, const GridFunction& u_tilde,
                        const GridFunction& w) {
    const TorusGrid& g = u.grid();
    const std::size_t m = 2 * static_cast<std::size_t>(g.dim());
    std::array<double, 4> q{}, qt{}, dg{};
    double acc = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
        const std::span<const double> qs(q.data(), m), qts(qt.data(), m);
        discrete_gradient_at(u, p, std::span<double>(q.data(), m));
        discrete_gradient_at(u_tilde, p, std::span<double>(qt.data(), m));
        ham.grad_g(p, qs, std::span<double>(dg.data(), m));
        double r = ham.eval_g(p, qts) - ham.eval_g(p, qs);
        for (std::size_t k = 0; k < m; ++k) r -= dg[k] * (qt[k] - q[k]);
        acc += w[p] * r;
    }
    return g.cell_volume() * acc;
}

}  // namespace

DualityGap duality_gap(std::span<const GridFunction> u, std::span<const GridFunction> m,
                       std::span<const GridFunction> u_tilde, std::span<const GridFunction> m_tilde,
                       const MfgProblem& problem) {
    check_pairs(u, m, u_tilde, m_tilde, problem);
    const int N = problem.weights().steps();
    DualityGap gap;
    for (int n = 0; n < N; ++n) {
        gap.coupling += monotonicity_gap(problem.coupling(), m[n + 1], m_tilde[n + 1], n + 1);
        gap.bregman += weighted_bregman(problem.hamiltonian(), u[n], u_tilde[n], m[n + 1]);
        gap.bregman_tilde += weighted_bregman(problem.hamiltonian(), u_tilde[n], u[n], m_tilde[n + 1]);
    }
    return gap;
}

double IdentityCheck::relative() const noexcept {
    return std::fabs(lhs - rhs) / std::max(scale, 1e-300);
}

IdentityCheck duality_identity(std::span<const GridFunction> u, std::span<const GridFunction> m,
                               std::span<const GridFunction> u_tilde, std::span<const GridFunction> m_tilde,
                               const MfgProblem& problem) {
    check_pairs(u, m, u_tilde, m_tilde, problem);
    const L1Weights& w = problem.weights();
    const auto& ham = problem.hamiltonian();
    const double sigma = problem.sigma();
    const auto a = hjb_equation_residuals(u, m, w, ham, problem.coupling(), sigma);
    const auto a_t = hjb_equation_residuals(u_tilde, m_tilde, w, ham, problem.coupling(), sigma);
    const auto b = fp_equation_residuals(u, m, w, ham, sigma);
    const auto b_t = fp_equation_residuals(u_tilde, m_tilde, w, ham, sigma);

    const DualityGap gap = duality_gap(u, m, u_tilde, m_tilde, problem);
    IdentityCheck out;
    out.lhs = gap.coupling + gap.bregman + gap.bregman_tilde;
    out.scale = std::fabs(gap.coupling) + std::fabs(gap.bregman) + std::fabs(gap.bregman_tilde);
    for (std::size_t n = 0; n < a.size(); ++n) {
        const GridFunction dm = m[n + 1] - m_tilde[n + 1];
        const GridFunction du = u[n] - u_tilde[n];
        const double t1 = inner_product(a_t[n] - a[n], dm);
        const double t2 = inner_product(b[n] - b_t[n], du);
        out.rhs += t1 + t2;
        out.scale += std::fabs(t1) + std::fabs(t2);
    }
    return out;
}

}  // namespace tfmfg
