#include "tfmfg/fp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "tfmfg/error.hpp"
#include "tfmfg/kernels.hpp"

namespace tfmfg {

TransportOperator::TransportOperator(const GridFunction& u_step, const NumericalHamiltonian& hamiltonian)
    : grid_(u_step.grid()), grad_(u_step.size() * 2 * static_cast<std::size_t>(u_step.grid().dim())) {
    if (!(hamiltonian.grid() == grid_)) throw InvalidArgument("TransportOperator: grid mismatch");
    const std::size_t m = components();
    std::array<double, 4> q{};
    for (std::size_t p = 0; p < grid_.size(); ++p) {
        discrete_gradient_at(u_step, p, std::span<double>(q.data(), m));
        hamiltonian.grad_g(p, std::span<const double>(q.data(), m), std::span<double>(grad_.data() + p * m, m));
    }
}

GridFunction TransportOperator::apply(const GridFunction& m) const {
    if (!(m.grid() == grid_)) throw InvalidArgument("TransportOperator::apply: grid mismatch");
    const double inv_h = 1.0 / grid_.h();
    GridFunction out(grid_);
    for (std::size_t p = 0; p < grid_.size(); ++p) {
        double acc = 0.0;
        for (int a = 0; a < grid_.dim(); ++a) {
            const std::size_t lo = grid_.shift(p, a, -1);
            const std::size_t hi = grid_.shift(p, a, 1);
            acc += m[p] * gradient(p, 2 * a) - m[lo] * gradient(lo, 2 * a);
            acc += m[hi] * gradient(hi, 2 * a + 1) - m[p] * gradient(p, 2 * a + 1);
        }
        out[p] = acc * inv_h;
    }
    return out;
}

StencilMatrix TransportOperator::full_operator(double sigma) const {
    const int d = grid_.dim();
    const double h = grid_.h();
    const double diff = sigma / (h * h);
    StencilMatrix A(grid_);
    for (std::size_t p = 0; p < grid_.size(); ++p) {
        double diag = 2.0 * d * diff;
        for (int a = 0; a < d; ++a) {
            diag += (gradient(p, 2 * a + 1) - gradient(p, 2 * a)) / h;
            A.lower[a][p] = -diff + gradient(grid_.shift(p, a, -1), 2 * a) / h;
            A.upper[a][p] = -diff - gradient(grid_.shift(p, a, 1), 2 * a + 1) / h;
        }
        A.diag[p] = diag;
    }
    return A;
}

TransportOperator assemble_transport(const GridFunction& u_step, const NumericalHamiltonian& hamiltonian) {
    return TransportOperator(u_step, hamiltonian);
}

namespace {

constexpr double kLinearTolerance = 1e-12;

double sup_relative(const GridFunction& r, const GridFunction& rhs) {
    return norm_inf(r) / std::max(norm_inf(rhs), 1e-300);
}

}  // namespace

FpStepResult fp_step(const L1Weights& weights, const StencilMatrix& a, std::span<const GridFunction> history,
                     const GridFunction* source) {
    if (history.empty()) throw InvalidArgument("fp_step: history must not be empty");
    const int n = static_cast<int>(history.size()) - 1;
    if (n + 1 > weights.steps()) throw InvalidArgument("fp_step: history longer than the time axis");
    const TorusGrid& g = a.grid;
    for (const GridFunction& m : history)
        if (!(m.grid() == g)) throw InvalidArgument("fp_step: grid mismatch");
    const double rho = weights.rho();

    StencilMatrix sys = a;
    sys.scale(rho);
    sys.shift_diagonal(1.0);
    double margin = std::numeric_limits<double>::infinity();
    double worst_diag = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < g.size(); ++p) {
        double off_abs = 0.0;
        for (int ax = 0; ax < g.dim(); ++ax) {
            if (sys.lower[ax][p] > 0.0 || sys.upper[ax][p] > 0.0)
                throw SchemeError("fp_step: positive off-diagonal entry; the transport term violates the monotone sign pattern");
            off_abs += std::fabs(sys.lower[ax][p]) + std::fabs(sys.upper[ax][p]);
        }
        worst_diag = std::min(worst_diag, a.diag[p]);
        margin = std::min(margin, sys.diag[p] - off_abs);
        if (!(sys.diag[p] > 0.0)) {
            std::ostringstream msg;
            msg << "fp_step: nonpositive diagonal in I + rho A; need rho < " << 1.0 / std::fabs(worst_diag)
                << " (currently " << rho << ")";
            throw SchemeError(msg.str());
        }
    }

    const std::vector<double> w = weights.forward_row(n + 1);
    std::vector<const double*> rows;
    rows.reserve(history.size());
    for (const GridFunction& m : history) rows.push_back(m.data());
    GridFunction rhs(g);
    kernels::weighted_accumulate(w, rows, rhs.values());
    if (source) {
        require_same_grid(*source, rhs);
        kernels::axpby(rho, source->values(), 1.0, rhs.values());
    }

    StencilSolver solver;
    solver.factorize(sys);
    FpStepResult out{solver.solve(rhs)};
    GridFunction r = sys.apply(out.m) - rhs;
    out.linear_residual = sup_relative(r, rhs);
    if (out.linear_residual > kLinearTolerance) {
        // One step of iterative refinement before giving up.
        out.m -= solver.solve(r);
        out.linear_residual = sup_relative(sys.apply(out.m) - rhs, rhs);
        if (out.linear_residual > kLinearTolerance) throw SchemeError("fp_step: linear residual above tolerance");
    }
    out.dominance_margin = margin;
    return out;
}

DensityTrajectory forward_sweep(std::span<const GridFunction> u_traj, const DiscreteMeasure& m0,
                                const L1Weights& weights, const NumericalHamiltonian& hamiltonian, double sigma,
                                std::span<const GridFunction> source, FpSweepStats* stats) {
    const int N = weights.steps();
    if (u_traj.size() != static_cast<std::size_t>(N) + 1)
        throw InvalidArgument("forward_sweep: value trajectory must have N+1 entries");
    if (!source.empty() && source.size() != static_cast<std::size_t>(N))
        throw InvalidArgument("forward_sweep: source must have N entries");
    if (!(sigma >= 0.0)) throw InvalidArgument("forward_sweep: sigma must be nonnegative");

    DensityTrajectory m;
    m.reserve(static_cast<std::size_t>(N) + 1);
    m.push_back(m0.density());
    FpSweepStats local{0.0, std::numeric_limits<double>::infinity()};

    for (int n = 0; n < N; ++n) {
        const StencilMatrix A = assemble_transport(u_traj[n], hamiltonian).full_operator(sigma);
        FpStepResult step = [&] {
            try {
                return fp_step(weights, A, std::span<const GridFunction>(m), source.empty() ? nullptr : &source[n]);
            } catch (const SchemeError& e) {
                throw SchemeError(std::string(e.what()) + " at step " + std::to_string(n + 1), n + 1);
            }
        }();
        local.max_linear_residual = std::max(local.max_linear_residual, step.linear_residual);
        local.min_dominance_margin = std::min(local.min_dominance_margin, step.dominance_margin);
        if (source.empty()) {
            const double lo = step.m.min();
            const double dev = std::fabs(mass(step.m) - 1.0);
            if (lo < -MassReport::kNegativeTolerance || dev > MassReport::kMassTolerance) {
                std::ostringstream msg;
                msg << "forward_sweep: density left K_h at step " << n + 1 << " (min " << lo << ", mass deviation "
                    << dev << ")";
                throw SchemeError(msg.str(), n + 1);
            }
        }
        m.push_back(std::move(step.m));
    }
    if (stats) *stats = local;
    return m;
}

MassReport mass_and_positivity_report(std::span<const GridFunction> traj) {
    MassReport r;
    r.global_min = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < traj.size(); ++n) {
        const double dev = std::fabs(mass(traj[n]) - 1.0);
        const double lo = traj[n].min();
        r.mass_deviation.push_back(dev);
        r.min_value.push_back(lo);
        r.max_deviation = std::max(r.max_deviation, dev);
        r.global_min = std::min(r.global_min, lo);
        if (r.first_violation < 0 && (dev > MassReport::kMassTolerance || lo < -MassReport::kNegativeTolerance))
            r.first_violation = static_cast<int>(n);
    }
    if (traj.empty()) r.global_min = 0.0;
    return r;
}

double conservation_residual(const L1Weights& weights, std::span<const GridFunction> traj) {
    if (traj.size() < 2) return 0.0;
    if (traj.size() > static_cast<std::size_t>(weights.steps()) + 1)
        throw InvalidArgument("conservation_residual: trajectory longer than the time axis");
    std::vector<double> masses;
    masses.reserve(traj.size());
    for (const GridFunction& m : traj) masses.push_back(mass(m));
    double worst = 0.0;
    for (std::size_t n = 0; n + 1 < traj.size(); ++n) {
        worst = std::max(worst, std::fabs(forward_caputo_increment_form(
                                    weights, std::span<const double>(masses.data(), n + 2))));
    }
    return worst;
}

std::vector<GridFunction> fp_equation_residuals(std::span<const GridFunction> u_traj,
                                                std::span<const GridFunction> m_traj, const L1Weights& weights,
                                                const NumericalHamiltonian& hamiltonian, double sigma) {
    const auto N = static_cast<std::size_t>(weights.steps());
    if (u_traj.size() != N + 1 || m_traj.size() != N + 1)
        throw InvalidArgument("fp_equation_residuals: trajectories must have N+1 entries");
    std::vector<GridFunction> out;
    out.reserve(N);
    for (std::size_t n = 0; n < N; ++n) {
        GridFunction b = forward_caputo(weights, m_traj.subspan(0, n + 2));
        b += assemble_transport(u_traj[n], hamiltonian).full_operator(sigma).apply(m_traj[n + 1]);
        out.push_back(std::move(b));
    }
    return out;
}

}  // namespace tfmfg
