#include <doctest.h>

#include <cmath>
#include <vector>

#include "generators.hpp"
#include "tfmfg/caputo.hpp"
#include "tfmfg/coupling.hpp"
#include "tfmfg/error.hpp"
#include "tfmfg/hjb.hpp"

using namespace tfmfg;
using tfmfg::testing::Gen;

namespace {

NumericalHamiltonian random_hamiltonian(Gen& gen, const TorusGrid& g) {
    const double beta = gen.uniform(0.0, 1.0) < 0.5 ? 2.0 : gen.uniform(2.0, 3.0);
    return NumericalHamiltonian(beta, gen.uniform(0.2, 1.0), gen.field(g, 0.5));
}

GridFunction solve(const NumericalHamiltonian& ham, double delta, double sigma, const GridFunction& v,
                   const GridFunction* guess = nullptr) {
    const HjbStepProblem p{delta, v, ham, sigma};
    return solve_stationary(p, SolverConfig{}, guess).u;
}

}  // namespace

TEST_CASE("stationary problem closed forms") {
    TorusGrid g(1, 16);
    const double delta = 7.0;
    const NumericalHamiltonian zero = NumericalHamiltonian::quadratic(g);
    CHECK(norm_inf(solve(zero, delta, 0.3, GridFunction(g))) == 0.0);

    // Constant data: the gradient vanishes and U = (V - c) / δ.
    const NumericalHamiltonian shifted(2.0, 0.5, GridFunction(g, 1.5));
    const GridFunction u = solve(shifted, delta, 0.1, GridFunction(g, 5.0));
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(u[i] == doctest::Approx((5.0 - 1.5) / delta).epsilon(1e-12));
}

TEST_CASE("stationary solve reaches the tolerance") {
    Gen gen(31);
    for (int dim : {1, 2}) {
        for (int trial = 0; trial < 10; ++trial) {
            TorusGrid g(dim, dim == 1 ? 32 : 10);
            const auto ham = random_hamiltonian(gen, g);
            const double delta = gen.uniform(1.0, 200.0), sigma = gen.uniform(0.0, 0.2);
            const HjbStepProblem p{delta, gen.field(g, 5.0), ham, sigma};
            const StationaryResult r = solve_stationary(p, SolverConfig{});
            CHECK(r.residual <= 1e-10);
            CHECK(norm_inf(stationary_residual(p, r.u)) == doctest::Approx(r.residual));
        }
    }
}

TEST_CASE("Jacobian matches finite differences of the residual") {
    Gen gen(2);
    TorusGrid g(2, 5);
    const auto ham = random_hamiltonian(gen, g);
    const HjbStepProblem p{3.0, gen.field(g), ham, 0.05};
    const GridFunction u = gen.field(g, 2.0);
    const StencilMatrix J = stationary_jacobian(p, u);
    const GridFunction dir = gen.field(g);
    const double eps = 1e-6;
    const GridFunction fd = (1.0 / (2.0 * eps)) * (stationary_residual(p, u + eps * dir) -
                                                   stationary_residual(p, u - eps * dir));
    CHECK(norm_inf(fd - J.apply(dir)) <= 1e-5 * (1.0 + norm_inf(fd)));
}

TEST_CASE("comparison, nonexpansiveness and shift covariance") {
    Gen gen(77);
    for (int trial = 0; trial < 20; ++trial) {
        const int dim = trial % 2 + 1;
        TorusGrid g(dim, dim == 1 ? 24 : 8);
        const auto ham = random_hamiltonian(gen, g);
        const double delta = gen.uniform(2.0, 100.0), sigma = gen.uniform(0.0, 0.2);
        const GridFunction v = gen.field(g, 3.0);
        GridFunction bump = gen.nonnegative(g);
        const GridFunction w = v + bump;
        const GridFunction uv = solve(ham, delta, sigma, v);
        const GridFunction uw = solve(ham, delta, sigma, w);
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(uv[i] <= uw[i] + 1e-12);
        CHECK(norm_inf(uw - uv) <= norm_inf(w - v) / delta + 1e-11);

        const double c = gen.uniform(-2.0, 2.0);
        GridFunction vs = v;
        vs += delta * c;
        GridFunction expect = uv;
        expect += c;
        CHECK(norm_inf(solve(ham, delta, sigma, vs) - expect) <= 1e-10);

        // Same solution from an unrelated starting point.
        const GridFunction guess = gen.field(g, 10.0);
        CHECK(norm_inf(solve(ham, delta, sigma, v, &guess) - uv) <= 1e-10);
    }
}

TEST_CASE("Newton budget exhaustion is reported") {
    Gen gen(5);
    TorusGrid g(1, 32);
    const NumericalHamiltonian ham(3.0, 1.0, GridFunction(g));
    const HjbStepProblem p{1.0, gen.field(g, 50.0), ham, 0.0};
    SolverConfig cfg;
    cfg.newton_max = 1;
    cfg.newton_tol = 1e-300;
    CHECK_THROWS_AS(solve_stationary(p, cfg), ConvergenceError);
}

TEST_CASE("backward sweep trivial cases") {
    TorusGrid g(1, 20);
    const L1Weights w(FractionalOrder(0.6), TimeAxis(1.0, 15));
    const auto ham = NumericalHamiltonian::quadratic(g);
    const CouplingCost none = CouplingCost::density_only(g, w.axis(), 0.0);
    const std::vector<GridFunction> m(16, GridFunction(g, 1.0));

    const auto zero = backward_sweep(m, GridFunction(g), w, ham, none, 0.1, SolverConfig{});
    for (const auto& u : zero) CHECK(norm_inf(u) == 0.0);

    const auto flat = backward_sweep(m, GridFunction(g, 2.5), w, ham, none, 0.1, SolverConfig{});
    for (const auto& u : flat) CHECK(norm_inf(u - GridFunction(g, 2.5)) <= 1e-11);

    CHECK_THROWS_AS(backward_sweep(std::span<const GridFunction>(m).first(10), GridFunction(g), w, ham, none, 0.1,
                                   SolverConfig{}),
                    InvalidArgument);
}

TEST_CASE("backward sweep residual and perturbation sensitivity") {
    Gen gen(41);
    TorusGrid g(1, 30);
    for (double alpha : {0.5, 0.85, 1.0}) {
        const L1Weights w(FractionalOrder(alpha), TimeAxis(1.0, 25));
        const auto ham = NumericalHamiltonian::quadratic(g);
        const CouplingCost c = CouplingCost::moving_target(g, w.axis(), 0.5);
        const auto m = gen.densities(g, 26);
        const GridFunction uT = gen.field(g);
        const auto u = backward_sweep(m, uT, w, ham, c, 0.05, SolverConfig{});
        CHECK(hjb_residual(u, m, w, ham, c, 0.05) <= 1e-9);

        auto bad = u;
        const double eps = 1e-6;
        bad[10][7] += eps;
        CHECK(hjb_residual(bad, m, w, ham, c, 0.05) >= 0.5 * eps / w.rho());

        const auto src = gen.fields(g, 25, 0.3);
        const auto us = backward_sweep(m, uT, w, ham, c, 0.05, SolverConfig{}, src);
        CHECK(hjb_residual(us, m, w, ham, c, 0.05, src) <= 1e-9);
        CHECK(hjb_residual(us, m, w, ham, c, 0.05) > 1e-3);
    }
}

TEST_CASE("ordered data give ordered sweeps") {
    Gen gen(55);
    for (int trial = 0; trial < 8; ++trial) {
        TorusGrid g(1, 20);
        const double alpha = gen.uniform(0.3, 1.0);
        const L1Weights w(FractionalOrder(alpha), TimeAxis(1.0, 12));
        const auto ham = random_hamiltonian(gen, g);
        const CouplingCost c = CouplingCost::density_only(g, w.axis(), 1.0);
        const auto m = gen.fields(g, 13);
        auto m_hi = m;
        for (auto& f : m_hi) f += gen.nonnegative(g);
        const GridFunction uT = gen.field(g);
        const GridFunction uT_hi = uT + gen.nonnegative(g);
        const auto lo = backward_sweep(m, uT, w, ham, c, 0.02, SolverConfig{});
        const auto hi = backward_sweep(m_hi, uT_hi, w, ham, c, 0.02, SolverConfig{});
        double worst = 0.0;
        for (std::size_t n = 0; n < lo.size(); ++n) worst = std::max(worst, (lo[n] - hi[n]).max());
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("sup-norm barrier bound") {
    TorusGrid g(1, 32);
    for (double alpha : {0.3, 0.7}) {
        const int N = 40;
        const L1Weights w(FractionalOrder(alpha), TimeAxis(1.0, N));
        const auto ham = NumericalHamiltonian::quadratic(g);
        const CouplingCost c = CouplingCost::moving_target(g, w.axis(), 0.0);
        const std::vector<GridFunction> m(N + 1, GridFunction(g, 1.0));
        const GridFunction uT = GridFunction::sample(g, [](std::span<const double> x) { return std::sin(2 * M_PI * x[0]); });
        const auto u = backward_sweep(m, uT, w, ham, c, 0.05, SolverConfig{});
        double M0 = 0.0;
        for (int n = 0; n <= N; ++n) M0 = std::max(M0, norm_inf(c.potential_at(n)));
        for (int n = 0; n < N; ++n) {
            const double bound = norm_inf(uT) + M0 / barrier_constant(alpha) * std::pow((N - n) * w.dt(), alpha);
            CHECK(norm_inf(u[n]) <= bound + 1e-10);
        }
    }
}

TEST_CASE("Lipschitz seminorm") {
    TorusGrid g(1, 4);
    const std::vector<GridFunction> traj{GridFunction(g, 3.0), GridFunction(g, std::vector<double>{0, 1, 0, 1})};
    const auto s = lipschitz_seminorm(traj);
    CHECK(s[0] == 0.0);
    CHECK(s[1] == doctest::Approx(4.0));
}

TEST_CASE("config validation") {
    SolverConfig c;
    CHECK_NOTHROW(c.validate());
    c.theta = 0.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = SolverConfig{};
    c.fp_tol = -1.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = SolverConfig{};
    c.anderson_depth = -2;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
}
