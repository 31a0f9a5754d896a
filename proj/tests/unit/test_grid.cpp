#include <doctest.h>

#include <cmath>
#include <limits>

#include "generators.hpp"
#include "tfmfg/error.hpp"
#include "tfmfg/grid.hpp"

using namespace tfmfg;
using tfmfg::testing::Gen;

TEST_CASE("grid construction and indexing") {
    CHECK_THROWS_AS(TorusGrid(3, 10), InvalidArgument);
    CHECK_THROWS_AS(TorusGrid(1, 1), InvalidArgument);

    TorusGrid g1(1, 8);
    CHECK(g1.size() == 8);
    CHECK(g1.cell_volume() == doctest::Approx(0.125));
    CHECK(g1.shift(0, 0, -1) == 7);
    CHECK(g1.shift(7, 0, 1) == 0);
    CHECK(g1.shift(3, 0, 17) == 4);

    TorusGrid g2(2, 5);
    CHECK(g2.size() == 25);
    CHECK(g2.cell_volume() == doctest::Approx(0.04));
    for (std::size_t p = 0; p < g2.size(); ++p) {
        const auto ij = g2.multi_index(p);
        CHECK(g2.flat_index(ij[0], ij[1]) == p);
        const auto back = g2.shift(g2.shift(p, 1, 1), 1, -1);
        CHECK(back == p);
    }
    CHECK(g2.flat_index(-1, 0) == g2.flat_index(4, 0));
    CHECK(g2.shift(g2.flat_index(4, 2), 0, 1) == g2.flat_index(0, 2));
    CHECK(g2.shift(g2.flat_index(1, 4), 1, 1) == g2.flat_index(1, 0));
    const auto x = g2.coordinates(g2.flat_index(2, 3));
    CHECK(x[0] == doctest::Approx(0.4));
    CHECK(x[1] == doctest::Approx(0.6));
}

TEST_CASE("grid function rejects bad input") {
    TorusGrid g(1, 4);
    CHECK_THROWS_AS(GridFunction(g, std::vector<double>{1, 2, 3}), InvalidArgument);
    CHECK_THROWS_AS(GridFunction(g, std::vector<double>{1, 2, std::numeric_limits<double>::quiet_NaN(), 3}),
                    InvalidArgument);
    GridFunction a(g, 1.0);
    GridFunction b(TorusGrid(1, 5), 1.0);
    CHECK_THROWS_AS(a += b, InvalidArgument);
}

TEST_CASE("hand-computed stencils on four cells") {
    TorusGrid g(1, 4);
    const GridFunction delta(g, std::vector<double>{1, 0, 0, 0});
    const GridFunction lap = discrete_laplacian(delta);
    CHECK(lap[0] == doctest::Approx(-32.0));
    CHECK(lap[1] == doctest::Approx(16.0));
    CHECK(lap[2] == doctest::Approx(0.0));
    CHECK(lap[3] == doctest::Approx(16.0));

    const GridFunction ramp(g, std::vector<double>{0, 1, 2, 3});
    const GridFunction d = forward_diff(ramp, 0);
    CHECK(d[0] == doctest::Approx(4.0));
    CHECK(d[1] == doctest::Approx(4.0));
    CHECK(d[2] == doctest::Approx(4.0));
    CHECK(d[3] == doctest::Approx(-12.0));

    // [D_h U]_0 = ((U_1 - U_0)/h, (U_0 - U_3)/h)
    const DiscreteGradient grad = discrete_gradient(ramp);
    CHECK(grad.at(0)[0] == doctest::Approx(4.0));
    CHECK(grad.at(0)[1] == doctest::Approx(-12.0));
    CHECK(grad.at(2)[0] == doctest::Approx(4.0));
    CHECK(grad.at(2)[1] == doctest::Approx(4.0));

    const GridFunction u(g, std::vector<double>{1, 2, 3, 4});
    CHECK(inner_product(u, u) == doctest::Approx(7.5));
    CHECK(mass(u) == doctest::Approx(2.5));
    CHECK(norm_inf(u) == doctest::Approx(4.0));
    CHECK(norm_l2(u) == doctest::Approx(std::sqrt(7.5)));
}

TEST_CASE("2D Laplacian of a single spike") {
    TorusGrid g(2, 4);
    GridFunction u(g);
    u[g.flat_index(1, 2)] = 1.0;
    const GridFunction lap = discrete_laplacian(u);
    CHECK(lap[g.flat_index(1, 2)] == doctest::Approx(-64.0));
    for (auto [i, j] : {std::pair{0, 2}, {2, 2}, {1, 1}, {1, 3}}) CHECK(lap[g.flat_index(i, j)] == doctest::Approx(16.0));
    CHECK(lap[g.flat_index(0, 0)] == doctest::Approx(0.0));
}

TEST_CASE("summation by parts for the Laplacian") {
    Gen gen(11);
    for (int dim : {1, 2}) {
        for (int trial = 0; trial < 20; ++trial) {
            TorusGrid g(dim, gen.integer(3, 12));
            const GridFunction u = gen.field(g), v = gen.field(g);
            double rhs = 0.0;
            for (int a = 0; a < dim; ++a) rhs += inner_product(forward_diff(u, a), forward_diff(v, a));
            const double lhs = -inner_product(discrete_laplacian(u), v);
            CHECK(std::fabs(lhs - rhs) <= 1e-12 * (1.0 + std::fabs(rhs)));
            CHECK(std::fabs(mass(discrete_laplacian(u))) <= 1e-11);
        }
    }
}

TEST_CASE("discrete measures") {
    TorusGrid g(1, 4);
    CHECK_NOTHROW(DiscreteMeasure(GridFunction(g, 1.0)));
    CHECK_THROWS_AS(DiscreteMeasure(GridFunction(g, 2.0)), InvalidArgument);
    CHECK_THROWS_AS(DiscreteMeasure(GridFunction(g, std::vector<double>{2.1, -0.1, 1, 1})), InvalidArgument);
}

TEST_CASE("cell averages") {
    TorusGrid g(1, 10);
    const DiscreteMeasure flat = cell_average_density(g, [](std::span<const double>) { return 3.0; });
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(flat.density()[i] == doctest::Approx(1.0).epsilon(1e-14));

    // Exact cell average of 1 + cos 2πx over [x_i - h/2, x_i + h/2]
    // is 1 + sinc(πh) cos 2πx_i; the cosines sum to zero so no rescaling happens.
    const double h = g.h();
    const DiscreteMeasure wave =
        cell_average_density(g, [](std::span<const double> x) { return 1.0 + std::cos(2.0 * M_PI * x[0]); });
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double expect = 1.0 + std::sin(M_PI * h) / (M_PI * h) * std::cos(2.0 * M_PI * i * h);
        CHECK(std::fabs(wave.density()[i] - expect) <= 1e-12);
    }

    TorusGrid g2(2, 8);
    const DiscreteMeasure bump = cell_average_density(g2, [](std::span<const double> x) {
        return std::exp(-((x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.3) * (x[1] - 0.3)) / 0.05);
    });
    CHECK(bump.mass() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(bump.density().min() > 0.0);

    CHECK_THROWS_AS(cell_average_density(g, [](std::span<const double>) { return -1.0; }), InvalidArgument);
    CHECK_THROWS_AS(cell_average_density(g, [](std::span<const double>) { return 0.0; }), InvalidArgument);
}
