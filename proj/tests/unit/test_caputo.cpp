#include <doctest.h>

#include <cmath>
#include <vector>

#include "generators.hpp"
#include "tfmfg/caputo.hpp"
#include "tfmfg/error.hpp"

using namespace tfmfg;
using tfmfg::testing::Gen;

namespace {

// Closed-form coefficients in extended precision, independent of the increment kernel.
long double closed_forward(int n, int k, long double alpha) {
    const long double b = 1.0L - alpha;
    if (k == 0) return std::pow(static_cast<long double>(n), b) - std::pow(static_cast<long double>(n - 1), b);
    const long double j = n - k;
    return 2.0L * std::pow(j, b) - std::pow(j - 1.0L, b) - std::pow(j + 1.0L, b);
}

long double closed_backward(int n, int k, int N, long double alpha) {
    const long double b = 1.0L - alpha;
    const long double j = k - n;
    if (k == N) return std::pow(j, b) - std::pow(j - 1.0L, b);
    return 2.0L * std::pow(j, b) - std::pow(j - 1.0L, b) - std::pow(j + 1.0L, b);
}

L1Weights make(double alpha, double T, int N) { return L1Weights(FractionalOrder(alpha), TimeAxis(T, N)); }

}  // namespace

TEST_CASE("argument validation") {
    CHECK_THROWS_AS(FractionalOrder(0.0), InvalidArgument);
    CHECK_THROWS_AS(FractionalOrder(1.1), InvalidArgument);
    CHECK_THROWS_AS(TimeAxis(0.0, 10), InvalidArgument);
    CHECK_THROWS_AS(TimeAxis(1.0, 0), InvalidArgument);
    const L1Weights w = make(0.5, 1.0, 10);
    CHECK_THROWS_AS(w.forward(0, 0), InvalidArgument);
    CHECK_THROWS_AS(w.forward(3, 3), InvalidArgument);
    CHECK_THROWS_AS(w.backward(3, 3), InvalidArgument);
    CHECK_THROWS_AS(w.backward(3, 11), InvalidArgument);
}

TEST_CASE("frozen values") {
    const L1Weights w = make(0.5, 1.0, 100);
    CHECK(w.forward(2, 0) == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-15));
    CHECK(w.forward(2, 1) == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-15));
    CHECK(w.rho() == doctest::Approx(0.0886226925452758).epsilon(1e-13));
    CHECK(w.increment(0) == 1.0);
    CHECK(w.b(0) == doctest::Approx(std::sqrt(0.01) / std::tgamma(1.5)).epsilon(1e-14));
}

TEST_CASE("coefficients match the closed forms") {
    for (double alpha : {0.3, 0.5, 0.85, 0.99}) {
        const int N = 400;
        const L1Weights w = make(alpha, 2.0, N);
        double worst = 0.0;
        for (int n = 1; n <= N; n += 7) {
            for (int k = 0; k < n; ++k) {
                const long double ref = closed_forward(n, k, alpha);
                worst = std::max(worst, static_cast<double>(std::fabs((w.forward(n, k) - ref) / ref)));
            }
        }
        for (int n = 0; n < N; n += 7) {
            for (int k = n + 1; k <= N; ++k) {
                const long double ref = closed_backward(n, k, N, alpha);
                worst = std::max(worst, static_cast<double>(std::fabs((w.backward(n, k) - ref) / ref)));
            }
        }
        CAPTURE(alpha);
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("coefficient laws") {
    for (double alpha : {0.3, 0.7, 0.99, 1.0}) {
        const int N = 300;
        const L1Weights w = make(alpha, 1.0, N);
        for (int n = 1; n <= N; ++n) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) {
                const double c = w.forward(n, k);
                if (alpha < 1.0) CHECK(c > 0.0);
                s += c;
            }
            CHECK(std::fabs(s - 1.0) <= 1e-13);
        }
        for (int n = 0; n < N; ++n) {
            double s = 0.0;
            for (int k = n + 1; k <= N; ++k) {
                s += w.backward(n, k);
                CHECK(w.backward(n, k) == w.forward(N - n, N - k));
            }
            CHECK(std::fabs(s - 1.0) <= 1e-13);
        }
    }
}

TEST_CASE("alpha = 1 reduces to backward Euler") {
    const L1Weights w = make(1.0, 1.0, 20);
    CHECK(w.rho() == doctest::Approx(0.05));
    for (int n = 1; n <= 20; ++n)
        for (int k = 0; k < n; ++k) CHECK(w.forward(n, k) == (k == n - 1 ? 1.0 : 0.0));
    const std::vector<double> y{1.0, 0.5, 0.75};
    CHECK(forward_caputo(w, y) == doctest::Approx((0.75 - 0.5) / 0.05));
}

TEST_CASE("L1 is exact on linear functions") {
    for (double alpha : {0.3, 0.7}) {
        const double T = 1.5;
        const int N = 60;
        const L1Weights w = make(alpha, T, N);
        std::vector<double> t(N + 1), rev(N + 1);
        for (int n = 0; n <= N; ++n) {
            t[n] = w.axis().time(n);
            rev[n] = T - t[n];
        }
        for (int n : {1, 5, 60}) {
            const double expect = std::pow(t[n], 1.0 - alpha) / std::tgamma(2.0 - alpha);
            const std::span<const double> hist(t.data(), static_cast<std::size_t>(n) + 1);
            CHECK(forward_caputo(w, hist) == doctest::Approx(expect).epsilon(1e-12));
            CHECK(forward_caputo_increment_form(w, hist) == doctest::Approx(expect).epsilon(1e-12));
        }
        for (int n : {0, 30, 59}) {
            const double expect = std::pow(T - t[n], 1.0 - alpha) / std::tgamma(2.0 - alpha);
            const std::span<const double> fut(rev.data() + n, static_cast<std::size_t>(N - n) + 1);
            CHECK(backward_caputo(w, fut) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("consistency order on t^2") {
    for (double alpha : {0.4, 0.8}) {
        std::vector<double> dts, errs;
        for (int N : {20, 40, 80, 160, 320}) {
            const L1Weights w = make(alpha, 1.0, N);
            std::vector<double> y(N + 1);
            for (int n = 0; n <= N; ++n) y[n] = std::pow(w.axis().time(n), 2);
            const double exact = 2.0 / std::tgamma(3.0 - alpha);
            dts.push_back(w.dt());
            errs.push_back(std::fabs(forward_caputo(w, y) - exact));
        }
        const double slope = std::log(errs.front() / errs.back()) / std::log(dts.front() / dts.back());
        CAPTURE(alpha);
        CHECK(std::fabs(slope - (2.0 - alpha)) <= 0.1);
    }
}

TEST_CASE("increment form equals the coefficient form") {
    Gen gen(5);
    TorusGrid g(1, 6);
    for (double alpha : {0.25, 0.6, 1.0}) {
        const L1Weights w = make(alpha, 1.0, 30);
        const auto seq = gen.fields(g, 31);
        for (std::size_t n = 1; n <= 30; n += 4) {
            const std::span<const GridFunction> hist(seq.data(), n + 1);
            const GridFunction a = forward_caputo(w, hist);
            const GridFunction b = forward_caputo_increment_form(w, hist);
            CHECK(norm_inf(a - b) <= 1e-11 * (1.0 + norm_inf(a)));
        }
    }
}

TEST_CASE("discrete integration by parts") {
    Gen gen(17);
    for (double alpha : {0.4, 0.6, 0.8, 1.0}) {
        for (int dim : {1, 2}) {
            TorusGrid g(dim, 8);
            const L1Weights w = make(alpha, 1.0, 12);
            for (int trial = 0; trial < 5; ++trial) {
                const auto u = gen.fields(g, 13);
                const auto m = gen.densities(g, 13);
                const IbpResidual r = discrete_ibp_residual(w, u, m);
                CHECK(r.relative() <= 1e-11);
                CHECK(r.scale > 0.0);
            }
        }
    }
    const L1Weights w = make(0.5, 1.0, 4);
    TorusGrid g(1, 4);
    CHECK_THROWS_AS(discrete_ibp_residual(w, Gen(1).fields(g, 4), Gen(2).fields(g, 5)), InvalidArgument);
}

TEST_CASE("barrier inequality") {
    for (double alpha : {0.1, 0.3, 0.5, 0.7, 0.85, 0.95}) {
        for (int N : {1, 2, 10, 100, 1000}) {
            for (double T : {0.1, 1.0, 5.0}) {
                CAPTURE(alpha);
                CAPTURE(N);
                CHECK(barrier_margin(make(alpha, T, N)) >= -1e-12);
            }
        }
    }
    CHECK(barrier_constant(1.0) == 0.0);
    CHECK(barrier_constant(0.5) == doctest::Approx(0.25 / std::tgamma(1.5)));
}

TEST_CASE("Mittag-Leffler oracle values") {
    CHECK(mittag_leffler(0.5, -1.0) == doctest::Approx(0.4275835761558070).epsilon(1e-13));
    CHECK(mittag_leffler(0.5, 0.0) == 1.0);
    CHECK(mittag_leffler(0.7, 0.0) == 1.0);
    for (double z : {-10.0, -2.0, -0.3, 0.0, 0.5, 3.0})
        CHECK(mittag_leffler(1.0, z) == doctest::Approx(std::exp(z)).epsilon(1e-12));

    Gen gen(3);
    for (int k = 0; k < 50; ++k) {
        const double x = gen.uniform(0.0, 5.0);
        const double neg = std::exp(x * x) * std::erfc(x);
        CHECK(mittag_leffler(0.5, -x) == doctest::Approx(neg).epsilon(1e-10));
        const double y = gen.uniform(0.0, 3.0);
        CHECK(mittag_leffler(0.5, y) == doctest::Approx(std::exp(y * y) * std::erfc(-y)).epsilon(1e-12));
    }
    // No jump where the evaluation switches from series to quadrature.
    for (double alpha : {0.3, 0.5, 0.9})
        CHECK(mittag_leffler(alpha, -1.0 - 1e-9) == doctest::Approx(mittag_leffler(alpha, -1.0 + 1e-9)).epsilon(1e-8));

    CHECK_THROWS_AS(mittag_leffler(0.5, 60.0), InvalidArgument);
    CHECK_THROWS_AS(mittag_leffler(0.0, 1.0), InvalidArgument);
}
