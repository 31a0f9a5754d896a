#include "tfmfg/caputo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "tfmfg/error.hpp"
#include "tfmfg/kernels.hpp"

namespace tfmfg {

TimeAxis::TimeAxis(double horizon, int steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("TimeAxis: horizon must be positive");
    if (steps < 1) throw InvalidArgument("TimeAxis: need at least one step");
}

FractionalOrder::FractionalOrder(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("FractionalOrder: alpha must lie in (0, 1]");
}

namespace {

double l1_increment(int j, double beta) {
    if (j == 0) return 1.0;
    const double x = static_cast<double>(j);
    return std::pow(x, beta) * std::expm1(beta * std::log1p(1.0 / x));
}

}  // namespace

L1Weights::L1Weights(FractionalOrder alpha, TimeAxis axis)
    : alpha_(alpha.value()), axis_(axis), rho_(0.0), b_scale_(0.0) {
    const int N = axis_.steps();
    const double beta = 1.0 - alpha_;
    const double gamma = std::tgamma(2.0 - alpha_);
    rho_ = gamma * std::pow(axis_.dt(), alpha_);
    b_scale_ = std::pow(axis_.dt(), beta) / gamma;

    increments_.resize(static_cast<std::size_t>(N) + 1);
    for (int j = 0; j <= N; ++j) increments_[j] = l1_increment(j, beta);
    interior_.assign(static_cast<std::size_t>(N) + 1, 0.0);
    for (int d = 1; d <= N; ++d) interior_[d] = increments_[d - 1] - increments_[d];
    verify();
}

void L1Weights::verify() const {
    const int N = axis_.steps();
    const bool strict = alpha_ < 1.0;
    for (int d = 0; d < N; ++d) {
        const double c = increments_[d];
        if (strict ? !(c > 0.0) : !(c >= 0.0)) throw Error("L1Weights: non-positive increment");
    }
    for (int d = 1; d < N; ++d) {
        const double c = interior_[d];
        if (strict ? !(c > 0.0) : !(c >= 0.0)) throw Error("L1Weights: non-positive coefficient");
    }
    // Σ_k c_k^n = d_{n-1} + Σ_{m=1}^{n-1} (d_{m-1} - d_m); the backward sums are
    // the same sums with n replaced by N - n.
    double partial = 0.0;
    for (int n = 1; n <= N; ++n) {
        if (n > 1) partial += interior_[n - 1];
        const double total = increments_[n - 1] + partial;
        if (std::fabs(total - 1.0) > 1e-13)
            throw Error("L1Weights: coefficients do not sum to one at n = " + std::to_string(n));
    }
}

double L1Weights::forward(int n, int k) const {
    if (n < 1 || n > steps() || k < 0 || k >= n) throw InvalidArgument("L1Weights::forward: index out of range");
    return k == 0 ? increments_[n - 1] : interior_[n - k];
}

double L1Weights::backward(int n, int k) const {
    const int N = steps();
    if (n < 0 || k <= n || k > N) throw InvalidArgument("L1Weights::backward: index out of range");
    return k == N ? increments_[N - n - 1] : interior_[k - n];
}

double L1Weights::b(int k) const { return b_scale_ * increment(k); }

double L1Weights::increment(int j) const {
    if (j < 0 || j > steps()) throw InvalidArgument("L1Weights::increment: index out of range");
    return increments_[j];
}

std::vector<double> L1Weights::forward_row(int n) const {
    if (n < 1 || n > steps()) throw InvalidArgument("L1Weights::forward_row: index out of range");
    std::vector<double> row(static_cast<std::size_t>(n));
    row[0] = increments_[n - 1];
    for (int k = 1; k < n; ++k) row[k] = interior_[n - k];
    return row;
}

std::vector<double> L1Weights::backward_row(int n) const {
    const int N = steps();
    if (n < 0 || n >= N) throw InvalidArgument("L1Weights::backward_row: index out of range");
    std::vector<double> row(static_cast<std::size_t>(N - n));
    for (int k = n + 1; k < N; ++k) row[k - n - 1] = interior_[k - n];
    row[N - n - 1] = increments_[N - n - 1];
    return row;
}

namespace {

void require_common_grid(std::span<const GridFunction> seq) {
    for (const auto& f : seq) require_same_grid(seq.front(), f);
}

// out = (last - Σ row_k rows_k) / ρ
GridFunction memory_difference(const L1Weights& w, const GridFunction& last, std::span<const double> row,
                               std::span<const GridFunction> others) {
    std::vector<const double*> ptrs(others.size());
    for (std::size_t k = 0; k < others.size(); ++k) ptrs[k] = others[k].data();
    GridFunction out(last.grid());
    kernels::weighted_accumulate(row, ptrs, out.values());
    kernels::axpby(1.0 / w.rho(), last.values(), -1.0 / w.rho(), out.values());
    return out;
}

}  // namespace

GridFunction forward_caputo(const L1Weights& w, std::span<const GridFunction> history) {
    if (history.size() < 2) throw InvalidArgument("forward_caputo: history needs at least two entries");
    const int n = static_cast<int>(history.size()) - 1;
    if (n > w.steps()) throw InvalidArgument("forward_caputo: history longer than the time axis");
    require_common_grid(history);
    const auto row = w.forward_row(n);
    return memory_difference(w, history.back(), row, history.first(static_cast<std::size_t>(n)));
}

double forward_caputo(const L1Weights& w, std::span<const double> history) {
    if (history.size() < 2) throw InvalidArgument("forward_caputo: history needs at least two entries");
    const int n = static_cast<int>(history.size()) - 1;
    if (n > w.steps()) throw InvalidArgument("forward_caputo: history longer than the time axis");
    const auto row = w.forward_row(n);
    double acc = 0.0;
    for (int k = 0; k < n; ++k) acc += row[k] * history[k];
    return (history[n] - acc) / w.rho();
}

GridFunction forward_caputo_increment_form(const L1Weights& w, std::span<const GridFunction> history) {
    if (history.size() < 2) throw InvalidArgument("forward_caputo_increment_form: history too short");
    const int n = static_cast<int>(history.size()) - 1;
    if (n > w.steps()) throw InvalidArgument("forward_caputo_increment_form: history longer than the time axis");
    require_common_grid(history);
    GridFunction out(history.front().grid());
    for (int k = 0; k < n; ++k) {
        const double c = w.b(k) / w.dt();
        kernels::axpby(c, history[n - k].values(), 1.0, out.values());
        kernels::axpby(-c, history[n - 1 - k].values(), 1.0, out.values());
    }
    return out;
}

double forward_caputo_increment_form(const L1Weights& w, std::span<const double> history) {
    if (history.size() < 2) throw InvalidArgument("forward_caputo_increment_form: history too short");
    const int n = static_cast<int>(history.size()) - 1;
    if (n > w.steps()) throw InvalidArgument("forward_caputo_increment_form: history longer than the time axis");
    double acc = 0.0;
    for (int k = 0; k < n; ++k) acc += w.b(k) * (history[n - k] - history[n - 1 - k]) / w.dt();
    return acc;
}

GridFunction backward_caputo(const L1Weights& w, std::span<const GridFunction> future) {
    if (future.size() < 2) throw InvalidArgument("backward_caputo: future needs at least two entries");
    const int len = static_cast<int>(future.size()) - 1;
    if (len > w.steps()) throw InvalidArgument("backward_caputo: sequence longer than the time axis");
    require_common_grid(future);
    const int n = w.steps() - len;
    const auto row = w.backward_row(n);
    return memory_difference(w, future.front(), row, future.subspan(1));
}

double backward_caputo(const L1Weights& w, std::span<const double> future) {
    if (future.size() < 2) throw InvalidArgument("backward_caputo: future needs at least two entries");
    const int len = static_cast<int>(future.size()) - 1;
    if (len > w.steps()) throw InvalidArgument("backward_caputo: sequence longer than the time axis");
    const int n = w.steps() - len;
    const auto row = w.backward_row(n);
    double acc = 0.0;
    for (int k = 0; k < len; ++k) acc += row[k] * future[k + 1];
    return (future[0] - acc) / w.rho();
}

double IbpResidual::absolute() const noexcept { return std::fabs(lhs - rhs); }

double IbpResidual::relative() const noexcept {
    return scale > 0.0 ? absolute() / scale : absolute();
}

IbpResidual discrete_ibp_residual(const L1Weights& w, std::span<const GridFunction> u_seq,
                                  std::span<const GridFunction> m_seq) {
    const int N = w.steps();
    if (static_cast<int>(u_seq.size()) != N + 1 || static_cast<int>(m_seq.size()) != N + 1)
        throw InvalidArgument("discrete_ibp_residual: both sequences need N + 1 entries");
    require_common_grid(u_seq);
    require_common_grid(m_seq);
    require_same_grid(u_seq.front(), m_seq.front());

    IbpResidual r{0.0, 0.0, 0.0};
    const double inv_rho = 1.0 / w.rho();
    for (int n = 0; n < N; ++n) {
        const GridFunction dbar_u = backward_caputo(w, u_seq.subspan(static_cast<std::size_t>(n)));
        const GridFunction d_m = forward_caputo(w, m_seq.first(static_cast<std::size_t>(n) + 2));
        const double l1 = inner_product(dbar_u, m_seq[n + 1]);
        const double l2 = inv_rho * w.backward(n, N) * inner_product(u_seq[N], m_seq[n + 1]);
        const double r1 = inner_product(d_m, u_seq[n]);
        const double r2 = inv_rho * w.forward(n + 1, 0) * inner_product(m_seq[0], u_seq[n]);
        r.lhs += l1 + l2;
        r.rhs += r1 + r2;
        r.scale += std::fabs(l1) + std::fabs(l2) + std::fabs(r1) + std::fabs(r2);
    }
    return r;
}

double barrier_constant(double alpha) { return alpha * (1.0 - alpha) / std::tgamma(2.0 - alpha); }

double barrier_margin(const L1Weights& w) {
    const int N = w.steps();
    std::vector<double> profile(static_cast<std::size_t>(N) + 1);
    for (int k = 0; k <= N; ++k) profile[k] = std::pow((N - k) * w.dt(), w.alpha());
    double worst = std::numeric_limits<double>::infinity();
    for (int n = 0; n < N; ++n)
        worst = std::min(worst, backward_caputo(w, std::span<const double>(profile).subspan(static_cast<std::size_t>(n))));
    return worst - barrier_constant(w.alpha());
}

namespace {

double mittag_leffler_series(double alpha, double z) {
    if (z == 0.0) return 1.0;
    const double log_abs = std::log(std::fabs(z));
    const bool negative = z < 0.0;
    double sum = 1.0;
    double prev = 1.0;
    for (int k = 1; k < 100000; ++k) {
        const double mag = std::exp(k * log_abs - std::lgamma(1.0 + k * alpha));
        const double term = (negative && (k % 2 == 1)) ? -mag : mag;
        sum += term;
        if (!std::isfinite(sum)) throw Error("mittag_leffler: result overflows a double");
        if (mag < prev && mag <= 1e-14 * std::fabs(sum)) return sum;
        prev = mag;
    }
    throw Error("mittag_leffler: series did not terminate");
}

double mittag_leffler_negative(double alpha, double x) {
    using boost::math::quadrature::gauss_kronrod;
    const double pi = std::numbers::pi;
    const double c = std::cos(alpha * pi);
    const double inv_alpha = 1.0 / alpha;
    auto f = [&](double s) {
        const double e = std::exp(-std::pow(s * x, inv_alpha));
        return e / (s * s + 2.0 * s * c + 1.0);
    };
    // The denominator is smallest at s = -cos(απ); split there when it lies inside (0, ∞).
    const double split = c < 0.0 ? -c : 1.0;
    double err = 0.0;
    const double left = gauss_kronrod<double, 61>::integrate(f, 0.0, split, 20, 1e-15, &err);
    const double right =
        gauss_kronrod<double, 61>::integrate(f, split, std::numeric_limits<double>::infinity(), 20, 1e-15, &err);
    return std::sin(alpha * pi) / (alpha * pi) * (left + right);
}

}  // namespace

double mittag_leffler(double alpha, double z) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("mittag_leffler: alpha must lie in (0, 1]");
    if (!(std::fabs(z) <= 50.0)) throw InvalidArgument("mittag_leffler: |z| must not exceed 50");
    if (alpha == 1.0) return std::exp(z);
    if (z >= -1.0) return mittag_leffler_series(alpha, z);
    return mittag_leffler_negative(alpha, -z);
}

}  // namespace tfmfg
