#pragma once

#include <span>
#include <vector>

#include "tfmfg/grid.hpp"

namespace tfmfg {

/// [0, T] split into N steps of size dt = T / N.
class TimeAxis {
public:
    TimeAxis(double horizon, int steps);

    double horizon() const noexcept { return horizon_; }
    int steps() const noexcept { return steps_; }
    double dt() const noexcept { return horizon_ / steps_; }
    double time(int n) const noexcept { return n * dt(); }

    bool operator==(const TimeAxis&) const = default;

private:
    double horizon_;
    int steps_;
};

/// Caputo order α ∈ (0, 1]; α = 1 is the classical first derivative.
class FractionalOrder {
public:
    explicit FractionalOrder(double alpha);
    double value() const noexcept { return alpha_; }
    bool classical() const noexcept { return alpha_ == 1.0; }

private:
    double alpha_;
};

/// L1 coefficients for the forward and backward discrete Caputo derivatives.
///
/// Every coefficient is generated from the increments
///     d_j = (j+1)^{1-α} - j^{1-α},  j = 0..N,
/// with
///     c_0^n = d_{n-1},          c_k^n = d_{n-k-1} - d_{n-k}   (1 ≤ k ≤ n-1),
///     c̄_n^N = d_{N-n-1},        c̄_n^k = d_{k-n-1} - d_{k-n}   (n+1 ≤ k ≤ N-1),
/// which matches the closed forms term by term. The increments are evaluated
/// as j^{1-α} expm1((1-α) log1p(1/j)) so that second differences keep full
/// relative precision for large j. At α = 1 all increments but d_0 vanish and
/// the scheme reduces to backward Euler.
///
/// Storage is O(N): only the increment kernel is kept; rows are formed on
/// demand.
class L1Weights {
public:
    L1Weights(FractionalOrder alpha, TimeAxis axis);

    double alpha() const noexcept { return alpha_; }
    const TimeAxis& axis() const noexcept { return axis_; }
    int steps() const noexcept { return axis_.steps(); }
    double dt() const noexcept { return axis_.dt(); }
    /// ρ_α = Γ(2-α) dt^α
    double rho() const noexcept { return rho_; }

    /// c_k^n for 0 ≤ k < n ≤ N.
    double forward(int n, int k) const;
    /// c̄_n^k for 0 ≤ n < k ≤ N.
    double backward(int n, int k) const;
    /// b_k = dt^{1-α} / Γ(2-α) · d_k, 0 ≤ k ≤ N.
    double b(int k) const;
    /// d_j
    double increment(int j) const;

    /// [c_0^n, ..., c_{n-1}^n]
    std::vector<double> forward_row(int n) const;
    /// [c̄_n^{n+1}, ..., c̄_n^N]
    std::vector<double> backward_row(int n) const;

private:
    void verify() const;

    double alpha_;
    TimeAxis axis_;
    double rho_;
    double b_scale_;
    std::vector<double> increments_;  // d_0..d_N
    std::vector<double> interior_;    // interior_[d] = d_{d-1} - d_d, d = 1..N (index 0 unused)
};

/// (1/ρ)(Mⁿ - Σ_{k<n} c_k^n M^k) for history = M⁰..Mⁿ, n ≥ 1.
GridFunction forward_caputo(const L1Weights& w, std::span<const GridFunction> history);
double forward_caputo(const L1Weights& w, std::span<const double> history);

/// Σ_{k=0}^{n-1} b_k (M^{n-k} - M^{n-1-k}) / dt; algebraically the same operator.
GridFunction forward_caputo_increment_form(const L1Weights& w, std::span<const GridFunction> history);
double forward_caputo_increment_form(const L1Weights& w, std::span<const double> history);

/// (1/ρ)(Uⁿ - Σ_{k>n} c̄_n^k U^k) for future = Uⁿ..U^N, n = N - (future.size() - 1).
GridFunction backward_caputo(const L1Weights& w, std::span<const GridFunction> future);
double backward_caputo(const L1Weights& w, std::span<const double> future);

/// Both sides of the discrete fractional integration-by-parts identity
///   Σ_n (D̄Uⁿ, M^{n+1}) + (1/ρ) Σ_n c̄_n^N (U^N, M^{n+1})
/// = Σ_n (D M^{n+1}, Uⁿ) + (1/ρ) Σ_n c_0^{n+1} (M⁰, Uⁿ),   n = 0..N-1.
struct IbpResidual {
    double lhs;
    double rhs;
    /// Sum of the magnitudes of all terms; the natural scale for a relative test.
    double scale;

    double absolute() const noexcept;
    double relative() const noexcept;
};

IbpResidual discrete_ibp_residual(const L1Weights& w, std::span<const GridFunction> u_seq,
                                  std::span<const GridFunction> m_seq);

/// min_n D̄((N-n)dt)^α - α(1-α)/Γ(2-α) over n = 0..N-1; nonnegative when the
/// barrier inequality holds.
double barrier_margin(const L1Weights& w);
/// α(1-α)/Γ(2-α), the right-hand side of the barrier inequality.
double barrier_constant(double alpha);

/// E_α(z) = Σ z^k / Γ(1 + kα) for α ∈ (0, 1] and |z| ≤ 50.
///
/// Nonnegative z and moderate negative z use the power series (terminated
/// when the term ratio drops below 1e-14); for z < -1 the series cancels
/// catastrophically, so the Laplace-type integral
///   E_α(-x) = sin(απ)/(απ) ∫_0^∞ exp(-(s x)^{1/α}) / (s² + 2 s cos(απ) + 1) ds
/// is evaluated by adaptive quadrature instead. Throws InvalidArgument outside
/// the window and Error when the result overflows a double.
double mittag_leffler(double alpha, double z);

}  // namespace tfmfg
