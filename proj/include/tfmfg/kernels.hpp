#pragma once

// Data-parallel inner loops shared by the grid operators and the two sweeps.
//
// Every kernel has a portable scalar reference implementation. On x86-64 an
// AVX2 variant is compiled into a separate translation unit and selected at
// runtime when the CPU reports AVX2 support. The elementwise kernels
// (axpby, weighted_accumulate) use the same operation order in both variants
// and no fused multiply-add, so they produce bit-identical results; the
// reductions (dot, sum) differ only in summation order.

#include <cstddef>
#include <span>
#include <string_view>

namespace tfmfg::kernels {

struct KernelTable {
    std::string_view name;
    /// Σ x_i y_i
    double (*dot)(const double* x, const double* y, std::size_t n);
    /// Σ x_i
    double (*sum)(const double* x, std::size_t n);
    /// max |x_i| (0 for n = 0)
    double (*max_abs)(const double* x, std::size_t n);
    /// y_i = a x_i + b y_i
    void (*axpby)(double a, const double* x, double b, double* y, std::size_t n);
    /// out_i = Σ_k w_k rows[k][i], accumulated in increasing k starting from 0.
    void (*weighted_accumulate)(const double* w, const double* const* rows, std::size_t n_rows,
                                double* out, std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;

/// Nullptr when the AVX2 variant is not compiled in or not supported by this CPU.
const KernelTable* avx2_kernels() noexcept;

/// Kernel table used by the library. Chosen once: AVX2 when available, scalar
/// otherwise. Setting the environment variable TFMFG_KERNELS=scalar forces the
/// reference path.
const KernelTable& active() noexcept;

inline double dot(std::span<const double> x, std::span<const double> y) {
    return active().dot(x.data(), y.data(), x.size());
}
inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }
inline double max_abs(std::span<const double> x) { return active().max_abs(x.data(), x.size()); }
inline void axpby(double a, std::span<const double> x, double b, std::span<double> y) {
    active().axpby(a, x.data(), b, y.data(), y.size());
}
inline void weighted_accumulate(std::span<const double> w, std::span<const double* const> rows,
                                std::span<double> out) {
    active().weighted_accumulate(w.data(), rows.data(), rows.size(), out.data(), out.size());
}

}  // namespace tfmfg::kernels
