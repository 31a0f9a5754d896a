#include "tfmfg/kernels.hpp"

#include <cmath>

namespace tfmfg::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double max_abs_scalar(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::fabs(x[i]);
        if (a > m) m = a;
    }
    return m;
}

void axpby_scalar(double a, const double* x, double b, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void weighted_accumulate_scalar(const double* w, const double* const* rows, std::size_t n_rows,
                                double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n_rows; ++k) acc += w[k] * rows[k][i];
        out[i] = acc;
    }
}

}  // namespace

const KernelTable& scalar_kernels() noexcept {
    static const KernelTable table{"scalar",        dot_scalar,   sum_scalar, max_abs_scalar,
                                   axpby_scalar,    weighted_accumulate_scalar};
    return table;
}

}  // namespace tfmfg::kernels
