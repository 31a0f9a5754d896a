#pragma once

// Seeded generators for the property tests. Everything is driven by a single
// mt19937_64 so a failing case can be replayed from its seed.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "tfmfg/grid.hpp"

namespace tfmfg::testing {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }

    /// Smooth-ish random field: a few random Fourier modes plus white noise.
    GridFunction field(const TorusGrid& g, double amplitude = 1.0, double noise = 0.1) {
        const int modes = integer(1, 3);
        std::vector<double> a(static_cast<std::size_t>(modes)), k1(a.size()), k2(a.size()), ph(a.size());
        for (std::size_t m = 0; m < a.size(); ++m) {
            a[m] = amplitude * uniform(-1.0, 1.0);
            k1[m] = integer(0, 3);
            k2[m] = g.dim() == 2 ? integer(0, 3) : 0;
            ph[m] = uniform(0.0, 2.0 * M_PI);
        }
        GridFunction out(g);
        for (std::size_t p = 0; p < g.size(); ++p) {
            const auto x = g.coordinates(p);
            double v = amplitude * noise * uniform(-1.0, 1.0);
            for (std::size_t m = 0; m < a.size(); ++m)
                v += a[m] * std::cos(2.0 * M_PI * (k1[m] * x[0] + k2[m] * x[1]) + ph[m]);
            out[p] = v;
        }
        return out;
    }

    /// Strictly positive field with unit discrete mass.
    GridFunction density(const TorusGrid& g, double floor = 0.05) {
        GridFunction m(g);
        for (std::size_t p = 0; p < g.size(); ++p) m[p] = floor + uniform(0.0, 1.0);
        m *= 1.0 / mass(m);
        return m;
    }

    /// Nonnegative field including exact zeros.
    GridFunction nonnegative(const TorusGrid& g) {
        GridFunction m(g);
        for (std::size_t p = 0; p < g.size(); ++p) m[p] = uniform(0.0, 1.0) < 0.2 ? 0.0 : uniform(0.0, 2.0);
        return m;
    }

    std::vector<GridFunction> fields(const TorusGrid& g, std::size_t count, double amplitude = 1.0) {
        std::vector<GridFunction> out;
        out.reserve(count);
        for (std::size_t k = 0; k < count; ++k) out.push_back(field(g, amplitude));
        return out;
    }

    std::vector<GridFunction> densities(const TorusGrid& g, std::size_t count) {
        std::vector<GridFunction> out;
        out.reserve(count);
        for (std::size_t k = 0; k < count; ++k) out.push_back(density(g));
        return out;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

inline double max_abs_diff(const GridFunction& a, const GridFunction& b) { return norm_inf(a - b); }

}  // namespace tfmfg::testing
