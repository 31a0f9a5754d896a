#pragma once

#include <array>
#include <memory>
#include <vector>

#include "tfmfg/grid.hpp"

namespace tfmfg {

/// Sparse operator on a TorusGrid with at most 2·dim + 1 entries per row: the
/// diagonal and one neighbour on each side along every axis (periodic).
struct StencilMatrix {
    explicit StencilMatrix(const TorusGrid& grid);

    TorusGrid grid;
    std::vector<double> diag;
    /// lower[a][p] multiplies W at p - e_a in row p; upper[a][p] multiplies W at p + e_a.
    std::array<std::vector<double>, 2> lower;
    std::array<std::vector<double>, 2> upper;

    GridFunction apply(const GridFunction& w) const;
    StencilMatrix transpose() const;
    /// Σ over non-diagonal entries of row p.
    double off_diagonal_sum(std::size_t p) const noexcept;
    /// Adds `s` to every diagonal entry.
    void shift_diagonal(double s) noexcept;
    /// Multiplies every entry by `s`.
    void scale(double s) noexcept;
};

/// Sparse LU factorization of a StencilMatrix (Eigen SparseLU). The sparsity
/// pattern is analysed once per grid and reused across factorizations.
class StencilSolver {
public:
    StencilSolver();
    ~StencilSolver();
    StencilSolver(StencilSolver&&) noexcept;
    StencilSolver& operator=(StencilSolver&&) noexcept;

    /// Throws SchemeError if the matrix is singular.
    void factorize(const StencilMatrix& a);
    GridFunction solve(const GridFunction& rhs) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace tfmfg
