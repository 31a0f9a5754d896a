#include "tfmfg/stencil.hpp"

#include <optional>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "tfmfg/error.hpp"

namespace tfmfg {

StencilMatrix::StencilMatrix(const TorusGrid& g) : grid(g), diag(g.size(), 0.0) {
    for (int a = 0; a < g.dim(); ++a) {
        lower[a].assign(g.size(), 0.0);
        upper[a].assign(g.size(), 0.0);
    }
}

GridFunction StencilMatrix::apply(const GridFunction& w) const {
    if (!(w.grid() == grid)) throw InvalidArgument("StencilMatrix::apply: grid mismatch");
    GridFunction out(grid);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        double acc = diag[p] * w[p];
        for (int a = 0; a < grid.dim(); ++a)
            acc += lower[a][p] * w[grid.shift(p, a, -1)] + upper[a][p] * w[grid.shift(p, a, 1)];
        out[p] = acc;
    }
    return out;
}

StencilMatrix StencilMatrix::transpose() const {
    StencilMatrix t(grid);
    t.diag = diag;
    for (int a = 0; a < grid.dim(); ++a) {
        for (std::size_t q = 0; q < grid.size(); ++q) {
            t.upper[a][q] = lower[a][grid.shift(q, a, 1)];
            t.lower[a][q] = upper[a][grid.shift(q, a, -1)];
        }
    }
    return t;
}

double StencilMatrix::off_diagonal_sum(std::size_t p) const noexcept {
    double s = 0.0;
    for (int a = 0; a < grid.dim(); ++a) s += lower[a][p] + upper[a][p];
    return s;
}

void StencilMatrix::shift_diagonal(double s) noexcept {
    for (double& d : diag) d += s;
}

void StencilMatrix::scale(double s) noexcept {
    for (double& d : diag) d *= s;
    for (int a = 0; a < grid.dim(); ++a) {
        for (double& v : lower[a]) v *= s;
        for (double& v : upper[a]) v *= s;
    }
}

struct StencilSolver::Impl {
    using Matrix = Eigen::SparseMatrix<double>;
    std::optional<TorusGrid> grid;
    Matrix matrix;
    Eigen::SparseLU<Matrix, Eigen::COLAMDOrdering<int>> lu;
};

StencilSolver::StencilSolver() : impl_(std::make_unique<Impl>()) {}
StencilSolver::~StencilSolver() = default;
StencilSolver::StencilSolver(StencilSolver&&) noexcept = default;
StencilSolver& StencilSolver::operator=(StencilSolver&&) noexcept = default;

void StencilSolver::factorize(const StencilMatrix& a) {
    const TorusGrid& g = a.grid;
    const auto n = static_cast<Eigen::Index>(g.size());
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(g.size() * (1 + 2 * static_cast<std::size_t>(g.dim())));
    for (std::size_t p = 0; p < g.size(); ++p) {
        const auto row = static_cast<int>(p);
        triplets.emplace_back(row, row, a.diag[p]);
        for (int ax = 0; ax < g.dim(); ++ax) {
            triplets.emplace_back(row, static_cast<int>(g.shift(p, ax, -1)), a.lower[ax][p]);
            triplets.emplace_back(row, static_cast<int>(g.shift(p, ax, 1)), a.upper[ax][p]);
        }
    }
    // Explicit zeros are kept so the pattern is identical across calls.
    impl_->matrix.resize(n, n);
    impl_->matrix.setFromTriplets(triplets.begin(), triplets.end());
    impl_->matrix.makeCompressed();
    if (!impl_->grid || !(*impl_->grid == g)) {
        impl_->lu.analyzePattern(impl_->matrix);
        impl_->grid = g;
    }
    impl_->lu.factorize(impl_->matrix);
    if (impl_->lu.info() != Eigen::Success) throw SchemeError("StencilSolver: singular matrix");
}

GridFunction StencilSolver::solve(const GridFunction& rhs) const {
    if (!impl_->grid || !(*impl_->grid == rhs.grid())) throw InvalidArgument("StencilSolver::solve: not factorized for this grid");
    const auto n = static_cast<Eigen::Index>(rhs.size());
    Eigen::Map<const Eigen::VectorXd> b(rhs.data(), n);
    Eigen::VectorXd x = impl_->lu.solve(b);
    if (impl_->lu.info() != Eigen::Success) throw SchemeError("StencilSolver: solve failed");
    return GridFunction(rhs.grid(), std::vector<double>(x.data(), x.data() + n));
}

}  // namespace tfmfg
