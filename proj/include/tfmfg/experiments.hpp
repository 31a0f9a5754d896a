#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tfmfg/fp.hpp"
#include "tfmfg/hjb.hpp"
#include "tfmfg/mfg.hpp"

namespace tfmfg {

/// Parameters of one experiment: either one of the three 1D presets or a custom block.
///
/// All presets share T = 2, u_T = 0, m₀ ∝ exp(-(x - 0.5)² / 0.1²), the
/// quadratic Hamiltonian p²/2 and the running cost 5(x - (1 - sin 2πt)/2)² + λm:
///   test 1: σ = 0,   λ = 0
///   test 2: σ = 0.1, λ = 0
///   test 3: σ = 0,   λ = 1
/// with α ∈ {1, 0.85, 0.7}, N_h = 50 and N = 200 (N = 2000 with `full`).
/// Presets iterate with θ = 0.02, Anderson depth 30 and at most 1000 iterations.
struct ExperimentConfig {
    int test = 0;  // 0 = custom
    std::vector<double> alphas{1.0};
    double sigma = 0.0;
    double lambda = 0.0;
    double beta = 2.0;
    double scale = 0.5;
    int dim = 1;
    int n_h = 50;
    int n_t = 200;
    double horizon = 2.0;
    std::filesystem::path out_dir = "out";
    std::string study;  // "", "temporal" or "self"
    bool full = false;
    SolverConfig solver;

    static ExperimentConfig preset(int test, bool full = false);
    /// Throws InvalidArgument when the parameters cannot form an MfgProblem.
    void validate() const;
};

/// Applies one `key = value` assignment. Keys: test, alpha (comma list),
/// sigma, lambda, beta, scale, dim, nh, nt, T, out, study, full, newton_tol,
/// newton_max, fp_tol, fp_max, theta, anderson_depth. Throws InvalidArgument on an unknown
/// key or a malformed value.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Reads a flat key-value file ('#' starts a comment, blank lines ignored)
/// into `config`. A `test` key loads that preset before the remaining keys
/// are applied, wherever it appears in the file.
void load_config_file(ExperimentConfig& config, const std::filesystem::path& path);

MfgProblem build_problem(const ExperimentConfig& config, double alpha);

struct RunResult {
    double alpha = 1.0;
    MfgSolution solution;
    MassReport mass;
    double conservation = 0.0;
    double hjb_residual = 0.0;
    double lipschitz_max = 0.0;
    double wall_seconds = 0.0;
    std::vector<std::filesystem::path> files;
    std::string error;  // nonempty when the solve threw

    bool ok() const noexcept { return error.empty() && solution.converged && mass.ok(); }
};

struct RunRecord {
    ExperimentConfig config;
    std::vector<RunResult> runs;

    bool ok() const noexcept;
};

/// Solves the problem once per α, concurrently, and when `write_files` is set
/// exports each run to out_dir/alpha_<α>/.
RunRecord run_test(const ExperimentConfig& config, bool write_files = true);

/// Writes density.csv (t,x,m), value.csv (t,x,u) and summary.json into `dir`
/// and returns the written paths. 2D grids get an extra `y` column. Numbers use
/// the shortest round-trip decimal form.
std::vector<std::filesystem::path> export_csv(const RunResult& run, const ExperimentConfig& config,
                                              const MfgProblem& problem, const std::filesystem::path& dir);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

struct OrderStudy {
    double alpha = 1.0;
    std::vector<double> dts;
    std::vector<double> errors;
    double slope = 0.0;
};

/// L1 scheme for D^α y = -y, y(0) = 1 on [0, 1] with each dt (1/dt must be an
/// integer), compared against E_α(-1); the slope is the least-squares fit of
/// log error against log dt.
OrderStudy temporal_order_study(double alpha, std::span<const double> dts);

/// Least-squares slope of log y against log x.
double log_log_slope(std::span<const double> x, std::span<const double> y);

struct SelfConvergenceStudy {
    double alpha = 1.0;
    std::vector<int> n_h;
    std::vector<int> n_t;
    /// Successive differences between level k and k+1 (the coarse solution
    /// interpolated onto the fine grid): sup_n ‖·‖_{L²} for m and the
    /// space-time L^β norm of the discrete gradient for u.
    std::vector<double> diff_m;
    std::vector<double> diff_u;
    std::vector<bool> converged;

    bool monotone() const noexcept;
};

/// Solves at (n_h, n_t) · 2^k for k = 0..levels-1 and compares successive levels.
SelfConvergenceStudy self_convergence_study(const ExperimentConfig& config, double alpha, int levels = 3);

/// Piecewise-linear space-time interpolation of a trajectory onto a grid and
/// axis refined by a factor of two in every direction.
std::vector<GridFunction> refine_trajectory(std::span<const GridFunction> coarse, const TorusGrid& fine);

}  // namespace tfmfg
