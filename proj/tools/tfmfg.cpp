#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tfmfg/error.hpp"
#include "tfmfg/experiments.hpp"

namespace {

using tfmfg::ExperimentConfig;

int run_runs(const ExperimentConfig& config) {
    const tfmfg::RunRecord rec = tfmfg::run_test(config);
    for (const auto& r : rec.runs) {
        std::printf("alpha=%-5s ", tfmfg::format_double(r.alpha).c_str());
        if (!r.error.empty()) {
            std::printf("FAILED: %s\n", r.error.c_str());
            continue;
        }
        std::printf("iterations=%d residual=%.3e converged=%s mass_dev=%.3e min=%.3e time=%.2fs\n",
                    r.solution.iterations, r.solution.residual, r.solution.converged ? "yes" : "no",
                    r.mass.max_deviation, r.mass.global_min, r.wall_seconds);
        for (const auto& f : r.files) std::printf("  %s\n", f.string().c_str());
    }
    return rec.ok() ? 0 : 1;
}

int run_temporal(const ExperimentConfig& config) {
    const std::vector<double> dts{1.0 / 40, 1.0 / 80, 1.0 / 160, 1.0 / 320, 1.0 / 640};
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (double alpha : config.alphas) {
        const auto s = tfmfg::temporal_order_study(alpha, dts);
        std::printf("alpha=%-5s slope=%.4f expected=%.4f\n", tfmfg::format_double(alpha).c_str(), s.slope,
                    2.0 - alpha);
        for (std::size_t k = 0; k < s.dts.size(); ++k) std::printf("  dt=%-10.6g error=%.6e\n", s.dts[k], s.errors[k]);
        out.push_back({{"alpha", alpha}, {"dt", s.dts}, {"error", s.errors}, {"slope", s.slope}});
    }
    std::filesystem::create_directories(config.out_dir);
    std::ofstream(config.out_dir / "temporal_order.json", std::ios::binary) << out.dump(2) << '\n';
    return 0;
}

int run_self(const ExperimentConfig& config) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    bool ok = true;
    for (double alpha : config.alphas) {
        const auto s = tfmfg::self_convergence_study(config, alpha);
        std::printf("alpha=%-5s monotone=%s\n", tfmfg::format_double(alpha).c_str(), s.monotone() ? "yes" : "no");
        for (std::size_t k = 0; k < s.diff_m.size(); ++k)
            std::printf("  levels %zu->%zu  m: %.6e  u: %.6e\n", k, k + 1, s.diff_m[k], s.diff_u[k]);
        ok = ok && s.monotone();
        out.push_back({{"alpha", alpha},
                       {"n_h", s.n_h},
                       {"n_t", s.n_t},
                       {"diff_m", s.diff_m},
                       {"diff_u", s.diff_u},
                       {"monotone", s.monotone()}});
    }
    std::filesystem::create_directories(config.out_dir);
    std::ofstream(config.out_dir / "self_convergence.json", std::ios::binary) << out.dump(2) << '\n';
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-fractional mean field game solver on the periodic torus"};
    std::optional<int> test;
    std::optional<std::string> config_file, study, out;
    std::vector<double> alphas;
    std::optional<double> sigma, lambda, beta, scale, horizon, theta, fp_tol;
    std::optional<int> nh, nt, dim, fp_max, anderson;
    bool full = false;

    app.add_option("--test", test, "Preset 1, 2 or 3")->check(CLI::Range(1, 3));
    app.add_option("--config", config_file, "key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--alpha", alphas, "Fractional orders (comma separated)")->delimiter(',');
    app.add_option("--sigma", sigma, "Diffusion coefficient");
    app.add_option("--lambda", lambda, "Density penalization");
    app.add_option("--beta", beta, "Hamiltonian exponent");
    app.add_option("--scale", scale, "Hamiltonian scale s in s|p|^beta");
    app.add_option("--dim", dim, "Spatial dimension (1 or 2)");
    app.add_option("--nh", nh, "Cells per axis");
    app.add_option("--nt", nt, "Time steps");
    app.add_option("--T", horizon, "Final time");
    app.add_option("--theta", theta, "Fixed-point damping");
    app.add_option("--fp-tol", fp_tol, "Fixed-point tolerance");
    app.add_option("--fp-max", fp_max, "Fixed-point iteration cap");
    app.add_option("--anderson", anderson, "Anderson history length (0 = plain damping)");
    app.add_option("--out", out, "Output directory");
    app.add_option("--study", study, "Run a study instead: temporal or self")
        ->check(CLI::IsMember({"temporal", "self"}));
    app.add_flag("--full", full, "Use N = 2000 time steps for the presets");
    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig config;
        config.full = full;
        if (test) config = ExperimentConfig::preset(*test, full);
        if (config_file) tfmfg::load_config_file(config, *config_file);
        if (!alphas.empty()) config.alphas = alphas;
        if (sigma) config.sigma = *sigma;
        if (lambda) config.lambda = *lambda;
        if (beta) config.beta = *beta;
        if (scale) config.scale = *scale;
        if (dim) config.dim = *dim;
        if (nh) config.n_h = *nh;
        if (nt) config.n_t = *nt;
        if (horizon) config.horizon = *horizon;
        if (theta) config.solver.theta = *theta;
        if (fp_tol) config.solver.fp_tol = *fp_tol;
        if (fp_max) config.solver.fp_max = *fp_max;
        if (anderson) config.solver.anderson_depth = *anderson;
        if (out) config.out_dir = *out;
        if (study) config.study = *study;
        config.validate();

        if (config.study == "temporal") return run_temporal(config);
        if (config.study == "self") return run_self(config);
        return run_runs(config);
    } catch (const tfmfg::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
