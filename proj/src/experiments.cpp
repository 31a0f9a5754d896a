#include "tfmfg/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tfmfg/error.hpp"

namespace tfmfg {

ExperimentConfig ExperimentConfig::preset(int test, bool full) {
    if (test < 1 || test > 3) throw InvalidArgument("preset: test must be 1, 2 or 3");
    ExperimentConfig c;
    c.test = test;
    c.alphas = {1.0, 0.85, 0.7};
    c.sigma = test == 2 ? 0.1 : 0.0;
    c.lambda = test == 3 ? 1.0 : 0.0;
    c.n_h = 50;
    c.full = full;
    c.n_t = full ? 2000 : 200;
    c.horizon = 2.0;
    c.out_dir = "out/test" + std::to_string(test);
    // Without diffusion the coupled density collapses onto a few cells and
    // plain damping at θ = 0.5 cycles; small damping plus Anderson mixing converges.
    c.solver.theta = 0.02;
    c.solver.anderson_depth = 30;
    c.solver.fp_max = 1000;
    return c;
}

void ExperimentConfig::validate() const {
    if (alphas.empty()) throw InvalidArgument("config: alpha list is empty");
    for (double a : alphas)
        if (!(a > 0.0 && a <= 1.0)) throw InvalidArgument("config: alpha values must lie in (0, 1]");
    if (!(sigma >= 0.0)) throw InvalidArgument("config: sigma must be nonnegative");
    if (!(lambda >= 0.0)) throw InvalidArgument("config: lambda must be nonnegative");
    if (!(beta >= 2.0)) throw InvalidArgument("config: beta must be at least 2");
    if (!(scale > 0.0)) throw InvalidArgument("config: scale must be positive");
    if (dim != 1 && dim != 2) throw InvalidArgument("config: dim must be 1 or 2");
    if (n_h < 2) throw InvalidArgument("config: nh must be at least 2");
    if (n_t < 1) throw InvalidArgument("config: nt must be at least 1");
    if (!(horizon > 0.0)) throw InvalidArgument("config: T must be positive");
    if (!study.empty() && study != "temporal" && study != "self")
        throw InvalidArgument("config: study must be 'temporal' or 'self'");
    solver.validate();
}

namespace {

double parse_double(const std::string& key, const std::string& value) {
    double v = 0.0;
    const char* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc() || ptr != end) throw InvalidArgument("config: bad number for '" + key + "': " + value);
    return v;
}

int parse_int(const std::string& key, const std::string& value) {
    int v = 0;
    const char* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc() || ptr != end) throw InvalidArgument("config: bad integer for '" + key + "': " + value);
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
    if (value == "0" || value == "false" || value == "no" || value == "off") return false;
    throw InvalidArgument("config: bad boolean for '" + key + "': " + value);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    if (key == "test") {
        const int t = parse_int(key, value);
        if (t == 0) {
            c.test = 0;
        } else {
            const std::string study = c.study;
            c = ExperimentConfig::preset(t, c.full);
            c.study = study;
        }
    } else if (key == "alpha") {
        c.alphas.clear();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) c.alphas.push_back(parse_double(key, trim(item)));
    } else if (key == "sigma") {
        c.sigma = parse_double(key, value);
    } else if (key == "lambda") {
        c.lambda = parse_double(key, value);
    } else if (key == "beta") {
        c.beta = parse_double(key, value);
    } else if (key == "scale") {
        c.scale = parse_double(key, value);
    } else if (key == "dim") {
        c.dim = parse_int(key, value);
    } else if (key == "nh") {
        c.n_h = parse_int(key, value);
    } else if (key == "nt") {
        c.n_t = parse_int(key, value);
    } else if (key == "T") {
        c.horizon = parse_double(key, value);
    } else if (key == "out") {
        c.out_dir = value;
    } else if (key == "study") {
        c.study = value;
    } else if (key == "full") {
        c.full = parse_bool(key, value);
        if (c.full && c.test != 0) c.n_t = 2000;
    } else if (key == "newton_tol") {
        c.solver.newton_tol = parse_double(key, value);
    } else if (key == "newton_max") {
        c.solver.newton_max = parse_int(key, value);
    } else if (key == "fp_tol") {
        c.solver.fp_tol = parse_double(key, value);
    } else if (key == "fp_max") {
        c.solver.fp_max = parse_int(key, value);
    } else if (key == "theta") {
        c.solver.theta = parse_double(key, value);
    } else if (key == "anderson_depth") {
        c.solver.anderson_depth = parse_int(key, value);
    } else {
        throw InvalidArgument("config: unknown key '" + key + "'");
    }
}

void load_config_file(ExperimentConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("config: cannot open " + path.string());
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument("config: " + path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    // Presets first so explicit keys override them regardless of order.
    std::stable_partition(entries.begin(), entries.end(), [](const auto& e) { return e.first == "test"; });
    for (const auto& [k, v] : entries) apply_setting(config, k, v);
}

MfgProblem build_problem(const ExperimentConfig& config, double alpha) {
    config.validate();
    const TorusGrid grid(config.dim, config.n_h);
    const TimeAxis axis(config.horizon, config.n_t);
    NumericalHamiltonian ham(config.beta, config.scale, GridFunction(grid, 0.0));
    CouplingCost coupling = CouplingCost::moving_target(grid, axis, config.lambda);
    const auto m0 = [](std::span<const double> x) {
        double r2 = 0.0;
        for (double xi : x) r2 += (xi - 0.5) * (xi - 0.5);
        return std::exp(-r2 / 0.01);
    };
    const auto u_t = [](std::span<const double>) { return 0.0; };
    return MfgProblem(grid, axis, alpha, config.sigma, std::move(ham), std::move(coupling), m0, u_t);
}

bool RunRecord::ok() const noexcept {
    return std::all_of(runs.begin(), runs.end(), [](const RunResult& r) { return r.ok(); });
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

namespace {

void write_field(const std::filesystem::path& file, const char* name, std::span<const GridFunction> traj,
                 const TimeAxis& axis) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error("export_csv: cannot write " + file.string());
    const TorusGrid& g = traj.front().grid();
    out << (g.dim() == 1 ? "t,x," : "t,x,y,") << name << '\n';
    for (std::size_t n = 0; n < traj.size(); ++n) {
        const std::string t = format_double(axis.time(static_cast<int>(n)));
        for (std::size_t p = 0; p < g.size(); ++p) {
            const auto x = g.coordinates(p);
            out << t << ',' << format_double(x[0]) << ',';
            if (g.dim() == 2) out << format_double(x[1]) << ',';
            out << format_double(traj[n][p]) << '\n';
        }
    }
    if (!out) throw Error("export_csv: write failed for " + file.string());
}

std::filesystem::path run_directory(const ExperimentConfig& config, double alpha) {
    return config.out_dir / ("alpha_" + format_double(alpha));
}

RunResult run_one(const ExperimentConfig& config, double alpha, bool write_files) {
    RunResult r;
    r.alpha = alpha;
    const auto start = std::chrono::steady_clock::now();
    try {
        const MfgProblem problem = build_problem(config, alpha);
        r.solution = solve_mfg(problem, config.solver);
        r.mass = mass_and_positivity_report(r.solution.m);
        r.conservation = conservation_residual(problem.weights(), r.solution.m);
        r.hjb_residual = hjb_residual(r.solution.u, r.solution.m, problem.weights(), problem.hamiltonian(),
                                      problem.coupling(), problem.sigma());
        const auto lip = lipschitz_seminorm(r.solution.u);
        r.lipschitz_max = lip.empty() ? 0.0 : *std::max_element(lip.begin(), lip.end());
        if (write_files) r.files = export_csv(r, config, problem, run_directory(config, alpha));
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace

std::vector<std::filesystem::path> export_csv(const RunResult& run, const ExperimentConfig& config,
                                              const MfgProblem& problem, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto density = dir / "density.csv";
    const auto value = dir / "value.csv";
    const auto summary = dir / "summary.json";
    write_field(density, "m", run.solution.m, problem.axis());
    write_field(value, "u", run.solution.u, problem.axis());

    nlohmann::ordered_json j;
    j["test"] = config.test;
    j["alpha"] = run.alpha;
    j["sigma"] = config.sigma;
    j["lambda"] = config.lambda;
    j["beta"] = config.beta;
    j["scale"] = config.scale;
    j["dim"] = config.dim;
    j["n_h"] = config.n_h;
    j["n_t"] = config.n_t;
    j["T"] = config.horizon;
    j["mass_max_dev"] = run.mass.max_deviation;
    j["min_density"] = run.mass.global_min;
    j["conservation_residual"] = run.conservation;
    j["fp_iterations"] = run.solution.iterations;
    j["fp_converged"] = run.solution.converged;
    j["fp_residual"] = run.solution.residual;
    j["fp_history"] = run.solution.history;
    j["hjb_residual"] = run.hjb_residual;
    j["max_linear_residual"] = run.solution.fp_stats.max_linear_residual;
    j["min_dominance_margin"] = run.solution.fp_stats.min_dominance_margin;
    j["lipschitz_max"] = run.lipschitz_max;
    j["newton_tol"] = config.solver.newton_tol;
    j["newton_max"] = config.solver.newton_max;
    j["fp_tol"] = config.solver.fp_tol;
    j["fp_max"] = config.solver.fp_max;
    j["theta"] = config.solver.theta;
    j["anderson_depth"] = config.solver.anderson_depth;
    j["files"] = {density.filename().string(), value.filename().string(), summary.filename().string()};

    std::ofstream out(summary, std::ios::binary);
    if (!out) throw Error("export_csv: cannot write " + summary.string());
    out << j.dump(2) << '\n';
    if (!out) throw Error("export_csv: write failed for " + summary.string());
    return {density, value, summary};
}

RunRecord run_test(const ExperimentConfig& config, bool write_files) {
    config.validate();
    RunRecord rec;
    rec.config = config;
    rec.runs.resize(config.alphas.size());
    std::vector<std::thread> workers;
    workers.reserve(config.alphas.size());
    for (std::size_t k = 0; k < config.alphas.size(); ++k) {
        workers.emplace_back(
            [&, k] { rec.runs[k] = run_one(config, config.alphas[k], write_files); });
    }
    for (auto& w : workers) w.join();
    return rec;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("log_log_slope: need two or more matching points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

OrderStudy temporal_order_study(double alpha, std::span<const double> dts) {
    OrderStudy s;
    s.alpha = alpha;
    const double exact = mittag_leffler(alpha, -1.0);
    for (double dt : dts) {
        const double steps = std::round(1.0 / dt);
        if (!(dt > 0.0) || std::fabs(steps * dt - 1.0) > 1e-12)
            throw InvalidArgument("temporal_order_study: 1/dt must be an integer");
        const int N = static_cast<int>(steps);
        const L1Weights w(FractionalOrder(alpha), TimeAxis(1.0, N));
        std::vector<double> y{1.0};
        y.reserve(static_cast<std::size_t>(N) + 1);
        for (int n = 1; n <= N; ++n) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += w.forward(n, k) * y[k];
            y.push_back(acc / (1.0 + w.rho()));
        }
        s.dts.push_back(1.0 / N);
        s.errors.push_back(std::fabs(y.back() - exact));
    }
    s.slope = log_log_slope(s.dts, s.errors);
    return s;
}

bool SelfConvergenceStudy::monotone() const noexcept {
    if (diff_m.size() < 2) return false;
    for (bool c : converged)
        if (!c) return false;
    for (std::size_t k = 0; k + 1 < diff_m.size(); ++k)
        if (!(diff_m[k + 1] < diff_m[k]) || !(diff_u[k + 1] < diff_u[k])) return false;
    return true;
}

namespace {

GridFunction prolong(const GridFunction& c, const TorusGrid& fine) {
    const TorusGrid& cg = c.grid();
    if (fine.dim() != cg.dim() || fine.cells_per_axis() != 2 * cg.cells_per_axis())
        throw InvalidArgument("refine_trajectory: fine grid must halve h");
    GridFunction out(fine);
    for (std::size_t p = 0; p < fine.size(); ++p) {
        const auto idx = fine.multi_index(p);
        const long i0 = idx[0] / 2, i1 = (idx[0] + 1) / 2;
        if (fine.dim() == 1) {
            out[p] = 0.5 * (c[cg.flat_index(i0)] + c[cg.flat_index(i1)]);
        } else {
            const long j0 = idx[1] / 2, j1 = (idx[1] + 1) / 2;
            out[p] = 0.25 * (c[cg.flat_index(i0, j0)] + c[cg.flat_index(i1, j0)] + c[cg.flat_index(i0, j1)] +
                             c[cg.flat_index(i1, j1)]);
        }
    }
    return out;
}

}  // namespace

std::vector<GridFunction> refine_trajectory(std::span<const GridFunction> coarse, const TorusGrid& fine) {
    if (coarse.empty()) return {};
    std::vector<GridFunction> out;
    out.reserve(2 * coarse.size() - 1);
    GridFunction prev = prolong(coarse[0], fine);
    for (std::size_t k = 0; k + 1 < coarse.size(); ++k) {
        GridFunction next = prolong(coarse[k + 1], fine);
        GridFunction mid = prev + next;
        mid *= 0.5;
        out.push_back(std::move(prev));
        out.push_back(std::move(mid));
        prev = std::move(next);
    }
    out.push_back(std::move(prev));
    return out;
}

SelfConvergenceStudy self_convergence_study(const ExperimentConfig& config, double alpha, int levels) {
    if (levels < 3) throw InvalidArgument("self_convergence_study: need at least three levels");
    SelfConvergenceStudy s;
    s.alpha = alpha;
    std::vector<MfgSolution> sols;
    std::vector<TorusGrid> grids;
    for (int k = 0; k < levels; ++k) {
        ExperimentConfig c = config;
        c.n_h = config.n_h << k;
        c.n_t = config.n_t << k;
        const MfgProblem problem = build_problem(c, alpha);
        sols.push_back(solve_mfg(problem, c.solver));
        grids.push_back(problem.grid());
        s.n_h.push_back(c.n_h);
        s.n_t.push_back(c.n_t);
        s.converged.push_back(sols.back().converged);
    }
    for (int k = 0; k + 1 < levels; ++k) {
        const TorusGrid& fine = grids[k + 1];
        const double dt = config.horizon / s.n_t[k + 1];
        const auto m_c = refine_trajectory(sols[k].m, fine);
        const auto u_c = refine_trajectory(sols[k].u, fine);
        s.diff_m.push_back(sup_l2_distance(m_c, sols[k + 1].m));

        double acc = 0.0;
        for (std::size_t n = 0; n + 1 < u_c.size(); ++n) {
            const GridFunction e = sols[k + 1].u[n] - u_c[n];
            std::vector<GridFunction> grads;
            for (int a = 0; a < fine.dim(); ++a) grads.push_back(forward_diff(e, a));
            double step = 0.0;
            for (std::size_t p = 0; p < fine.size(); ++p) {
                double sq = 0.0;
                for (const auto& gr : grads) sq += gr[p] * gr[p];
                step += std::pow(sq, 0.5 * config.beta);
            }
            acc += dt * fine.cell_volume() * step;
        }
        s.diff_u.push_back(std::pow(acc, 1.0 / config.beta));
    }
    return s;
}

}  // namespace tfmfg
