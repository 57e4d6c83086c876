#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mrbsde/errors.hpp"
#include "mrbsde/report.hpp"
#include "mrbsde/scenario.hpp"
#include "mrbsde/skorokhod.hpp"
#include "mrbsde/suite.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::optional<std::size_t> particles;
    std::optional<std::size_t> steps;
};

void add_common(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--config", ov.config_path, "Path to a JSON scenario config");
    cmd->add_option("--seed", ov.seed, "Override the RNG seed");
    cmd->add_option("--out", ov.out_dir, "Output directory for CSV/JSON results");
    cmd->add_option("--particles", ov.particles, "Override the particle count");
    cmd->add_option("--steps", ov.steps, "Override the number of time steps");
}

mrbsde::ScenarioConfig resolve_config(const Overrides& ov) {
    mrbsde::ScenarioConfig cfg;
    if (!ov.config_path.empty()) cfg = mrbsde::load_config_file(ov.config_path);
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.particles) cfg.n_particles = *ov.particles;
    if (ov.steps) cfg.n_steps = *ov.steps;
    if (!ov.out_dir.empty()) cfg.out_dir = ov.out_dir;
    return cfg;
}

int run_solve(const Overrides& ov, bool force_density) {
    mrbsde::ScenarioConfig cfg = resolve_config(ov);
    if (force_density) cfg.resistance_kind = "density";
    const mrbsde::SolverReport rep = mrbsde::run_scenario(cfg);
    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        mrbsde::export_csv(rep, cfg.out_dir + "/solution.csv");
    }
    std::cout << "nodes " << rep.rows.size() << ", wall " << rep.wall_seconds << " s, invariants "
              << (rep.invariants_pass ? "pass" : "fail") << "\n";
    if (!rep.invariants_pass) {
        std::cerr << rep.invariants_detail << "\n";
        return kExitSolver;
    }
    return 0;
}

// Deterministic reflection demo: s_t = drift*t + wobble*sin(2*pi*t) inside the
// configured band, written as a per-node table.
int run_skorokhod(const Overrides& ov) {
    mrbsde::ScenarioConfig cfg = resolve_config(ov);
    const mrbsde::TimeGrid grid = mrbsde::make_grid(cfg.t_start, cfg.t_end, cfg.n_steps);
    mrbsde::SPProblem p;
    p.grid = grid;
    p.s.resize(grid.n_nodes());
    for (std::size_t i = 0; i < grid.n_nodes(); ++i) {
        const double t = grid.nodes[i];
        p.s[i] = cfg.terminal_value * t +
                 cfg.terminal_scale * std::sin(2.0 * 3.14159265358979323846 * t);
    }
    const double u0 = cfg.loss_upper0, u1 = cfg.loss_upper1;
    const double l0 = cfg.loss_lower0, l1 = cfg.loss_lower1;
    p.l = [u0, u1](double t, double x) { return x - (u0 + u1 * t); };
    p.r = [l0, l1](double t, double x) { return x - (l0 + l1 * t); };
    p.c = p.C = 1.0;
    const mrbsde::SPSolution sol = mrbsde::solve_sp(p);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        file.open(cfg.out_dir + "/skorokhod.csv", std::ios::binary);
        if (!file) throw std::ios_base::failure("cannot open output file");
        out = &file;
    }
    *out << "t,s,x,K,phi,psi\n";
    for (std::size_t i = 0; i < grid.n_nodes(); ++i)
        *out << grid.nodes[i] << ',' << p.s[i] << ',' << sol.x[i] << ',' << sol.K.K[i] << ','
             << sol.phi[i] << ',' << sol.psi[i] << "\n";
    return 0;
}

int run_suite(const std::string& filter, const std::string& out_dir) {
    const auto results = mrbsde::run_acceptance(filter);
    bool all = true;
    for (const auto& r : results) {
        std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << r.id << " " << r.name << ": "
                  << r.detail << " [" << r.seconds << " s]\n";
        all = all && r.pass;
    }
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream f(out_dir + "/suite.json", std::ios::binary);
        if (!f) throw std::ios_base::failure("cannot write suite summary");
        f << mrbsde::summary_json(results);
    }
    return all ? 0 : kExitSolver;
}

int run_bench(const Overrides& ov) {
    mrbsde::ScenarioConfig base = resolve_config(ov);
    std::cout << "particles,steps,wall_seconds\n";
    for (std::size_t n : {2500u, 5000u, 10000u}) {
        mrbsde::ScenarioConfig cfg = base;
        cfg.n_particles = n;
        const mrbsde::SolverReport rep = mrbsde::run_scenario(cfg);
        std::cout << n << ',' << cfg.n_steps << ',' << rep.wall_seconds << "\n";
    }
    for (std::size_t s : {50u, 100u, 200u}) {
        mrbsde::ScenarioConfig cfg = base;
        cfg.n_steps = s;
        const mrbsde::SolverReport rep = mrbsde::run_scenario(cfg);
        std::cout << cfg.n_particles << ',' << s << ',' << rep.wall_seconds << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Doubly mean-reflected MFBSDE solver"};
    app.require_subcommand(1);

    Overrides ov_sk, ov_solve, ov_density, ov_bench;
    std::string filter, suite_out;

    CLI::App* sk = app.add_subcommand("skorokhod", "Deterministic reflection problems");
    add_common(sk, ov_sk);
    CLI::App* solve = app.add_subcommand("solve", "Mean-reflected scenario solver");
    add_common(solve, ov_solve);
    CLI::App* density = app.add_subcommand("density", "Density-variant pipeline");
    add_common(density, ov_density);
    CLI::App* suite = app.add_subcommand("suite", "Acceptance criteria runner");
    suite->add_option("--filter", filter, "Only run criteria whose name contains this");
    suite->add_option("--out", suite_out, "Directory for the JSON summary");
    CLI::App* bench = app.add_subcommand("bench", "Particle/step sweeps");
    add_common(bench, ov_bench);

    try {
        app.parse(argc, argv);
        if (sk->parsed()) return run_skorokhod(ov_sk);
        if (solve->parsed()) return run_solve(ov_solve, false);
        if (density->parsed()) return run_solve(ov_density, true);
        if (suite->parsed()) return run_suite(filter, suite_out);
        if (bench->parsed()) return run_bench(ov_bench);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::ios_base::failure& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const mrbsde::convergence_failure& e) {
        std::cerr << "solver error: " << e.what() << "\nhistory:";
        for (double d : e.history) std::cerr << ' ' << d;
        std::cerr << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    }
    return 0;
}
