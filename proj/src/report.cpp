#include "mrbsde/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mrbsde/errors.hpp"
#include "mrbsde/meanreflect.hpp"
#include "mrbsde/resistance.hpp"

namespace mrbsde {

namespace {

DmrOptions make_dmr_options(const ScenarioConfig& cfg) {
    DmrOptions opts;
    opts.bsde.basis.degree = cfg.basis_degree;
    opts.bsde.basis.ridge = cfg.ridge;
    opts.bsde.z_clamp = cfg.truncation_radius > 0.0 ? cfg.truncation_radius
                                                    : std::numeric_limits<double>::infinity();
    opts.picard_tol = cfg.tol;
    opts.max_picard = cfg.max_iter;
    return opts;
}

std::vector<LossProbe> default_probes(const TimeGrid& grid, std::span<const double> marks) {
    const double xs[] = {-2.0, -0.7, -0.1, 0.3, 1.1, 2.4};
    std::vector<LossProbe> probes;
    for (std::size_t i = 0; i < grid.n_nodes(); i += std::max<std::size_t>(1, grid.n_steps / 8))
        for (double a : xs)
            for (double b : xs)
                if (a != b)
                    probes.push_back({grid.nodes[i], a, b, marks.empty() ? 0.0 : marks[0]});
    return probes;
}

}  // namespace

SolverReport make_report(const ScenarioConfig& cfg, const ScenarioModel& model,
                         const SolutionTriple& sol) {
    SolverReport rep;
    rep.seed = cfg.seed;
    rep.config_echo = serialize_config(cfg);
    const TimeGrid& grid = model.grid;
    const Diagnostics& d = sol.diag;
    double cum_up = 0.0, cum_down = 0.0;
    bool pass = true;
    std::ostringstream why;
    const double tv = std::max(sol.K.total_variation(), 1.0);
    for (std::size_t i = 0; i < grid.n_nodes(); ++i) {
        ReportRow row;
        row.t = grid.nodes[i];
        row.E_Y = column_mean(sol.Y, i);
        row.std_Y = std::sqrt(column_variance(sol.Y, i));
        row.K = sol.K.K[i];
        row.K_up = sol.K.K_up[i];
        row.K_down = sol.K.K_down[i];
        row.res_L = d.res_L[i];
        row.res_R = d.res_R[i];
        const double du = i == 0 ? sol.K.K_up[0] : sol.K.K_up[i] - sol.K.K_up[i - 1];
        const double dd = i == 0 ? sol.K.K_down[0] : sol.K.K_down[i] - sol.K.K_down[i - 1];
        if (du > 0.0 && row.res_R > d.mc_tol) cum_up += du;
        if (dd > 0.0 && row.res_L < -d.mc_tol) cum_down += dd;
        row.flatoff_R = cum_up;
        row.flatoff_L = cum_down;
        row.EZ2 = d.z2[i];
        rep.rows.push_back(row);
        if (row.res_L > d.mc_tol || row.res_R < -d.mc_tol) {
            pass = false;
            why << "constraint residual at node " << i << "; ";
        }
    }
    if (cum_up > d.mc_tol * tv || cum_down > d.mc_tol * tv) {
        pass = false;
        why << "flat-off residual; ";
    }
    rep.invariants_pass = pass;
    rep.invariants_detail = why.str();
    rep.picard_totals = d.picard.totals();
    return rep;
}

SolverReport run_scenario(const ScenarioConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const ScenarioModel model = build_model(cfg);

    std::string why;
    if (!validate_increments(model.ensemble, &why))
        throw std::invalid_argument("run_scenario: Brownian increments failed validation: " + why);
    const auto probes = default_probes(model.grid, model.marks);
    const LossCheckReport lc = check_loss_assumptions(model.losses, probes);
    if (!lc.pass)
        throw std::invalid_argument("run_scenario: loss assumptions rejected: " + lc.detail);

    const DmrOptions opts = make_dmr_options(cfg);
    SolutionTriple sol;
    std::vector<double> outer_diffs;

    if (model.density_mode) {
        auto [base, hist] =
            picard_solve(model.ensemble, model.xi, model.generator, model.losses, {}, opts);
        const DensityAssembly da =
            assemble_density_solution(base, model.ensemble, model.generator, model.losses, opts);
        sol = da.solution;
        sol.diag = base.diag;
    } else if (model.resistance) {
        OuterOptions oo;
        oo.inner = opts;
        oo.tol = cfg.tol;
        oo.max_outer = cfg.max_iter;
        OuterHistory oh;
        sol = solve_with_resistance(model.ensemble, model.xi, model.generator, model.losses,
                                    *model.resistance, oo, {}, &oh);
        outer_diffs = oh.diffs;
    } else if (model.generator.regime == Regime::Quadratic) {
        sol = solve_quadratic_dmr(model.ensemble, model.xi, model.generator, model.losses, {},
                                  opts);
    } else {
        sol = picard_solve(model.ensemble, model.xi, model.generator, model.losses, {}, opts)
                  .first;
    }

    SolverReport rep = make_report(cfg, model, sol);
    rep.outer_diffs = std::move(outer_diffs);
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

void export_csv(const SolverReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("export_csv: cannot open " + path);
    out << "t,E_Y,std_Y,K,K_up,K_down,res_L,res_R,flatoff_R,flatoff_L,EZ2\n";
    char buf[512];
    for (const ReportRow& r : report.rows) {
        std::snprintf(buf, sizeof(buf),
                      "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.t,
                      r.E_Y, r.std_Y, r.K, r.K_up, r.K_down, r.res_L, r.res_R, r.flatoff_R,
                      r.flatoff_L, r.EZ2);
        out << buf;
    }
    if (!out) throw std::ios_base::failure("export_csv: write failed for " + path);
}

}  // namespace mrbsde
