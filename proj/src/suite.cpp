#include "mrbsde/suite.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "mrbsde/bsde.hpp"
#include "mrbsde/meanreflect.hpp"
#include "mrbsde/report.hpp"
#include "mrbsde/resistance.hpp"
#include "mrbsde/scenario.hpp"
#include "mrbsde/skorokhod.hpp"

namespace mrbsde {

namespace {

struct Rng {
    std::uint64_t s;
    double unit() {
        s += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = s;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return static_cast<double>(x >> 11) * 0x1.0p-53;
    }
    double range(double a, double b) { return a + (b - a) * unit(); }
};

std::vector<double> piecewise_linear(Rng& rng, const TimeGrid& grid, int knots) {
    std::vector<double> kv(static_cast<std::size_t>(knots));
    for (auto& v : kv) v = rng.range(-2.0, 2.0);
    std::vector<double> s(grid.n_nodes());
    for (std::size_t i = 0; i < grid.n_nodes(); ++i) {
        const double u = (grid.nodes[i] - grid.t_start) / grid.span() *
                         static_cast<double>(knots - 1);
        const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(u),
                                                    static_cast<std::size_t>(knots - 2));
        const double w = u - static_cast<double>(j);
        s[i] = (1.0 - w) * kv[j] + w * kv[j + 1];
    }
    return s;
}

// Band losses l(t,x) = x - upper(t), r(t,x) = x - lower(t).
void set_band(SPProblem& p, double u0, double u1, double l0, double l1) {
    p.l = [u0, u1](double t, double x) { return x - (u0 + u1 * t); };
    p.r = [l0, l1](double t, double x) { return x - (l0 + l1 * t); };
    p.c = p.C = 1.0;
}

SPProblem random_sp(Rng& rng, std::size_t n_steps) {
    SPProblem p;
    p.grid = make_grid(0.0, 1.0, n_steps);
    p.s = piecewise_linear(rng, p.grid, 6);
    const double u0 = rng.range(0.2, 1.5);
    const double l0 = u0 - rng.range(0.6, 2.5);
    const double u1 = rng.range(-0.15, 0.15);
    const double l1 = rng.range(-0.15, 0.15);
    set_band(p, u0, u1, l0, l1);
    return p;
}

BSPProblem random_bsp(Rng& rng, std::size_t n_steps) {
    BSPProblem p;
    p.grid = make_grid(0.0, 1.0, n_steps);
    p.s = piecewise_linear(rng, p.grid, 6);
    p.a = 0.0;
    const double u0 = rng.range(0.3, 1.5);
    const double l0 = -rng.range(0.3, 1.5);
    const double u1 = rng.range(-0.1, 0.1);
    const double l1 = rng.range(-0.1, 0.1);
    p.l = [u0, u1](double t, double x) { return x - (u0 + u1 * t); };
    p.r = [l0, l1](double t, double x) { return x - (l0 + l1 * t); };
    p.c = p.C = 1.0;
    return p;
}

double sup_gap(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

LossPair band_losses(double u0, double u1, double l0, double l1) {
    LossPair lp;
    lp.L_eval = [u0, u1](double t, double x, double) { return x - (u0 + u1 * t); };
    lp.R_eval = [l0, l1](double t, double x, double) { return x - (l0 + l1 * t); };
    lp.c = lp.C = 1.0;
    lp.affine = true;
    lp.smooth = true;
    lp.separation = (u0 - l0) + std::min(0.0, u1 - l1);
    lp.M_bound = std::abs(u0) + std::abs(u1) + std::abs(l0) + std::abs(l1);
    return lp;
}

GeneratorSpec zero_generator() {
    GeneratorSpec g;
    g.f = [](double, double, const EmpiricalMeasure&, double, const EmpiricalMeasure&, double) {
        return 0.0;
    };
    g.regime = Regime::Lipschitz;
    g.lambda = 0.0;
    return g;
}

// --- criteria ------------------------------------------------------------

CriterionResult crit_oracle_equivalence() {
    CriterionResult r{1, "skorokhod-oracle-equivalence"};
    Rng rng{11};
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const SPProblem p = random_sp(rng, 200);
        const SPSolution a = solve_sp(p);
        const SPSolution b = oracle_discrete_reflection(p);
        worst = std::max(worst, sup_gap(a.K.K, b.K.K));
    }
    r.pass = worst <= 1e-8;
    std::ostringstream os;
    os << "sup node gap " << worst << " over 100 problems (tol 1e-8)";
    r.detail = os.str();
    return r;
}

CriterionResult crit_backward_closed_form() {
    CriterionResult r{2, "backward-reflection-closed-form"};
    BSPProblem p;
    p.grid = make_grid(0.0, 1.0, 200);
    p.s.resize(p.grid.n_nodes());
    for (std::size_t i = 0; i < p.s.size(); ++i) p.s[i] = 2.0 * p.grid.nodes[i];
    p.a = 0.0;
    p.l = [](double, double x) { return x - 1.0; };
    p.r = [](double, double x) { return x + 1.0; };
    p.c = p.C = 1.0;
    const SPSolution sol = solve_bsp(p);
    double worst = 0.0;
    for (std::size_t i = 0; i < p.s.size(); ++i) {
        const double t = p.grid.nodes[i];
        worst = std::max(worst, std::abs(sol.K.K[i] + std::min(1.0, 2.0 * t)));
        worst = std::max(worst, std::abs(sol.x[i] - std::min(2.0 * (1.0 - t), 1.0)));
    }
    r.pass = worst <= 1e-10;
    std::ostringstream os;
    os << "max deviation from closed form " << worst << " (tol 1e-10)";
    r.detail = os.str();
    return r;
}

CriterionResult crit_compensator_bound() {
    CriterionResult r{3, "compensator-sup-bound"};
    Rng rng{13};
    double worst_slack = 1e300;
    for (int rep = 0; rep < 100; ++rep) {
        const SPProblem p = random_sp(rng, 100);
        const SPSolution s = solve_sp(p);
        double sk = 0.0, sphi = 0.0, spsi = 0.0;
        for (std::size_t i = 0; i < s.K.size(); ++i) {
            sk = std::max(sk, std::abs(s.K.K[i]));
            sphi = std::max(sphi, std::abs(s.phi[i]));
            spsi = std::max(spsi, std::abs(s.psi[i]));
        }
        worst_slack = std::min(worst_slack, sphi + spsi - sk);
    }
    r.pass = worst_slack >= -1e-10;
    std::ostringstream os;
    os << "min slack of sup|K| <= sup|phi|+sup|psi|: " << worst_slack;
    r.detail = os.str();
    return r;
}

CriterionResult crit_stability() {
    CriterionResult r{4, "stability-inequalities"};
    Rng rng{17};
    const double probe_xs[] = {-3.0, -1.2, -0.4, 0.0, 0.5, 1.3, 2.8};
    double worst = 1e300;
    for (int rep = 0; rep < 50; ++rep) {
        SPProblem p1 = random_sp(rng, 100);
        SPProblem p2 = p1;
        const double shift = rng.range(-0.2, 0.2);
        for (auto& v : p2.s) v += shift;
        const double du = rng.range(-0.05, 0.05);
        const double dl = rng.range(-0.05, 0.05);
        auto l1 = p1.l, r1 = p1.r;
        p2.l = [l1, du](double t, double x) { return l1(t, x) - du; };
        p2.r = [r1, dl](double t, double x) { return r1(t, x) - dl; };
        worst = std::min(worst, stability_gap_sp(p1, p2, probe_xs).slack);
    }
    double worst_b = 1e300;
    for (int rep = 0; rep < 50; ++rep) {
        BSPProblem p1 = random_bsp(rng, 100);
        BSPProblem p2 = p1;
        const double shift = rng.range(-0.2, 0.2);
        for (auto& v : p2.s) v += shift;
        p2.a = rng.range(-0.05, 0.05);
        worst_b = std::min(worst_b, stability_gap_bsp(p1, p2, probe_xs).slack);
    }
    r.pass = worst >= -1e-10 && worst_b >= -1e-10;
    std::ostringstream os;
    os << "min slack forward " << worst << ", backward " << worst_b << " over 50 pairs each";
    r.detail = os.str();
    return r;
}

CriterionResult crit_reversal_bitwise() {
    CriterionResult r{5, "time-reversal-bitwise"};
    Rng rng{19};
    bool ok = true;
    for (int rep = 0; rep < 20 && ok; ++rep) {
        const BSPProblem p = random_bsp(rng, 120);
        const SPSolution direct = solve_bsp(p);

        SPProblem rev;
        rev.grid = p.grid;
        rev.c = p.c;
        rev.C = p.C;
        const std::size_t n = p.grid.n_steps;
        rev.s.resize(n + 1);
        for (std::size_t i = 0; i <= n; ++i) rev.s[i] = p.a + p.s[n] - p.s[n - i];
        const TimeGrid g = p.grid;
        rev.l = [&p, g, n](double t, double x) { return p.l(g.nodes[n - g.index_of(t)], x); };
        rev.r = [&p, g, n](double t, double x) { return p.r(g.nodes[n - g.index_of(t)], x); };
        const SPSolution bar = solve_sp(rev);
        for (std::size_t i = 0; i <= n; ++i) {
            if (direct.x[i] != bar.x[n - i]) ok = false;
            if (direct.K.K[i] != bar.K.K[n] - bar.K.K[n - i]) ok = false;
        }
    }
    r.pass = ok;
    r.detail = ok ? "reversal identity exact on 20 problems"
                  : "bitwise mismatch against index-reversed forward solve";
    return r;
}

CriterionResult crit_constants() {
    CriterionResult r{6, "bound-planner-constants"};
    const double a0 = compute_A0(1.0, 1.0, 1.0, 2.0, 0.1);
    const double bh = compute_barH(1.0, 1.0, 0.1, 1.0, 2.0, 1.0, 1.0);
    QuadraticConstants qc;
    qc.H = 1.0;
    qc.lambda = 0.1;
    qc.alpha = 0.0;
    qc.c = 1.0;
    qc.C = 2.0;
    const auto [da, dhat] = compute_slab_lengths(qc, 10.0);
    bool mono_ok = true;
    Rng rng{23};
    for (int rep = 0; rep < 20; ++rep) {
        QuadraticConstants q;
        q.H = rng.range(0.5, 3.0);
        q.lambda = rng.range(0.05, 1.0);
        q.alpha = rng.range(0.0, 0.9);
        q.c = rng.range(0.5, 1.0);
        q.C = q.c + rng.range(0.1, 2.0);
        const auto [d1, d2] = compute_slab_lengths(q, rng.range(5.0, 200.0));
        if (!(d2 <= d1)) mono_ok = false;
    }
    const double e_a0 = std::abs(a0 - 103.011929926857976);
    const double e_bh = std::abs(bh - 22.4723928530590667);
    const double e_da = std::abs(da - 1.0 / 9.0);
    r.pass = e_a0 <= 1e-9 && e_bh <= 1e-9 && e_da <= 1e-12 && dhat <= da && mono_ok;
    std::ostringstream os;
    os << "A0 err " << e_a0 << ", barH err " << e_bh << ", delta err " << e_da
       << ", deltahat<=delta " << (dhat <= da && mono_ok ? "yes" : "no");
    r.detail = os.str();
    return r;
}

CriterionResult crit_decoupling() {
    CriterionResult r{7, "mean-reflection-decoupling"};
    const TimeGrid grid = make_grid(0.0, 1.0, 100);
    const std::size_t N = 10000;
    const ParticleEnsemble ens = simulate_brownian(grid, N, 7);
    std::vector<double> xi(N);
    for (std::size_t p = 0; p < N; ++p) xi[p] = ens.brownian(p, 100);
    const LossPair lp = band_losses(2.0, 0.0, 1.0, -2.0);
    DmrOptions opts;
    const SolutionTriple sol =
        solve_constant_driver_dmr(ens, xi, Matrix(N, grid.n_nodes()), lp, opts);

    BSPProblem op;
    op.grid = grid;
    op.s.assign(grid.n_nodes(), 0.0);
    op.a = 0.0;
    op.l = [](double, double x) { return x - 2.0; };
    op.r = [](double t, double x) { return x - (1.0 - 2.0 * t); };
    op.c = op.C = 1.0;
    const SPSolution oracle = solve_bsp(op);

    double worst = 0.0;
    for (std::size_t i = 0; i < grid.n_nodes(); ++i)
        worst = std::max(worst, std::abs(column_mean(sol.Y, i) - oracle.x[i]));
    r.pass = worst <= 0.05;
    std::ostringstream os;
    os << "sup_t |E[Y_t] - oracle| = " << worst << " (tol 0.05)";
    r.detail = os.str();
    return r;
}

std::vector<ScenarioConfig> shipped_scenarios() {
    std::vector<ScenarioConfig> out;
    {
        ScenarioConfig c;  // wide inactive band
        c.loss_upper0 = 3.0;
        c.loss_lower0 = -3.0;
        out.push_back(c);
    }
    {
        ScenarioConfig c;  // active moving lower barrier, decoupled mean
        c.loss_upper0 = 2.0;
        c.loss_lower0 = 1.0;
        c.loss_lower1 = -2.0;
        out.push_back(c);
    }
    {
        ScenarioConfig c;  // Lipschitz mean-field driver
        c.t_end = 0.25;
        c.generator_family = "linear";
        c.gen_ay = -0.25;
        c.gen_amy = 0.25;
        out.push_back(c);
    }
    {
        ScenarioConfig c;  // quadratic driver, bounded terminal
        c.terminal_family = "tanh-brownian";
        c.generator_family = "quadratic-z";
        c.gen_qz = 0.2;
        c.gen_H_tilde = 0.0;
        c.loss_upper0 = 5.0;
        c.loss_lower0 = -5.0;
        out.push_back(c);
    }
    {
        ScenarioConfig c;  // identity resistance feedback
        c.t_end = 0.25;
        c.generator_family = "linear";
        c.gen_ay = -0.25;
        c.gen_ak = 0.1;
        c.resistance_kind = "identity";
        out.push_back(c);
    }
    {
        ScenarioConfig c;  // density pipeline
        c.loss_upper0 = 2.0;
        c.loss_lower0 = 1.0;
        c.loss_lower1 = -2.0;
        c.generator_family = "linear";
        c.gen_ak = 0.5;
        c.resistance_kind = "density";
        out.push_back(c);
    }
    return out;
}

CriterionResult crit_constraint_invariants() {
    CriterionResult r{8, "constraint-and-flatoff-invariants"};
    bool all = true;
    std::ostringstream os;
    const auto configs = shipped_scenarios();
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const SolverReport rep = run_scenario(configs[i]);
        if (!rep.invariants_pass) {
            all = false;
            os << "scenario " << i << ": " << rep.invariants_detail;
        }
    }
    r.pass = all;
    r.detail = all ? "all shipped scenarios satisfy constraint and flat-off residual bounds"
                   : os.str();
    return r;
}

CriterionResult crit_picard_contraction() {
    CriterionResult r{9, "picard-contraction"};
    const TimeGrid grid = make_grid(0.0, 0.25, 100);
    const std::size_t N = 10000;
    const ParticleEnsemble ens = simulate_brownian(grid, N, 7);
    std::vector<double> xi(N);
    for (std::size_t p = 0; p < N; ++p) xi[p] = ens.brownian(p, 100);
    const LossPair lp = band_losses(1.0, 0.0, -1.0, 0.0);
    GeneratorSpec f;
    f.f = [](double, double y, const EmpiricalMeasure& my, double, const EmpiricalMeasure&,
             double) { return -0.25 * y + 0.25 * my.mean(); };
    f.regime = Regime::Lipschitz;
    f.lambda = 0.5;
    DmrOptions opts;
    opts.picard_tol = 1e-4;
    const auto [sol, hist] = picard_solve(ens, xi, f, lp, {}, opts);
    const auto totals = hist.totals();
    bool ratios_ok = true;
    double worst_ratio = 0.0;
    for (std::size_t j = 2; j < totals.size(); ++j) {
        const double ratio = totals[j] / totals[j - 1];
        worst_ratio = std::max(worst_ratio, ratio);
        if (ratio > 0.9) ratios_ok = false;
    }
    r.pass = ratios_ok && totals.size() <= 15;
    std::ostringstream os;
    os << totals.size() << " iterations, worst ratio from iteration 2: " << worst_ratio;
    r.detail = os.str();
    return r;
}

CriterionResult crit_quadratic_bounds() {
    CriterionResult r{10, "quadratic-bounds-and-benchmark"};
    const TimeGrid grid = make_grid(0.0, 1.0, 100);
    const std::size_t N = 10000;
    const ParticleEnsemble ens = simulate_brownian(grid, N, 7);

    std::vector<double> xi(N);
    for (std::size_t p = 0; p < N; ++p) xi[p] = std::tanh(ens.brownian(p, 100));
    const LossPair lp = band_losses(5.0, 0.0, -5.0, 0.0);
    GeneratorSpec f;
    f.f = [](double, double, const EmpiricalMeasure&, double z, const EmpiricalMeasure&, double) {
        return 0.2 * z * z;
    };
    f.regime = Regime::Quadratic;
    f.lambda = 0.2;
    f.H_tilde = 0.0;
    DmrOptions opts;
    opts.bsde.z_clamp = 3.0;
    QuadraticConstants qc;
    const SolutionTriple sol = solve_quadratic_dmr(ens, xi, f, lp, {}, opts, &qc);
    const bool bounds_ok = sol.diag.sup_Y <= qc.bar_H + 1e-9 &&
                           sol.diag.sup_K <= qc.A_tilde0 + 1e-9;

    std::vector<double> xib(N);
    for (std::size_t p = 0; p < N; ++p) xib[p] = ens.brownian(p, 100);
    BsdeOptions bopts;
    bopts.z_clamp = 3.0;
    const BSDESolution ch = solve_bsde_driver(
        ens, xib,
        [](std::size_t, std::size_t, double, double, double z) { return 0.5 * z * z; }, bopts);
    const double y0 = column_mean(ch.ytilde, 0);
    const double bench_err = std::abs(y0 - 0.5);

    r.pass = bounds_ok && bench_err <= 0.05;
    std::ostringstream os;
    os << "sup|Y| " << sol.diag.sup_Y << " <= barH " << qc.bar_H << ", sup|K| " << sol.diag.sup_K
       << " <= A " << qc.A_tilde0 << "; exponential-transform benchmark Y0 " << y0
       << " (target 0.5, tol 0.05)";
    r.detail = os.str();
    return r;
}

CriterionResult crit_density_pipeline() {
    CriterionResult r{11, "density-pipeline"};
    std::ostringstream os;

    const TimeGrid gref = make_grid(0.0, 1.0, 100);
    std::vector<double> ksq(gref.n_nodes());
    for (std::size_t i = 0; i < ksq.size(); ++i) ksq[i] = gref.nodes[i] * gref.nodes[i];
    const DensityPath dp = extract_density(bv_decompose(ksq), gref, false);
    double quot_err = 0.0;
    for (std::size_t i = 0; i + 1 < ksq.size(); ++i)
        quot_err = std::max(quot_err,
                            std::abs(dp.k[i] - (2.0 * gref.nodes[i] + gref.delta)));
    const bool quot_ok = quot_err <= 2e-12;

    RootProblem rp;
    rp.b_bar = [](double k) { return 0.5 * k; };
    rp.target_plus = 0.3;
    const double root_err = std::abs(solve_density_roots(rp).first - 0.2);
    const bool root_ok = root_err <= 1e-10;

    const TimeGrid grid = make_grid(0.0, 1.0, 100);
    const std::size_t N = 10000;
    const ParticleEnsemble ens = simulate_brownian(grid, N, 7);
    std::vector<double> xi(N);
    for (std::size_t p = 0; p < N; ++p) xi[p] = ens.brownian(p, 100);
    const LossPair lp = band_losses(2.0, 0.0, 1.0, -2.0);
    GeneratorSpec f = zero_generator();
    GeneratorSpec::Separable sep;
    sep.b = [](double, double, double, double k) { return 0.5 * k; };
    f.separable = sep;
    DmrOptions opts;
    const auto [base, hist] = picard_solve(ens, xi, f, lp, {}, opts);
    const DensityAssembly da = assemble_density_solution(base, ens, f, lp, opts);

    const DensityPath tilde = extract_density(base.K, grid, false);
    bool comp_ok = true, ratio_ok = true;
    double eq_worst = 0.0;
    for (std::size_t i = 0; i < grid.n_nodes(); ++i) {
        if (std::min(da.density.k_plus[i], da.density.k_minus[i]) != 0.0) comp_ok = false;
        eq_worst = std::max(eq_worst, std::abs(da.eq_residual[i]));
        if (da.node_class[i] == 1 &&
            std::abs(da.density.k_plus[i] - (2.0 / 3.0) * tilde.k_plus[i]) > 1e-9)
            ratio_ok = false;
    }
    const double tol_mc = base.diag.mc_tol;
    const bool resid_ok = eq_worst <= 3.0 * tol_mc && std::abs(da.flatoff_plus) <= tol_mc &&
                          std::abs(da.flatoff_minus) <= tol_mc;

    r.pass = quot_ok && root_ok && comp_ok && ratio_ok && resid_ok;
    os << "quotient err " << quot_err << ", root err " << root_err << ", complementarity "
       << (comp_ok ? "exact" : "violated") << ", k+ = (2/3) ktilde+ "
       << (ratio_ok ? "yes" : "no") << ", eq residual " << eq_worst;
    r.detail = os.str();
    return r;
}

CriterionResult crit_uniqueness() {
    CriterionResult r{12, "two-start-uniqueness"};
    const TimeGrid grid = make_grid(0.0, 1.0, 100);
    const std::size_t N = 10000;
    const ParticleEnsemble ens = simulate_brownian(grid, N, 7);
    std::vector<double> xi(N);
    for (std::size_t p = 0; p < N; ++p) xi[p] = ens.brownian(p, 100);
    const LossPair lp = band_losses(2.0, 0.0, 1.0, -2.0);
    GeneratorSpec f;
    f.f = [](double, double, const EmpiricalMeasure&, double, const EmpiricalMeasure&, double k) {
        return 0.1 * k;
    };
    f.regime = Regime::Lipschitz;
    f.lambda = 0.1;
    GeneratorSpec::Separable sep;
    sep.b = [](double, double, double, double k) { return 0.1 * k; };
    f.separable = sep;
    ResistanceSpec g;
    g.kind = ResistanceKind::Identity;
    OuterOptions opts;

    const SolutionTriple s1 = solve_with_resistance(ens, xi, f, lp, g, opts);
    const std::vector<double> k0(grid.n_nodes(), 0.1);
    const SolutionTriple s2 = solve_with_resistance(ens, xi, f, lp, g, opts, k0);
    const UniquenessReport rep = uniqueness_gap(s1, s2, grid);
    r.pass = rep.pass;
    std::ostringstream os;
    os << "gaps: mean Y " << rep.gap_mean_Y << ", Y " << rep.gap_Y << ", Z " << rep.gap_Z
       << ", K " << rep.gap_K << " vs 5x noise " << 5.0 * rep.noise_estimate;
    r.detail = os.str();
    return r;
}

CriterionResult crit_mc_convergence() {
    CriterionResult r{13, "monte-carlo-convergence"};
    const TimeGrid grid = make_grid(0.0, 1.0, 100);
    // A single run's error is dominated by a handful of correlated regression
    // coefficient draws, so the ratio is averaged over independent seeds.
    auto rms_error = [&grid](std::size_t N) {
        double mse = 0.0;
        const std::uint64_t seeds[] = {1, 3, 7, 11, 19};
        for (std::uint64_t seed : seeds) {
            const ParticleEnsemble ens = simulate_brownian(grid, N, seed);
            std::vector<double> xi(N);
            for (std::size_t p = 0; p < N; ++p) xi[p] = ens.brownian(p, 100);
            const BSDESolution sol =
                solve_bsde_frozen(ens, xi, Matrix(N, grid.n_nodes()), BsdeOptions{});
            double acc = 0.0;
            for (std::size_t p = 0; p < N; ++p)
                for (std::size_t i = 0; i < grid.n_nodes(); ++i) {
                    const double e = sol.ytilde(p, i) - ens.brownian(p, i);
                    acc += e * e;
                }
            mse += acc / static_cast<double>(N * grid.n_nodes());
        }
        return std::sqrt(mse / 5.0);
    };
    const double e_small = rms_error(2500);
    const double e_big = rms_error(10000);
    const double ratio = e_big / e_small;
    r.pass = ratio >= 0.35 && ratio <= 0.7;
    std::ostringstream os;
    os << "rms error " << e_small << " (N=2500) -> " << e_big << " (N=10000), ratio " << ratio
       << " (window [0.35, 0.7])";
    r.detail = os.str();
    return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const std::string& filter) {
    const std::vector<std::pair<std::string, std::function<CriterionResult()>>> criteria = {
        {"skorokhod-oracle-equivalence", crit_oracle_equivalence},
        {"backward-reflection-closed-form", crit_backward_closed_form},
        {"compensator-sup-bound", crit_compensator_bound},
        {"stability-inequalities", crit_stability},
        {"time-reversal-bitwise", crit_reversal_bitwise},
        {"bound-planner-constants", crit_constants},
        {"mean-reflection-decoupling", crit_decoupling},
        {"constraint-and-flatoff-invariants", crit_constraint_invariants},
        {"picard-contraction", crit_picard_contraction},
        {"quadratic-bounds-and-benchmark", crit_quadratic_bounds},
        {"density-pipeline", crit_density_pipeline},
        {"two-start-uniqueness", crit_uniqueness},
        {"monte-carlo-convergence", crit_mc_convergence}};
    std::vector<CriterionResult> out;
    for (const auto& [name, fn] : criteria) {
        if (!filter.empty() && name.find(filter) == std::string::npos) continue;
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult res = fn();
        res.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(res));
    }
    return out;
}

std::string summary_json(const std::vector<CriterionResult>& results) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : results) {
        nlohmann::json j;
        j["id"] = r.id;
        j["name"] = r.name;
        j["pass"] = r.pass;
        j["seconds"] = r.seconds;
        j["detail"] = r.detail;
        arr.push_back(j);
    }
    return arr.dump(2);
}

}  // namespace mrbsde
