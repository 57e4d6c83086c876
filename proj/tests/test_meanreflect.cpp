#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "mrbsde/errors.hpp"
#include "mrbsde/meanreflect.hpp"

using namespace mrbsde;

namespace {

LossPair band_losses(double upper0, double upper1, double lower0, double lower1) {
    LossPair lp;
    lp.L_eval = [upper0, upper1](double t, double x, double) { return x - (upper0 + upper1 * t); };
    lp.R_eval = [lower0, lower1](double t, double x, double) { return x - (lower0 + lower1 * t); };
    lp.c = lp.C = 1.0;
    lp.affine = true;
    lp.separation = (upper0 - lower0) - std::abs(upper1 - lower1);
    lp.M_bound = std::abs(upper0) + std::abs(upper1) + std::abs(lower0) + std::abs(lower1);
    return lp;
}

std::vector<double> terminal_brownian(const ParticleEnsemble& ens) {
    std::vector<double> xi(ens.n_particles);
    for (std::size_t p = 0; p < ens.n_particles; ++p)
        xi[p] = ens.brownian(p, ens.grid.n_steps);
    return xi;
}

}  // namespace

TEST_CASE("affine mean-loss fast path agrees with the particle average") {
    const TimeGrid grid = make_grid(0.0, 1.0, 10);
    Matrix ytilde(50, grid.n_nodes());
    for (std::size_t p = 0; p < 50; ++p)
        for (std::size_t i = 0; i < grid.n_nodes(); ++i)
            ytilde(p, i) = std::sin(static_cast<double>(p * 7 + i)) + 0.1 * static_cast<double>(i);
    std::vector<double> marks(50, 0.0);

    LossPair lp = band_losses(1.0, 0.5, -1.0, 0.0);
    const MeanLossPair fast = make_mean_losses(lp, grid, ytilde, marks);
    lp.affine = false;
    const MeanLossPair slow = make_mean_losses(lp, grid, ytilde, marks);
    for (double t : grid.nodes)
        for (double x : {-1.5, -0.3, 0.0, 0.8, 2.0}) {
            CHECK(fast.l(t, x) == doctest::Approx(slow.l(t, x)).epsilon(1e-10));
            CHECK(fast.r(t, x) == doctest::Approx(slow.r(t, x)).epsilon(1e-10));
            CHECK(fast.l(t, x) == doctest::Approx(x - (1.0 + 0.5 * t)).epsilon(1e-10));
        }
}

TEST_CASE("constant-driver reflection pushes the mean onto the moving barrier") {
    const ParticleEnsemble ens = simulate_brownian(make_grid(0.0, 1.0, 100), 4000, 7);
    const std::vector<double> xi = terminal_brownian(ens);
    const Matrix zero_c(ens.n_particles, ens.grid.n_nodes(), 0.0);
    const LossPair lp = band_losses(2.0, 0.0, 1.0, -2.0);

    const SolutionTriple sol = solve_constant_driver_dmr(ens, xi, zero_c, lp, DmrOptions{});

    for (std::size_t i = 0; i < ens.grid.n_nodes(); ++i) {
        const double t = ens.grid.nodes[i];
        const double expect = std::max(0.0, 1.0 - 2.0 * t);
        CHECK(std::abs(column_mean(sol.Y, i) - expect) < 0.05);
        CHECK(sol.diag.res_L[i] <= sol.diag.mc_tol);
        CHECK(sol.diag.res_R[i] >= -sol.diag.mc_tol);
    }
    CHECK(sol.K.K[0] == 0.0);
    CHECK(std::abs(sol.K.K.back() - 1.0) < 0.05);
}

TEST_CASE("mean constraint violated at the terminal node is rejected") {
    const ParticleEnsemble ens = simulate_brownian(make_grid(0.0, 1.0, 20), 500, 3);
    std::vector<double> xi(ens.n_particles, 10.0);
    const Matrix zero_c(ens.n_particles, ens.grid.n_nodes(), 0.0);
    const LossPair lp = band_losses(1.0, 0.0, -1.0, 0.0);
    CHECK_THROWS_AS(solve_constant_driver_dmr(ens, xi, zero_c, lp, DmrOptions{}),
                    std::invalid_argument);
}

TEST_CASE("picard iteration converges for a Lipschitz mean-field driver") {
    const ParticleEnsemble ens = simulate_brownian(make_grid(0.0, 0.5, 50), 2000, 7);
    const std::vector<double> xi = terminal_brownian(ens);
    GeneratorSpec f;
    f.f = [](double, double y, const EmpiricalMeasure& mu, double, const EmpiricalMeasure&,
             double) { return -0.25 * y + 0.25 * mu.mean(); };
    f.regime = Regime::Lipschitz;
    f.lambda = 0.5;
    const LossPair lp = band_losses(5.0, 0.0, -5.0, 0.0);

    DmrOptions opts;
    opts.picard_tol = 1e-4;
    const auto [sol, hist] = picard_solve(ens, xi, f, lp, {}, opts);
    CHECK(hist.steps.size() >= 2);
    CHECK(hist.steps.size() <= 20);
    CHECK(hist.last_ratio < 1.0);
    for (std::size_t i = 0; i < ens.grid.n_nodes(); ++i) {
        CHECK(sol.diag.res_L[i] <= sol.diag.mc_tol);
        CHECK(sol.diag.res_R[i] >= -sol.diag.mc_tol);
    }
}

TEST_CASE("picard budget exhaustion carries the distance history") {
    const ParticleEnsemble ens = simulate_brownian(make_grid(0.0, 0.5, 20), 400, 5);
    const std::vector<double> xi = terminal_brownian(ens);
    GeneratorSpec f;
    f.f = [](double, double y, const EmpiricalMeasure&, double, const EmpiricalMeasure&, double) {
        return -0.5 * y;
    };
    f.lambda = 0.5;
    const LossPair lp = band_losses(5.0, 0.0, -5.0, 0.0);
    DmrOptions opts;
    opts.picard_tol = 1e-16;  // unattainable
    opts.max_picard = 3;
    try {
        picard_solve(ens, xi, f, lp, {}, opts);
        FAIL("expected convergence_failure");
    } catch (const convergence_failure& e) {
        CHECK(e.history.size() == 3);
    }
}

TEST_CASE("quadratic planning constants match hand-checked values") {
    CHECK(compute_A0(1.0, 1.0, 1.0, 2.0, 0.1) ==
          doctest::Approx(103.011929926857976).epsilon(1e-12));
    CHECK(compute_barH(1.0, 1.0, 0.1, 1.0, 2.0, 1.0, 1.0) ==
          doctest::Approx(22.4723928530590667).epsilon(1e-12));

    QuadraticConstants qc;
    qc.H = 1.0;
    qc.lambda = 0.1;
    qc.alpha = 0.0;
    qc.c = qc.C = 1.0;
    const auto [da, dha] = compute_slab_lengths(qc, 10.0);
    CHECK(std::abs(da - 1.0 / 9.0) <= 1e-12);
    CHECK(dha <= da);
    CHECK(dha > 0.0);

    qc.alpha = 1.5;
    CHECK_THROWS_AS(compute_slab_lengths(qc, 10.0), std::invalid_argument);

    QuadraticConstants flat;
    flat.H = 1.0;
    flat.lambda = 0.0;
    flat.alpha = 0.0;
    const auto [ia, iha] = compute_slab_lengths(flat, 10.0);
    CHECK(std::isinf(ia));
    CHECK(std::isinf(iha));
}

TEST_CASE("quadratic planner works at the level of the grown bound") {
    const QuadraticConstants qc =
        plan_quadratic(1.0, 0.5, 0.5, 1.0, 1.0, 1.0, 0.2, 0.0, 1.0);
    CHECK(qc.bar_H > qc.H);
    CHECK(qc.A_tilde0 > 0.0);
    CHECK(qc.delta_hat_A <= qc.delta_A);
    CHECK(qc.delta_hat_A > 0.0);
    CHECK(std::isfinite(qc.A_hat));
}

TEST_CASE("quadratic solver requires the declared driver bound") {
    const ParticleEnsemble ens = simulate_brownian(make_grid(0.0, 1.0, 10), 100, 1);
    std::vector<double> xi(ens.n_particles, 0.0);
    GeneratorSpec f;
    f.f = [](double, double, const EmpiricalMeasure&, double z, const EmpiricalMeasure&, double) {
        return 0.1 * z * z;
    };
    f.regime = Regime::Quadratic;
    f.lambda = 0.1;
    const LossPair lp = band_losses(1.0, 0.0, -1.0, 0.0);
    CHECK_THROWS_AS(solve_quadratic_dmr(ens, xi, f, lp, {}, DmrOptions{}),
                    std::invalid_argument);
}

TEST_CASE("quadratic solver satisfies the constraints and its planned bounds") {
    const ParticleEnsemble ens = simulate_brownian(make_grid(0.0, 1.0, 40), 1500, 7);
    std::vector<double> xi(ens.n_particles);
    for (std::size_t p = 0; p < ens.n_particles; ++p)
        xi[p] = std::tanh(ens.brownian(p, ens.grid.n_steps));
    GeneratorSpec f;
    f.f = [](double, double, const EmpiricalMeasure&, double z, const EmpiricalMeasure&, double) {
        return 0.2 * z * z;
    };
    f.regime = Regime::Quadratic;
    f.lambda = 0.2;
    f.H_tilde = 0.0;
    LossPair lp = band_losses(5.0, 0.0, -5.0, 0.0);

    DmrOptions opts;
    opts.bsde.z_clamp = 3.0;
    QuadraticConstants qc;
    const SolutionTriple sol = solve_quadratic_dmr(ens, xi, f, lp, {}, opts, &qc);

    CHECK(sol.diag.sup_Y <= qc.bar_H);
    CHECK(sol.diag.sup_K <= qc.A_tilde0);
    for (std::size_t i = 0; i < ens.grid.n_nodes(); ++i) {
        CHECK(sol.diag.res_L[i] <= sol.diag.mc_tol);
        CHECK(sol.diag.res_R[i] >= -sol.diag.mc_tol);
    }
    CHECK(sol.K.K[0] == 0.0);
}
