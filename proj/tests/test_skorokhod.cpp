#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "mrbsde/errors.hpp"
#include "mrbsde/skorokhod.hpp"

using namespace mrbsde;

namespace {

SPProblem band_problem(double upper, double lower, std::size_t n_steps) {
    SPProblem p;
    p.grid = make_grid(0.0, 1.0, n_steps);
    p.s.assign(p.grid.n_nodes(), 0.0);
    p.l = [upper](double, double x) { return x - upper; };
    p.r = [lower](double, double x) { return x - lower; };
    p.c = p.C = 1.0;
    p.separation = upper - lower;
    return p;
}

double lcg(std::uint64_t& state) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(state >> 11) / 9007199254740992.0;
}

}  // namespace

TEST_CASE("scalar increasing root") {
    const double r = solve_increasing_root(
        [](double x) { return x + 0.1 * std::sin(x) - 1.0; }, 0.9);
    CHECK(r == doctest::Approx(0.920414720250276).epsilon(1e-10));
    CHECK(solve_increasing_root([](double x) { return 3.0 * x; }, 1.0) == 0.0);
    CHECK_THROWS_AS(solve_increasing_root([](double) { return 1.0; }, 1.0), numerical_failure);
}

TEST_CASE("drifting path reflected in a fixed band has closed-form compensator") {
    SPProblem p = band_problem(1.0, -1.0, 200);
    for (std::size_t i = 0; i < p.grid.n_nodes(); ++i) p.s[i] = 2.0 * p.grid.nodes[i];
    const SPSolution sol = solve_sp(p);
    for (std::size_t i = 0; i < p.grid.n_nodes(); ++i) {
        const double t = p.grid.nodes[i];
        CHECK(sol.K.K[i] == doctest::Approx(-std::max(0.0, 2.0 * t - 1.0)).epsilon(1e-12));
        CHECK(sol.x[i] <= 1.0 + 1e-12);
        CHECK(sol.x[i] >= -1.0 - 1e-12);
    }
    CHECK(sol.flatoff_up == doctest::Approx(0.0));
    CHECK(sol.flatoff_down == doctest::Approx(0.0));
}

TEST_CASE("infeasible start becomes an initial jump") {
    SPProblem p = band_problem(1.0, 0.5, 50);
    const SPSolution sol = solve_sp(p);
    CHECK(sol.K.K[0] == doctest::Approx(0.5));
    CHECK(sol.K.K_up[0] == doctest::Approx(0.5));
    CHECK(sol.K.K_down[0] == 0.0);

    SPProblem q = band_problem(-1.0, -2.0, 50);
    const SPSolution down = solve_sp(q);
    CHECK(down.K.K[0] == doctest::Approx(-1.0));
    CHECK(down.K.K_down[0] == doctest::Approx(1.0));
}

TEST_CASE("explicit formula matches the greedy clamp oracle on random problems") {
    std::uint64_t rng = 99;
    for (int trial = 0; trial < 25; ++trial) {
        SPProblem p = band_problem(1.0, -1.0, 120);
        const double lo = -0.3 - lcg(rng);
        const double hi = lo + 0.7 + 1.8 * lcg(rng);
        const double su = 0.1 + 0.1 * lcg(rng);
        const double sl = -0.1 - 0.1 * lcg(rng);
        p.l = [hi, su](double t, double x) { return x - (hi + su * t); };
        p.r = [lo, sl](double t, double x) { return x - (lo + sl * t); };
        double w = 0.0;
        for (std::size_t i = 0; i < p.grid.n_nodes(); ++i) {
            w += 0.4 * (lcg(rng) - 0.5);
            p.s[i] = w + std::sin(3.0 * p.grid.nodes[i]);
        }
        const SPSolution a = solve_sp(p);
        const SPSolution b = oracle_discrete_reflection(p);
        for (std::size_t i = 0; i < p.grid.n_nodes(); ++i)
            CHECK(a.K.K[i] == doctest::Approx(b.K.K[i]).epsilon(1e-9));
    }
}

TEST_CASE("compensator bound by the constraint roots") {
    std::uint64_t rng = 4;
    SPProblem p = band_problem(1.4, -0.6, 80);
    for (std::size_t i = 0; i < p.grid.n_nodes(); ++i) p.s[i] = 2.5 * std::sin(5.0 * p.grid.nodes[i]);
    (void)rng;
    const SPSolution sol = solve_sp(p);
    double sup_phi = 0.0, sup_psi = 0.0, sup_K = 0.0;
    for (std::size_t i = 0; i < p.grid.n_nodes(); ++i) {
        sup_phi = std::max(sup_phi, std::abs(sol.phi[i]));
        sup_psi = std::max(sup_psi, std::abs(sol.psi[i]));
        sup_K = std::max(sup_K, std::abs(sol.K.K[i]));
    }
    CHECK(sup_K <= sup_phi + sup_psi + 1e-12);
}

TEST_CASE("empty band is rejected") {
    SPProblem p = band_problem(-1.0, 1.0, 10);
    CHECK_THROWS_AS(solve_sp(p), numerical_failure);
}

TEST_CASE("backward problem reverses a forward one bitwise") {
    BSPProblem p;
    p.grid = make_grid(0.0, 1.0, 64);
    p.s.resize(p.grid.n_nodes());
    for (std::size_t i = 0; i < p.grid.n_nodes(); ++i)
        p.s[i] = std::sin(4.0 * p.grid.nodes[i]) + 0.5 * p.grid.nodes[i];
    p.a = 0.0;
    p.l = [](double t, double x) { return x - (1.2 - 0.1 * t); };
    p.r = [](double t, double x) { return x + 1.0 + 0.2 * t; };
    p.c = p.C = 1.0;

    const SPSolution sol = solve_bsp(p);
    CHECK(sol.K.K[0] == 0.0);
    const std::size_t n = p.grid.n_steps;
    CHECK(sol.x[n] == p.a + 0.0);

    // manual reversal
    SPProblem rev;
    rev.grid = p.grid;
    rev.c = rev.C = 1.0;
    rev.s.resize(p.grid.n_nodes());
    for (std::size_t i = 0; i <= n; ++i) rev.s[i] = p.a + p.s[n] - p.s[n - i];
    rev.l = [&p, n](double t, double x) {
        return p.l(p.grid.nodes[n - p.grid.index_of(t)], x);
    };
    rev.r = [&p, n](double t, double x) {
        return p.r(p.grid.nodes[n - p.grid.index_of(t)], x);
    };
    const SPSolution bar = solve_sp(rev);
    for (std::size_t i = 0; i <= n; ++i) {
        CHECK(sol.K.K[i] == bar.K.K[n] - bar.K.K[n - i]);
        CHECK(sol.x[i] == bar.x[n - i]);
    }
}

TEST_CASE("backward problem with a moving lower barrier") {
    BSPProblem p;
    p.grid = make_grid(0.0, 1.0, 400);
    p.s.assign(p.grid.n_nodes(), 0.0);
    p.a = 0.0;
    p.l = [](double, double x) { return x - 2.0; };
    p.r = [](double t, double x) { return x - (1.0 - 2.0 * t); };
    p.c = p.C = 1.0;
    const SPSolution sol = solve_bsp(p);
    for (std::size_t i = 0; i < p.grid.n_nodes(); ++i) {
        const double t = p.grid.nodes[i];
        CHECK(sol.K.K[i] == doctest::Approx(std::min(1.0, 2.0 * t)).epsilon(1e-10));
        CHECK(sol.x[i] == doctest::Approx(std::max(0.0, 1.0 - 2.0 * t)).epsilon(1e-10));
    }
}

TEST_CASE("backward anchor must satisfy the terminal constraints") {
    BSPProblem p;
    p.grid = make_grid(0.0, 1.0, 10);
    p.s.assign(p.grid.n_nodes(), 0.0);
    p.a = 5.0;
    p.l = [](double, double x) { return x - 1.0; };
    p.r = [](double, double x) { return x + 1.0; };
    CHECK_THROWS_AS(solve_bsp(p), std::invalid_argument);
}

TEST_CASE("stability bounds hold on perturbed problems") {
    std::uint64_t rng = 2024;
    const double probe_xs[] = {-2.0, -1.0, -0.25, 0.4, 1.3, 2.2};
    for (int trial = 0; trial < 10; ++trial) {
        SPProblem p1 = band_problem(1.0 + lcg(rng), -1.0 - lcg(rng), 90);
        double w = 0.0;
        for (std::size_t i = 0; i < p1.grid.n_nodes(); ++i) {
            w += 0.3 * (lcg(rng) - 0.5);
            p1.s[i] = w;
        }
        SPProblem p2 = p1;
        const double shift = 0.2 * (lcg(rng) - 0.5);
        for (auto& v : p2.s) v += shift * lcg(rng);
        const double dl = 0.1 * lcg(rng);
        p2.l = [&p1, dl](double t, double x) { return p1.l(t, x) + dl; };
        const StabilityReport rep = stability_gap_sp(p1, p2, probe_xs);
        CHECK(rep.slack >= -1e-10);

        BSPProblem b1;
        b1.grid = p1.grid;
        b1.s = p1.s;
        b1.a = 0.0;
        b1.l = p1.l;
        b1.r = p1.r;
        BSPProblem b2 = b1;
        b2.s = p2.s;
        b2.a = 0.1 * (lcg(rng) - 0.5);
        b2.l = p2.l;
        const StabilityReport brep = stability_gap_bsp(b1, b2, probe_xs);
        CHECK(brep.slack >= -1e-10);
    }
}
