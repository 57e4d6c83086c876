#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mrbsde/bsde.hpp"
#include "mrbsde/regression.hpp"

using namespace mrbsde;

namespace {

ParticleEnsemble small_ensemble(std::size_t n_steps = 50, std::size_t n_particles = 2000,
                                std::uint64_t seed = 7) {
    return simulate_brownian(make_grid(0.0, 1.0, n_steps), n_particles, seed);
}

}  // namespace

TEST_CASE("regression recovers polynomial targets") {
    std::vector<double> state(400), target(400);
    for (std::size_t i = 0; i < state.size(); ++i) {
        const double x = -2.0 + 4.0 * static_cast<double>(i) / 399.0;
        state[i] = x;
        target[i] = 1.5 + 0.5 * x - 0.25 * x * x;
    }
    RegressionBasis basis;
    const auto fit = regress_conditional(target, state, basis);
    for (std::size_t i = 0; i < state.size(); ++i)
        CHECK(fit[i] == doctest::Approx(target[i]).epsilon(1e-4));
}

TEST_CASE("regression on constant state returns the sample mean") {
    std::vector<double> state(100, 3.0);
    std::vector<double> target(100);
    for (std::size_t i = 0; i < 100; ++i) target[i] = static_cast<double>(i);
    const auto fit = regress_conditional(target, state, RegressionBasis{});
    for (double v : fit) CHECK(v == doctest::Approx(49.5).epsilon(1e-12));
}

TEST_CASE("regression preserves exact constants despite the ridge") {
    std::vector<double> state(300), target(300, 2.5);
    for (std::size_t i = 0; i < 300; ++i) state[i] = std::sin(static_cast<double>(i));
    const auto fit = regress_conditional(target, state, RegressionBasis{});
    for (double v : fit) CHECK(v == doctest::Approx(2.5).epsilon(1e-10));
}

TEST_CASE("zero driver with Brownian terminal reproduces the martingale") {
    const ParticleEnsemble ens = small_ensemble();
    const std::size_t n = ens.grid.n_steps;
    std::vector<double> xi(ens.n_particles);
    for (std::size_t p = 0; p < ens.n_particles; ++p) xi[p] = ens.brownian(p, n);

    const Matrix zero_c(ens.n_particles, ens.grid.n_nodes(), 0.0);
    const BSDESolution sol = solve_bsde_frozen(ens, xi, zero_c, BsdeOptions{});

    double sq = 0.0, sq_z = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i + 1 < ens.grid.n_nodes(); ++i) {
        for (std::size_t p = 0; p < ens.n_particles; ++p) {
            const double dy = sol.ytilde(p, i) - ens.brownian(p, i);
            const double dz = sol.z(p, i) - 1.0;
            sq += dy * dy;
            sq_z += dz * dz;
            ++count;
        }
    }
    CHECK(std::sqrt(sq / static_cast<double>(count)) < 0.1);
    // per-particle z carries O(sqrt(n/N)) regression noise; the node means do not
    CHECK(std::sqrt(sq_z / static_cast<double>(count)) < 1.0);
    double z_bar = 0.0;
    for (std::size_t i = 0; i + 1 < ens.grid.n_nodes(); ++i) {
        const double m = column_mean(sol.z, i);
        CHECK(std::abs(m - 1.0) < 0.6);  // per node the estimate has sd ~ sqrt(t*n/N)
        z_bar += m / static_cast<double>(ens.grid.n_steps);
    }
    CHECK(std::abs(z_bar - 1.0) < 0.1);
    CHECK(std::abs(column_mean(sol.ytilde, 0)) < 0.05);
}

TEST_CASE("linear driver with constant terminal matches the scalar ODE") {
    const ParticleEnsemble ens = small_ensemble(100, 500);
    std::vector<double> xi(ens.n_particles, 1.0);
    BsdeOptions opts;

    const FrozenDriver decay = [](std::size_t, std::size_t, double, double y, double) {
        return -y;
    };
    const BSDESolution a = solve_bsde_driver(ens, xi, decay, opts);
    CHECK(column_mean(a.ytilde, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-2));

    const FrozenDriver growth = [](std::size_t, std::size_t, double, double y, double) {
        return y;
    };
    const BSDESolution b = solve_bsde_driver(ens, xi, growth, opts);
    CHECK(column_mean(b.ytilde, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-2));
}

TEST_CASE("explicit and implicit schemes agree to first order") {
    const ParticleEnsemble ens = small_ensemble(200, 500);
    std::vector<double> xi(ens.n_particles, 1.0);
    const FrozenDriver decay = [](std::size_t, std::size_t, double, double y, double) {
        return -y;
    };
    BsdeOptions imp, exp_;
    exp_.implicit_scheme = false;
    const BSDESolution a = solve_bsde_driver(ens, xi, decay, imp);
    const BSDESolution b = solve_bsde_driver(ens, xi, decay, exp_);
    CHECK(column_mean(a.ytilde, 0) == doctest::Approx(column_mean(b.ytilde, 0)).epsilon(1e-2));
}

TEST_CASE("z clamp caps the regression estimate in the driver") {
    const ParticleEnsemble ens = small_ensemble(20, 800);
    const std::size_t n = ens.grid.n_steps;
    std::vector<double> xi(ens.n_particles);
    for (std::size_t p = 0; p < ens.n_particles; ++p) xi[p] = 5.0 * ens.brownian(p, n);

    BsdeOptions opts;
    opts.z_clamp = 0.5;
    double seen = 0.0;
    const FrozenDriver probe = [&seen](std::size_t, std::size_t, double, double, double z) {
        seen = std::max(seen, std::abs(z));
        return 0.0;
    };
    (void)solve_bsde_driver(ens, xi, probe, opts);
    CHECK(seen <= 0.5 + 1e-12);
}

TEST_CASE("a priori ratio and BMO proxy are finite diagnostics") {
    const ParticleEnsemble ens = small_ensemble(40, 1000);
    const std::size_t n = ens.grid.n_steps;
    std::vector<double> xi(ens.n_particles);
    for (std::size_t p = 0; p < ens.n_particles; ++p) xi[p] = std::tanh(ens.brownian(p, n));
    const Matrix zero_c(ens.n_particles, ens.grid.n_nodes(), 0.0);
    const BSDESolution sol = solve_bsde_frozen(ens, xi, zero_c, BsdeOptions{});

    const double ratio = apriori_ratio(sol, xi, zero_c, ens.grid);
    CHECK(std::isfinite(ratio));
    CHECK(ratio > 0.0);

    const double bmo = bmo_proxy(sol.z, ens, RegressionBasis{});
    CHECK(std::isfinite(bmo));
    CHECK(bmo >= 0.0);
}
