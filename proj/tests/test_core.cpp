#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mrbsde/bv_path.hpp"
#include "mrbsde/empirical.hpp"
#include "mrbsde/ensemble.hpp"
#include "mrbsde/losses.hpp"
#include "mrbsde/matrix.hpp"
#include "mrbsde/time_grid.hpp"

using namespace mrbsde;

TEST_CASE("make_grid produces a uniform partition") {
    const TimeGrid g = make_grid(0.0, 1.0, 4);
    CHECK(g.n_nodes() == 5);
    CHECK(g.delta == doctest::Approx(0.25));
    CHECK(g.nodes.front() == 0.0);
    CHECK(g.nodes.back() == 1.0);
    CHECK(g.index_of(0.5) == 2);
    CHECK(g.index_of(0.5 + 1e-13) == 2);
    CHECK_THROWS_AS(make_grid(1.0, 0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(0.0, 1.0, 0), std::invalid_argument);
}

TEST_CASE("matrix column statistics") {
    Matrix m(3, 2);
    m(0, 0) = 1.0;
    m(1, 0) = 2.0;
    m(2, 0) = 3.0;
    CHECK(column_mean(m, 0) == doctest::Approx(2.0));
    CHECK(column_variance(m, 0) == doctest::Approx(2.0 / 3.0));
    CHECK(column_mean(m, 1) == 0.0);
    const auto col = column_copy(m, 0);
    CHECK(col == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("empirical measure and W1 on order statistics") {
    const EmpiricalMeasure mu(std::vector<double>{1.0, 0.0});
    const EmpiricalMeasure nu(std::vector<double>{0.0, 2.0});
    CHECK(mu.mean() == doctest::Approx(0.5));
    CHECK(mu.samples().front() == 0.0);
    CHECK(w1_distance(mu, nu) == doctest::Approx(0.5));
    CHECK_THROWS_AS(EmpiricalMeasure(std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(w1_distance(mu, EmpiricalMeasure(std::vector<double>{1.0})),
                    std::invalid_argument);
}

TEST_CASE("bv_decompose splits increments minimally") {
    const BVPath p = bv_decompose({0.0, 1.0, 0.5, 2.0});
    CHECK(p.K_up == std::vector<double>{0.0, 1.0, 1.0, 2.5});
    CHECK(p.K_down == std::vector<double>{0.0, 0.0, 0.5, 0.5});
    for (std::size_t i = 0; i < p.size(); ++i)
        CHECK(p.K[i] == doctest::Approx(p.K_up[i] - p.K_down[i]));
    CHECK(p.total_variation() == doctest::Approx(3.0));
    CHECK_THROWS_AS(bv_decompose({1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("bv_decompose_with_initial_jump honours the pre-start zero") {
    const BVPath p = bv_decompose_with_initial_jump({-0.5, -0.25});
    CHECK(p.K_down[0] == doctest::Approx(0.5));
    CHECK(p.K_up[0] == 0.0);
    CHECK(p.K_up[1] == doctest::Approx(0.25));
    CHECK(p.total_variation() == doctest::Approx(0.75));
}

TEST_CASE("brownian simulation is counter-deterministic") {
    const TimeGrid g = make_grid(0.0, 1.0, 16);
    const ParticleEnsemble a = simulate_brownian(g, 64, 42);
    const ParticleEnsemble b = simulate_brownian(g, 64, 42);
    CHECK(a.brownian == b.brownian);
    const ParticleEnsemble c = simulate_brownian(g, 64, 43);
    CHECK(a.brownian != c.brownian);
    for (std::size_t p = 0; p < 64; ++p) CHECK(a.brownian(p, 0) == 0.0);

    // prefix property: the first particles do not depend on the total count
    const ParticleEnsemble d = simulate_brownian(g, 8, 42);
    for (std::size_t p = 0; p < 8; ++p)
        for (std::size_t i = 0; i <= 16; ++i)
            CHECK(a.brownian(p, i) == d.brownian(p, i));

    CHECK_THROWS_AS(simulate_brownian(g, 1, 42), std::invalid_argument);
}

TEST_CASE("increment validation accepts honest paths and flags broken ones") {
    const TimeGrid g = make_grid(0.0, 1.0, 20);
    ParticleEnsemble ens = simulate_brownian(g, 4000, 7);
    std::string why;
    CHECK(validate_increments(ens, &why));

    for (std::size_t p = 0; p < ens.n_particles; ++p)
        ens.brownian(p, 5) = ens.brownian(p, 4) + 1.0;
    CHECK_FALSE(validate_increments(ens, &why));
    CHECK(!why.empty());
}

TEST_CASE("loss assumption checker") {
    LossPair lp;
    lp.L_eval = [](double, double x, double) { return x - 1.0; };
    lp.R_eval = [](double, double x, double) { return x + 1.0; };
    lp.c = lp.C = 1.0;
    lp.separation = 2.0;

    std::vector<LossProbe> probes;
    for (double t : {0.0, 0.5, 1.0})
        for (double x : {-2.0, -0.5, 0.5, 2.0})
            for (double y : {-1.5, 0.0, 1.5})
                if (x != y) probes.push_back({t, x, y, 0.0});

    const LossCheckReport ok = check_loss_assumptions(lp, probes);
    CHECK(ok.pass);
    CHECK(ok.worst_low_ratio == doctest::Approx(1.0));
    CHECK(ok.worst_high_ratio == doctest::Approx(1.0));
    CHECK(ok.min_gap == doctest::Approx(2.0));

    LossPair bad = lp;
    bad.L_eval = [](double, double x, double) { return -x; };
    const LossCheckReport rep = check_loss_assumptions(bad, probes);
    CHECK_FALSE(rep.pass);
    CHECK(rep.monotonicity_violations > 0);

    LossPair weak = lp;
    weak.c = 2.0;  // declared slope larger than the actual one
    CHECK_FALSE(check_loss_assumptions(weak, probes).pass);
}
