#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mrbsde/bsde.hpp"
#include "mrbsde/ensemble.hpp"
#include "mrbsde/generator.hpp"
#include "mrbsde/losses.hpp"
#include "mrbsde/solution.hpp"

namespace mrbsde {

struct DmrOptions {
    BsdeOptions bsde;
    double picard_tol = 1e-4;  // scaled by (1 + max|xi|) inside the solvers
    int max_picard = 50;
    double mc_kappa = 3.0;  // activity/constraint tolerance = kappa*std/sqrt(N)
    std::size_t slab_min_nodes = 1;
};

// Mean-loss functions built from the auxiliary solution: per node,
// l(t,x) = (1/N) sum_p L(t, Ytilde_p - mean + x). Affine losses bypass the
// particle loop (the shifts are mean-zero).
MeanLossPair make_mean_losses(const LossPair& lp, const TimeGrid& grid, const Matrix& ytilde,
                              std::span<const double> marks, std::size_t first_node = 0,
                              std::size_t last_node = static_cast<std::size_t>(-1));

// Mean-reflect an already-solved auxiliary BSDE: build (s, a, l, r), solve
// the backward Skorokhod problem, and set Y = Ytilde + K_T - K_t.
SolutionTriple mean_reflect_bsde(const ParticleEnsemble& ens, const BSDESolution& aux,
                                 const LossPair& lp, const DmrOptions& opts);

// Constant-driver doubly mean reflected BSDE (the base construction).
SolutionTriple solve_constant_driver_dmr(const ParticleEnsemble& ens, std::span<const double> xi,
                                         const Matrix& c_proc, const LossPair& lp,
                                         const DmrOptions& opts);

// One application of the solution map: freeze (y, z, k), evaluate the driver
// per particle/node, and solve the resulting constant-driver problem.
// g_nodes carries G_t(k) per node; pass empty for no resistance.
SolutionTriple gamma_map(const Matrix& y_frozen, const Matrix& z_frozen,
                         std::span<const double> g_nodes, const ParticleEnsemble& ens,
                         std::span<const double> xi, const GeneratorSpec& f, const LossPair& lp,
                         const DmrOptions& opts);

// Picard iteration of gamma_map from (0,0,0); k (and hence G(k)) stays fixed
// throughout, matching the inner equation of the two-step method.
std::pair<SolutionTriple, PicardHistory> picard_solve(const ParticleEnsemble& ens,
                                                      std::span<const double> xi,
                                                      const GeneratorSpec& f, const LossPair& lp,
                                                      std::span<const double> g_nodes,
                                                      const DmrOptions& opts);

// --- quadratic-case bound planner ---------------------------------------

struct QuadraticConstants {
    double H = 0.0;
    double H_tilde = 0.0;
    double H_hat = 0.0;
    double M = 0.0;
    double c = 1.0;
    double C = 1.0;
    double lambda = 0.0;
    double alpha = 0.0;
    // derived
    double bar_H1 = 0.0;
    double bar_H = 0.0;
    double A_tilde0 = 0.0;
    double A_hat = 0.0;
    double delta_A = 0.0;
    double delta_hat_A = 0.0;
};

// A_tilde0 = (3 + 24C/c)H + 2M/c + (2H/lambda + 1/3) e^{9 lambda H}.
double compute_A0(double H, double M, double c, double C, double lambda);

// barH1 = (H + Hhat*T) e^{lambda T}; barH = (1 + 3C/c) barH1 + 3C/c H + M/c.
double compute_barH(double H, double H_hat, double lambda, double T, double C, double c, double M);

// (delta^A, deltahat^A) for a given A_tilde >= A_tilde0; also fills A_hat.
std::pair<double, double> compute_slab_lengths(QuadraticConstants& qc, double A_tilde);

// Full planner for the two-step global construction.
QuadraticConstants plan_quadratic(double H, double H_tilde, double H_hat, double M, double c,
                                  double C, double lambda, double alpha, double T);

// Quadratic-regime solver: slab partition of length <= deltahat^A (never
// below one grid step), each slab solved by Picard iteration with the
// z-argument live in the driver, stitched right to left.
SolutionTriple solve_quadratic_dmr(const ParticleEnsemble& ens, std::span<const double> xi,
                                   const GeneratorSpec& f, const LossPair& lp,
                                   std::span<const double> g_nodes, const DmrOptions& opts,
                                   QuadraticConstants* qc_out = nullptr);

}  // namespace mrbsde
