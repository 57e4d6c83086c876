#pragma once

#include <functional>
#include <vector>

#include "mrbsde/bv_path.hpp"
#include "mrbsde/losses.hpp"
#include "mrbsde/time_grid.hpp"

namespace mrbsde {

// Skorokhod problem for a deterministic grid function s with two nonlinear
// constraints l <= 0 <= r on the corrected path.
struct SPProblem {
    TimeGrid grid;
    std::vector<double> s;  // one value per node
    std::function<double(double t, double x)> l;
    std::function<double(double t, double x)> r;
    double c = 1.0;
    double C = 1.0;
    double separation = 0.0;
};

// Terminal-anchored variant, solved by time reversal.
struct BSPProblem {
    TimeGrid grid;
    std::vector<double> s;
    double a = 0.0;  // terminal anchor, must satisfy l(T,a) <= 0 <= r(T,a)
    std::function<double(double t, double x)> l;
    std::function<double(double t, double x)> r;
    double c = 1.0;
    double C = 1.0;
    double separation = 0.0;
    // Anchor violations below this are absorbed as a terminal correction of
    // K instead of rejected (Monte Carlo callers pass their noise scale).
    double anchor_tol = 1e-9;
};

struct SPSolution {
    std::vector<double> x;
    BVPath K;
    std::vector<double> phi;  // per-node root of l(t, s_t + .) = 0
    std::vector<double> psi;  // per-node root of r(t, s_t + .) = 0
    double flatoff_up = 0.0;    // sum of dK_up where r > tol
    double flatoff_down = 0.0;  // sum of dK_down where l < -tol
};

// Per-node roots of l(t, s_t + x) = 0 and r(t, s_t + x) = 0 (bracketed
// bisection; strict monotonicity with the c-lower bound guarantees a root).
std::pair<std::vector<double>, std::vector<double>> root_phi_psi(const SPProblem& p);

// Scalar root of a strictly increasing function g with Lipschitz lower
// bound c. Shared by the Skorokhod solvers and the density root solves.
double solve_increasing_root(const std::function<double(double)>& g, double c_lower,
                             double tol = 1e-12);

SPSolution solve_sp(const SPProblem& p);

// Backward solve via reversal: identical to index-reversed solve_sp on the
// reversed problem (bitwise on shared arithmetic).
SPSolution solve_bsp(const BSPProblem& p);

// Forward greedy minimal-push recursion; independent oracle for solve_sp.
SPSolution oracle_discrete_reflection(const SPProblem& p);

struct StabilityReport {
    double lhs = 0.0;    // sup |K1 - K2|
    double rhs = 0.0;    // stability bound
    double slack = 0.0;  // rhs - lhs
    double sup_ds = 0.0;
    double loss_gap = 0.0;  // sup |l1-l2| v sup |r1-r2| over probes
};

// Continuity bound sup|K1-K2| <= (C/c) sup|s1-s2| + (1/c)(Lbar v Rbar).
// probe_xs are the x-values over which the loss gap supremum is sampled.
StabilityReport stability_gap_sp(const SPProblem& p1, const SPProblem& p2,
                                 std::span<const double> probe_xs);

// Backward bound: 2(C/c)|a1-a2| + 4(C/c) sup|s1-s2| + (2/c)(Lbar v Rbar).
StabilityReport stability_gap_bsp(const BSPProblem& p1, const BSPProblem& p2,
                                  std::span<const double> probe_xs);

}  // namespace mrbsde
