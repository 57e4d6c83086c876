#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mrbsde/meanreflect.hpp"

namespace mrbsde {

struct OuterOptions {
    DmrOptions inner;
    double tol = 1e-6;
    int max_outer = 50;
    bool adaptive_damping = true;  // relax to 0.5 when differences alternate
};

struct OuterHistory {
    std::vector<double> diffs;  // sup|k^{j+1} - k^j| per outer step
    int iterations = 0;
    bool damped = false;
};

// Outer fixed point over the compensator: k^{(j+1)} = K-component of the
// inner solve with the driver fed G(k^{(j)}), from k^{(0)} = 0 (or k0).
SolutionTriple solve_with_resistance(const ParticleEnsemble& ens, std::span<const double> xi,
                                     const GeneratorSpec& f, const LossPair& lp,
                                     const ResistanceSpec& g, const OuterOptions& opts,
                                     std::span<const double> k0 = {},
                                     OuterHistory* history = nullptr);

// --- density pipeline ----------------------------------------------------

struct DensityPath {
    std::vector<double> k;        // forward difference quotients, one per node
    std::vector<double> k_plus;   // nonnegative parts, complementary
    std::vector<double> k_minus;
    double max_abs_k = 0.0;  // empirical Lipschitz constant of K
};

DensityPath extract_density(const BVPath& K, const TimeGrid& grid, bool central = false);

// Scalar root problem of the density construction:
//   bbar(k) - bbar(0) + k = target_plus   (k >= 0),
//   bbar(-k) - bbar(0) - k = -target_minus (k >= 0).
struct RootProblem {
    std::function<double(double)> b_bar;
    double target_plus = 0.0;
    double target_minus = 0.0;
};

std::pair<double, double> solve_density_roots(const RootProblem& rp);

struct DensityAssembly {
    SolutionTriple solution;
    DensityPath density;
    std::vector<int> node_class;       // +1 R-active, -1 L-active, 0 interior
    std::vector<double> eq_residual;   // nodewise first-equation residual (mean)
    double flatoff_plus = 0.0;         // sum E[R] k+ delta
    double flatoff_minus = 0.0;        // sum E[L] k- delta
};

// Assemble the density-variant solution from a base solve without
// resistance: classify active nodes, solve the scalar roots there, set
// k = 0 in the interior, and verify the rewritten equation residuals.
DensityAssembly assemble_density_solution(const SolutionTriple& base, const ParticleEnsemble& ens,
                                          const GeneratorSpec& f, const LossPair& lp,
                                          const DmrOptions& opts);

struct UniquenessReport {
    double gap_mean_Y = 0.0;
    double gap_Y = 0.0;
    double gap_Z = 0.0;  // root-mean integrated gap
    double gap_K = 0.0;
    double noise_estimate = 0.0;
    bool pass = false;
};

UniquenessReport uniqueness_gap(const SolutionTriple& a, const SolutionTriple& b,
                                const TimeGrid& grid);

// Per-node E_emp[|Z_t|^2]; callers watch the max under N-doubling.
std::vector<double> z_moment_diagnostic(const Matrix& z);

}  // namespace mrbsde
