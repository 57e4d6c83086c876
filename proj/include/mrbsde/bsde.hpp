#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "mrbsde/ensemble.hpp"
#include "mrbsde/matrix.hpp"
#include "mrbsde/regression.hpp"

namespace mrbsde {

// Auxiliary (unreflected) BSDE solution on a node range.
struct BSDESolution {
    Matrix ytilde;  // (particle, node); columns outside the solved range are 0
    Matrix z;
    std::size_t first_node = 0;
    std::size_t last_node = 0;  // terminal column, ytilde(., last_node) = xi
};

struct BsdeOptions {
    RegressionBasis basis;
    bool implicit_scheme = true;  // driver evaluated at time t_i values
    int max_inner = 50;
    double inner_tol = 1e-10;
    double z_clamp = std::numeric_limits<double>::infinity();
};

// Driver with everything but (t, y, z) frozen; node index included so the
// caller can capture per-node frozen data without time lookups.
using FrozenDriver =
    std::function<double(std::size_t particle, std::size_t node, double t, double y, double z)>;

// Backward recursion with a per-particle frozen integrand:
//   Ytilde_i = E_i[Ytilde_{i+1}] + C_i * delta,  Z_i = E_i[Ytilde_{i+1} dB_i]/delta.
BSDESolution solve_bsde_frozen(const ParticleEnsemble& ens, std::span<const double> xi,
                               const Matrix& c_proc, const BsdeOptions& opts,
                               std::size_t first_node = 0,
                               std::size_t last_node = static_cast<std::size_t>(-1));

// Implicit backward Euler with an inner fixed point in y; z enters through
// the regression estimate of the current step (clamped at opts.z_clamp).
BSDESolution solve_bsde_driver(const ParticleEnsemble& ens, std::span<const double> xi,
                               const FrozenDriver& f, const BsdeOptions& opts,
                               std::size_t first_node = 0,
                               std::size_t last_node = static_cast<std::size_t>(-1));

// Empirical ratio of E[sup|Y|^2] + E[int |Z|^2 ds] against
// E[|xi|^2 + (int |f_s(0)| ds)^2]; a boundedness diagnostic, not a constant.
double apriori_ratio(const BSDESolution& sol, std::span<const double> xi, const Matrix& f0_proc,
                     const TimeGrid& grid);

// Grid proxy of the BMO norm squared: max over nodes t of the per-particle
// max of the regression estimate of E_t[sum_{s>=t} |Z_s|^2 delta].
double bmo_proxy(const Matrix& z, const ParticleEnsemble& ens, const RegressionBasis& basis,
                 std::size_t first_node = 0, std::size_t last_node = static_cast<std::size_t>(-1));

}  // namespace mrbsde
