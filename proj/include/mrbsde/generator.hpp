#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mrbsde/empirical.hpp"
#include "mrbsde/time_grid.hpp"

namespace mrbsde {

enum class Regime { Lipschitz, Quadratic };

// Driver f(t, y, mu_y, z, mu_z, k) with its declared regime constants.
struct GeneratorSpec {
    std::function<double(double t, double y, const EmpiricalMeasure& mu_y, double z,
                         const EmpiricalMeasure& mu_z, double k)>
        f;
    Regime regime = Regime::Lipschitz;
    double lambda = 0.0;
    double alpha = 0.0;                 // quadratic regime only, in [0,1)
    double H2 = 0.0;                    // bound on f(t,0,delta_0,0,delta_0,0)
    std::optional<double> H_tilde;      // bound on |f(t,y,mu,0,nu,k)|

    // Separable form f = a(t,y,mu_y,z,mu_z) + b(t, E[y], E[z], k).
    struct Separable {
        std::function<double(double t, double mean_y, double mean_z, double k)> b;
    };
    std::optional<Separable> separable;
};

enum class ResistanceKind { Identity, RunningMax, RunningIntegral, Custom };

// Path functional G_t(K): value at t depends only on K restricted to [0,t].
struct ResistanceSpec {
    ResistanceKind kind = ResistanceKind::Identity;
    double lambda_G = 1.0;
    // Custom evaluator: G(t_index, K nodes up to and including t_index, grid).
    std::function<double(std::size_t node, std::span<const double> k_prefix, const TimeGrid& grid)>
        G_eval;
};

// G evaluated at every grid node for a compensator path K (one value/node).
std::vector<double> evaluate_resistance(const ResistanceSpec& g, const TimeGrid& grid,
                                        std::span<const double> k_path);

}  // namespace mrbsde
