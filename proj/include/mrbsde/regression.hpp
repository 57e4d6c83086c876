#pragma once

#include <span>
#include <vector>

namespace mrbsde {

// Polynomial-in-state basis for the regression proxy of E_t[.].
struct RegressionBasis {
    int degree = 3;
    double ridge = 1e-8;
};

// Least-squares projection of target onto polynomials of state, with ridge
// penalty on the normal equations. Returns the fitted value per particle.
// A (numerically) constant state collapses to the plain sample mean.
std::vector<double> regress_conditional(std::span<const double> target,
                                        std::span<const double> state,
                                        const RegressionBasis& basis);

}  // namespace mrbsde
