#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mrbsde {

// A numeric routine could not complete (bracket expansion exhausted,
// singular normal equations, inner iteration divergence).
class numerical_failure : public std::runtime_error {
public:
    explicit numerical_failure(const std::string& what) : std::runtime_error(what) {}
};

// An iterative solver ran out of its iteration budget. Carries the
// per-iteration distance history so callers can inspect the decay.
class convergence_failure : public std::runtime_error {
public:
    convergence_failure(const std::string& what, std::vector<double> history,
                        int failed_index = -1)
        : std::runtime_error(what), history(std::move(history)), failed_index(failed_index) {}

    std::vector<double> history;
    int failed_index;
};

// The declared model structure is violated (monotone solvability of a
// scalar root equation, ambiguous active-set classification).
class model_error : public std::runtime_error {
public:
    explicit model_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mrbsde
