#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mrbsde {

// Grid function K with its minimal (Jordan) decomposition K = K_up - K_down.
// K_up plays the role of K^r (or K^+), K_down of K^l (or K^-).
struct BVPath {
    std::vector<double> K;
    std::vector<double> K_up;
    std::vector<double> K_down;

    std::size_t size() const { return K.size(); }

    double total_variation() const {
        if (K_up.empty()) return 0.0;
        return (K_up.back() - K_up.front()) + (K_down.back() - K_down.front()) +
               K_up.front() + K_down.front();
    }
};

// Minimal decomposition into cumulative positive/negative increment parts.
inline BVPath bv_decompose(const std::vector<double>& k_values) {
    if (k_values.empty()) throw std::invalid_argument("bv_decompose: empty input");
    if (k_values.front() != 0.0)
        throw std::invalid_argument("bv_decompose: K[0] must be 0");
    BVPath p;
    p.K = k_values;
    p.K_up.assign(k_values.size(), 0.0);
    p.K_down.assign(k_values.size(), 0.0);
    for (std::size_t i = 1; i < k_values.size(); ++i) {
        const double d = k_values[i] - k_values[i - 1];
        p.K_up[i] = p.K_up[i - 1] + std::max(d, 0.0);
        p.K_down[i] = p.K_down[i - 1] + std::max(-d, 0.0);
    }
    return p;
}

// Decomposition allowing a nonzero first value, treated as a jump from
// the implicit pre-start value 0 (the K_{0-} = 0 convention). Used by the
// Skorokhod solvers when the input violates the constraint at time 0.
inline BVPath bv_decompose_with_initial_jump(const std::vector<double>& k_values) {
    if (k_values.empty()) throw std::invalid_argument("bv_decompose: empty input");
    BVPath p;
    p.K = k_values;
    p.K_up.assign(k_values.size(), 0.0);
    p.K_down.assign(k_values.size(), 0.0);
    p.K_up[0] = std::max(k_values[0], 0.0);
    p.K_down[0] = std::max(-k_values[0], 0.0);
    for (std::size_t i = 1; i < k_values.size(); ++i) {
        const double d = k_values[i] - k_values[i - 1];
        p.K_up[i] = p.K_up[i - 1] + std::max(d, 0.0);
        p.K_down[i] = p.K_down[i - 1] + std::max(-d, 0.0);
    }
    return p;
}

}  // namespace mrbsde
