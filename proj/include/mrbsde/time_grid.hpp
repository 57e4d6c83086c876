#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mrbsde {

// Uniform partition of [t_start, t_end] with n_steps steps (n_steps + 1 nodes).
struct TimeGrid {
    double t_start = 0.0;
    double t_end = 1.0;
    std::size_t n_steps = 1;
    double delta = 1.0;
    std::vector<double> nodes;

    std::size_t n_nodes() const { return n_steps + 1; }
    double span() const { return t_end - t_start; }

    // Nearest node index for a node-aligned time.
    std::size_t index_of(double t) const {
        const double raw = (t - t_start) / delta;
        const long i = std::lround(raw);
        if (i < 0) return 0;
        if (static_cast<std::size_t>(i) > n_steps) return n_steps;
        return static_cast<std::size_t>(i);
    }
};

inline TimeGrid make_grid(double t_start, double t_end, std::size_t n_steps) {
    if (!(t_end > t_start)) throw std::invalid_argument("make_grid: t_end must exceed t_start");
    if (n_steps < 1) throw std::invalid_argument("make_grid: n_steps must be >= 1");
    TimeGrid g;
    g.t_start = t_start;
    g.t_end = t_end;
    g.n_steps = n_steps;
    g.delta = (t_end - t_start) / static_cast<double>(n_steps);
    g.nodes.resize(n_steps + 1);
    for (std::size_t i = 0; i <= n_steps; ++i)
        g.nodes[i] = t_start + g.delta * static_cast<double>(i);
    g.nodes[n_steps] = t_end;
    return g;
}

}  // namespace mrbsde
