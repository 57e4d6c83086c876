#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mrbsde/matrix.hpp"
#include "mrbsde/time_grid.hpp"

namespace mrbsde {

// N Brownian particle paths on a time grid plus named per-node value arrays.
// Generation is counter-based per (seed, particle, step), so paths are
// reproducible bit-for-bit and independent of evaluation order.
struct ParticleEnsemble {
    TimeGrid grid;
    std::size_t n_particles = 0;
    std::uint64_t seed = 0;
    Matrix brownian;  // (particle, node), brownian(., 0) = 0
    std::map<std::string, Matrix> values;
};

ParticleEnsemble simulate_brownian(const TimeGrid& grid, std::size_t n_particles,
                                   std::uint64_t seed);

// Empirical sanity of the increments: mean within 5/sqrt(N) of 0 and
// variance within 5*delta/sqrt(N) of delta, for every step.
bool validate_increments(const ParticleEnsemble& ens, std::string* why = nullptr);

}  // namespace mrbsde
