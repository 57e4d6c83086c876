#include "mrbsde/ensemble.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mrbsde {

namespace {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Open-interval uniform from the top 53 bits, never 0 or 1.
double to_unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53 + 0x1.0p-54; }

// Counter-based standard normal: the value depends only on (seed, particle,
// step), so any evaluation order reproduces the same paths.
double counter_gauss(std::uint64_t seed, std::uint64_t particle, std::uint64_t step) {
    const std::uint64_t h1 = mix64(mix64(mix64(seed) ^ (particle + 1)) ^ (step + 1));
    const std::uint64_t h2 = mix64(h1);
    const double u1 = to_unit(h1);
    const double u2 = to_unit(h2);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

ParticleEnsemble simulate_brownian(const TimeGrid& grid, std::size_t n_particles,
                                   std::uint64_t seed) {
    if (n_particles < 2)
        throw std::invalid_argument("simulate_brownian: need at least 2 particles");
    ParticleEnsemble ens;
    ens.grid = grid;
    ens.n_particles = n_particles;
    ens.seed = seed;
    ens.brownian = Matrix(n_particles, grid.n_nodes());
    const double sq = std::sqrt(grid.delta);
    for (std::size_t p = 0; p < n_particles; ++p) {
        double b = 0.0;
        ens.brownian(p, 0) = 0.0;
        for (std::size_t i = 0; i < grid.n_steps; ++i) {
            b += sq * counter_gauss(seed, p, i);
            ens.brownian(p, i + 1) = b;
        }
    }
    return ens;
}

bool validate_increments(const ParticleEnsemble& ens, std::string* why) {
    const std::size_t n = ens.n_particles;
    const double delta = ens.grid.delta;
    const double root_n = std::sqrt(static_cast<double>(n));
    for (std::size_t i = 0; i < ens.grid.n_steps; ++i) {
        double s = 0.0, s2 = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            const double d = ens.brownian(p, i + 1) - ens.brownian(p, i);
            s += d;
            s2 += d * d;
        }
        const double mean = s / static_cast<double>(n);
        const double var = s2 / static_cast<double>(n) - mean * mean;
        if (std::abs(mean) > 5.0 / root_n || std::abs(var - delta) > 5.0 * delta / root_n) {
            if (why) {
                std::ostringstream os;
                os << "step " << i << ": mean " << mean << ", var " << var << " (delta " << delta
                   << ")";
                *why = os.str();
            }
            return false;
        }
    }
    return true;
}

}  // namespace mrbsde
