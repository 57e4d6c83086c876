#include "mrbsde/bsde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mrbsde/errors.hpp"

namespace mrbsde {

namespace {

std::size_t resolve_last(const ParticleEnsemble& ens, std::size_t last) {
    return last == static_cast<std::size_t>(-1) ? ens.grid.n_steps : last;
}

}  // namespace

BSDESolution solve_bsde_driver(const ParticleEnsemble& ens, std::span<const double> xi,
                               const FrozenDriver& f, const BsdeOptions& opts,
                               std::size_t first_node, std::size_t last_node) {
    const std::size_t last = resolve_last(ens, last_node);
    const std::size_t N = ens.n_particles;
    if (xi.size() != N) throw std::invalid_argument("solve_bsde_driver: xi size mismatch");
    if (first_node >= last || last > ens.grid.n_steps)
        throw std::invalid_argument("solve_bsde_driver: bad node range");

    const double delta = ens.grid.delta;
    BSDESolution sol;
    sol.first_node = first_node;
    sol.last_node = last;
    sol.ytilde = Matrix(N, ens.grid.n_nodes());
    sol.z = Matrix(N, ens.grid.n_nodes());
    for (std::size_t p = 0; p < N; ++p) sol.ytilde(p, last) = xi[p];

    std::vector<double> state(N), next(N), zt(N);
    for (std::size_t i = last; i-- > first_node;) {
        const double t = ens.grid.nodes[i];
        for (std::size_t p = 0; p < N; ++p) {
            state[p] = ens.brownian(p, i);
            next[p] = sol.ytilde(p, i + 1);
            zt[p] = next[p] * (ens.brownian(p, i + 1) - ens.brownian(p, i));
        }
        const std::vector<double> zfit = regress_conditional(zt, state, opts.basis);
        const std::vector<double> m = regress_conditional(next, state, opts.basis);
        for (std::size_t p = 0; p < N; ++p) {
            const double z = std::clamp(zfit[p] / delta, -opts.z_clamp, opts.z_clamp);
            sol.z(p, i) = z;
            if (!opts.implicit_scheme) {
                sol.ytilde(p, i) = m[p] + f(p, i, t, m[p], z) * delta;
                continue;
            }
            double y = m[p];
            bool done = false;
            for (int it = 0; it < opts.max_inner; ++it) {
                const double y_next = m[p] + f(p, i, t, y, z) * delta;
                if (std::abs(y_next - y) <= opts.inner_tol) {
                    y = y_next;
                    done = true;
                    break;
                }
                y = y_next;
            }
            if (!done) {
                std::ostringstream os;
                os << "solve_bsde_driver: inner iteration diverged at step " << i;
                throw numerical_failure(os.str());
            }
            sol.ytilde(p, i) = y;
        }
    }
    if (last > first_node)
        for (std::size_t p = 0; p < N; ++p) sol.z(p, last) = sol.z(p, last - 1);
    return sol;
}

BSDESolution solve_bsde_frozen(const ParticleEnsemble& ens, std::span<const double> xi,
                               const Matrix& c_proc, const BsdeOptions& opts,
                               std::size_t first_node, std::size_t last_node) {
    return solve_bsde_driver(
        ens, xi,
        [&c_proc](std::size_t p, std::size_t i, double, double, double) { return c_proc(p, i); },
        opts, first_node, last_node);
}

double apriori_ratio(const BSDESolution& sol, std::span<const double> xi, const Matrix& f0_proc,
                     const TimeGrid& grid) {
    const std::size_t N = sol.ytilde.rows;
    const double delta = grid.delta;
    double num = 0.0, den = 0.0;
    for (std::size_t p = 0; p < N; ++p) {
        double sup = 0.0, zint = 0.0, fint = 0.0;
        for (std::size_t i = sol.first_node; i <= sol.last_node; ++i) {
            sup = std::max(sup, std::abs(sol.ytilde(p, i)));
            if (i < sol.last_node) {
                zint += sol.z(p, i) * sol.z(p, i) * delta;
                fint += std::abs(f0_proc(p, i)) * delta;
            }
        }
        num += sup * sup + zint;
        den += xi[p] * xi[p] + fint * fint;
    }
    num /= static_cast<double>(N);
    den /= static_cast<double>(N);
    if (den <= 0.0) return num <= 1e-15 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / den;
}

double bmo_proxy(const Matrix& z, const ParticleEnsemble& ens, const RegressionBasis& basis,
                 std::size_t first_node, std::size_t last_node) {
    const std::size_t last = resolve_last(ens, last_node);
    const std::size_t N = z.rows;
    const double delta = ens.grid.delta;
    std::vector<double> tail(N, 0.0), state(N);
    double best = 0.0;
    for (std::size_t i = last; i-- > first_node;) {
        for (std::size_t p = 0; p < N; ++p) {
            tail[p] += z(p, i) * z(p, i) * delta;
            state[p] = ens.brownian(p, i);
        }
        const std::vector<double> fitted = regress_conditional(tail, state, basis);
        for (double v : fitted) best = std::max(best, v);
    }
    return best;
}

}  // namespace mrbsde
