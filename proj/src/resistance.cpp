#include "mrbsde/resistance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mrbsde/errors.hpp"
#include "mrbsde/skorokhod.hpp"

namespace mrbsde {

namespace {

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

SolutionTriple inner_solve(const ParticleEnsemble& ens, std::span<const double> xi,
                           const GeneratorSpec& f, const LossPair& lp,
                           std::span<const double> g_nodes, const DmrOptions& opts) {
    if (f.regime == Regime::Quadratic) return solve_quadratic_dmr(ens, xi, f, lp, g_nodes, opts);
    return picard_solve(ens, xi, f, lp, g_nodes, opts).first;
}

}  // namespace

SolutionTriple solve_with_resistance(const ParticleEnsemble& ens, std::span<const double> xi,
                                     const GeneratorSpec& f, const LossPair& lp,
                                     const ResistanceSpec& g, const OuterOptions& opts,
                                     std::span<const double> k0, OuterHistory* history) {
    const TimeGrid& grid = ens.grid;
    std::vector<double> k_cur(grid.n_nodes(), 0.0);
    if (!k0.empty()) {
        if (k0.size() != grid.n_nodes())
            throw std::invalid_argument("solve_with_resistance: k0 size mismatch");
        k_cur.assign(k0.begin(), k0.end());
    }
    OuterHistory local;
    OuterHistory& hist = history ? *history : local;
    hist = OuterHistory{};

    bool damp = false;
    for (int j = 0; j < opts.max_outer; ++j) {
        const std::vector<double> g_nodes = evaluate_resistance(g, grid, k_cur);
        SolutionTriple sol = inner_solve(ens, xi, f, lp, g_nodes, opts.inner);
        std::vector<double> k_next = sol.K.K;
        double diff = 0.0;
        for (std::size_t i = 0; i < k_next.size(); ++i)
            diff = std::max(diff, std::abs(k_next[i] - k_cur[i]));
        hist.diffs.push_back(diff);
        hist.iterations = j + 1;
        if (diff < opts.tol) return sol;
        if (opts.adaptive_damping && !damp && hist.diffs.size() >= 2 &&
            hist.diffs.back() > hist.diffs[hist.diffs.size() - 2]) {
            damp = true;
            hist.damped = true;
        }
        if (damp)
            for (std::size_t i = 0; i < k_next.size(); ++i)
                k_next[i] = 0.5 * (k_next[i] + k_cur[i]);
        k_cur = std::move(k_next);
    }
    throw convergence_failure("solve_with_resistance: outer iteration did not converge",
                              hist.diffs);
}

DensityPath extract_density(const BVPath& K, const TimeGrid& grid, bool central) {
    const std::size_t m = K.size();
    if (m != grid.n_nodes())
        throw std::invalid_argument("extract_density: path size does not match grid");
    DensityPath d;
    d.k.assign(m, 0.0);
    if (m >= 2) {
        for (std::size_t i = 0; i + 1 < m; ++i) d.k[i] = (K.K[i + 1] - K.K[i]) / grid.delta;
        d.k[m - 1] = d.k[m - 2];
        if (central)
            for (std::size_t i = 1; i + 1 < m; ++i)
                d.k[i] = (K.K[i + 1] - K.K[i - 1]) / (2.0 * grid.delta);
    }
    d.k_plus.resize(m);
    d.k_minus.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        d.k_plus[i] = std::max(d.k[i], 0.0);
        d.k_minus[i] = std::max(-d.k[i], 0.0);
        d.max_abs_k = std::max(d.max_abs_k, std::abs(d.k[i]));
    }
    return d;
}

std::pair<double, double> solve_density_roots(const RootProblem& rp) {
    if (rp.target_plus < 0.0 || rp.target_minus < 0.0)
        throw std::invalid_argument("solve_density_roots: negative target");
    const double b0 = rp.b_bar(0.0);

    auto solve_one = [&](const std::function<double(double)>& g, double target) {
        if (target == 0.0) return 0.0;
        // g(0) = -target < 0; expand the upper end until the sign flips.
        double hi = std::max(1.0, 2.0 * target);
        int tries = 0;
        while (g(hi) < 0.0) {
            hi *= 2.0;
            if (++tries > 60)
                throw model_error("solve_density_roots: no bracket (solvability violated)");
        }
        double lo = 0.0;
        for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (g(mid) > 0.0)
                hi = mid;
            else
                lo = mid;
        }
        return 0.5 * (lo + hi);
    };

    const double kp = solve_one(
        [&](double k) { return rp.b_bar(k) - b0 + k - rp.target_plus; }, rp.target_plus);
    const double km = solve_one(
        [&](double k) { return b0 - rp.b_bar(-k) + k - rp.target_minus; }, rp.target_minus);
    return {kp, km};
}

DensityAssembly assemble_density_solution(const SolutionTriple& base, const ParticleEnsemble& ens,
                                          const GeneratorSpec& f, const LossPair& lp,
                                          const DmrOptions& opts) {
    if (!f.separable)
        throw std::invalid_argument("assemble_density_solution: generator must be separable");
    const TimeGrid& grid = ens.grid;
    const std::size_t N = ens.n_particles;
    const std::size_t m = grid.n_nodes();

    DensityAssembly out;
    const DensityPath tilde = extract_density(base.K, grid);

    out.node_class.assign(m, 0);
    out.eq_residual.assign(m, 0.0);
    DensityPath k;
    k.k.assign(m, 0.0);
    k.k_plus.assign(m, 0.0);
    k.k_minus.assign(m, 0.0);

    for (std::size_t i = 0; i < m; ++i) {
        const double t = grid.nodes[i];
        // Per-node activity tolerance from the loss sample spread.
        double sl = 0.0, sl2 = 0.0, sr = 0.0, sr2 = 0.0, my = 0.0, mz = 0.0;
        for (std::size_t p = 0; p < N; ++p) {
            const double lv = lp.L_eval(t, base.Y(p, i), base.Y(p, grid.n_steps));
            const double rv = lp.R_eval(t, base.Y(p, i), base.Y(p, grid.n_steps));
            sl += lv;
            sl2 += lv * lv;
            sr += rv;
            sr2 += rv * rv;
            my += base.Y(p, i);
            mz += base.Z(p, i);
        }
        const double nn = static_cast<double>(N);
        const double mean_l = sl / nn;
        const double mean_r = sr / nn;
        my /= nn;
        mz /= nn;
        const double tol_l =
            std::max(1e-9, opts.mc_kappa * std::sqrt(std::max(0.0, sl2 / nn - mean_l * mean_l) / nn));
        const double tol_r =
            std::max(1e-9, opts.mc_kappa * std::sqrt(std::max(0.0, sr2 / nn - mean_r * mean_r) / nn));

        const bool l_active = std::abs(mean_l) <= tol_l;
        const bool r_active = std::abs(mean_r) <= tol_r;
        if (l_active && r_active)
            throw model_error("assemble_density_solution: both constraints active (separation violated)");

        RootProblem rp;
        rp.b_bar = [&f, t, my, mz](double kk) { return f.separable->b(t, my, mz, kk); };
        const double b0 = rp.b_bar(0.0);

        if (r_active && tilde.k_plus[i] > 0.0) {
            out.node_class[i] = 1;
            rp.target_plus = tilde.k_plus[i];
            k.k_plus[i] = solve_density_roots(rp).first;
            k.k[i] = k.k_plus[i];
        } else if (l_active && tilde.k_minus[i] > 0.0) {
            out.node_class[i] = -1;
            rp.target_minus = tilde.k_minus[i];
            k.k_minus[i] = solve_density_roots(rp).second;
            k.k[i] = -k.k_minus[i];
        }
        k.max_abs_k = std::max(k.max_abs_k, std::abs(k.k[i]));
        out.eq_residual[i] = rp.b_bar(k.k[i]) - b0 + k.k[i] - tilde.k[i];
        out.flatoff_plus += mean_r * k.k_plus[i] * grid.delta;
        out.flatoff_minus += mean_l * k.k_minus[i] * grid.delta;
    }

    out.solution = base;
    std::vector<double> k_cum(m, 0.0);
    for (std::size_t i = 0; i + 1 < m; ++i) k_cum[i + 1] = k_cum[i] + k.k[i] * grid.delta;
    out.solution.K = bv_decompose(k_cum);
    out.density = std::move(k);
    return out;
}

UniquenessReport uniqueness_gap(const SolutionTriple& a, const SolutionTriple& b,
                                const TimeGrid& grid) {
    UniquenessReport rep;
    const std::size_t N = a.Y.rows;
    double z_acc = 0.0;
    double noise = 0.0;
    for (std::size_t i = 0; i < grid.n_nodes(); ++i) {
        rep.gap_mean_Y =
            std::max(rep.gap_mean_Y, std::abs(column_mean(a.Y, i) - column_mean(b.Y, i)));
        noise = std::max(noise, std::sqrt(column_variance(a.Y, i) / static_cast<double>(N)));
        for (std::size_t p = 0; p < N; ++p) {
            rep.gap_Y = std::max(rep.gap_Y, std::abs(a.Y(p, i) - b.Y(p, i)));
            if (i < grid.n_steps) {
                const double dz = a.Z(p, i) - b.Z(p, i);
                z_acc += dz * dz * grid.delta;
            }
        }
        rep.gap_K = std::max(rep.gap_K, std::abs(a.K.K[i] - b.K.K[i]));
    }
    rep.gap_Z = std::sqrt(z_acc / static_cast<double>(N));
    rep.noise_estimate = std::max(noise, 1e-8);
    const double worst = std::max({rep.gap_mean_Y, rep.gap_Y, rep.gap_Z, rep.gap_K});
    rep.pass = worst <= 5.0 * rep.noise_estimate;
    return rep;
}

std::vector<double> z_moment_diagnostic(const Matrix& z) {
    std::vector<double> out(z.cols, 0.0);
    for (std::size_t i = 0; i < z.cols; ++i) {
        double s = 0.0;
        for (std::size_t p = 0; p < z.rows; ++p) s += z(p, i) * z(p, i);
        out[i] = s / static_cast<double>(z.rows);
    }
    return out;
}

}  // namespace mrbsde
