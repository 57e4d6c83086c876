#include "mrbsde/meanreflect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "mrbsde/errors.hpp"
#include "mrbsde/skorokhod.hpp"

namespace mrbsde {

namespace {

std::size_t resolve_last(const TimeGrid& grid, std::size_t last) {
    return last == static_cast<std::size_t>(-1) ? grid.n_steps : last;
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

struct IterateDistances {
    double dY;
    double dZ;
    double dK;
    double total() const { return dY + dZ + dK; }
};

IterateDistances distances(const Matrix& y_new, const Matrix& y_old, const Matrix& z_new,
                           const Matrix& z_old, std::span<const double> k_new,
                           std::span<const double> k_old, const TimeGrid& grid, std::size_t first,
                           std::size_t last) {
    IterateDistances d{0.0, 0.0, 0.0};
    double z_acc = 0.0;
    for (std::size_t p = 0; p < y_new.rows; ++p) {
        for (std::size_t i = first; i <= last; ++i) {
            d.dY = std::max(d.dY, std::abs(y_new(p, i) - y_old(p, i)));
            if (i < last) {
                const double dz = z_new(p, i) - z_old(p, i);
                z_acc += dz * dz * grid.delta;
            }
        }
    }
    d.dZ = std::sqrt(z_acc / static_cast<double>(y_new.rows));
    for (std::size_t i = first; i <= last; ++i)
        d.dK = std::max(d.dK, std::abs(k_new[i] - k_old[i]));
    return d;
}

}  // namespace

MeanLossPair make_mean_losses(const LossPair& lp, const TimeGrid& grid, const Matrix& ytilde,
                              std::span<const double> marks, std::size_t first_node,
                              std::size_t last_node) {
    const std::size_t last = resolve_last(grid, last_node);
    const std::size_t N = ytilde.rows;
    MeanLossPair mlp;
    mlp.c = lp.c;
    mlp.C = lp.C;
    mlp.separation = lp.separation;

    if (lp.affine && lp.c == lp.C) {
        // Slope-c losses: the mean loss is the per-node offset plus c*x.
        auto off_l = std::make_shared<std::vector<double>>(grid.n_nodes(), 0.0);
        auto off_r = std::make_shared<std::vector<double>>(grid.n_nodes(), 0.0);
        for (std::size_t i = first_node; i <= last; ++i) {
            const double m = column_mean(ytilde, i);
            const double t = grid.nodes[i];
            double sl = 0.0, sr = 0.0;
            for (std::size_t p = 0; p < N; ++p) {
                const double d = ytilde(p, i) - m;
                sl += lp.L_eval(t, d, marks[p]);
                sr += lp.R_eval(t, d, marks[p]);
            }
            (*off_l)[i] = sl / static_cast<double>(N);
            (*off_r)[i] = sr / static_cast<double>(N);
        }
        const double slope = lp.c;
        mlp.l = [grid, off_l, slope](double t, double x) {
            return (*off_l)[grid.index_of(t)] + slope * x;
        };
        mlp.r = [grid, off_r, slope](double t, double x) {
            return (*off_r)[grid.index_of(t)] + slope * x;
        };
        return mlp;
    }

    auto shifts = std::make_shared<Matrix>(N, grid.n_nodes());
    auto mk = std::make_shared<std::vector<double>>(marks.begin(), marks.end());
    for (std::size_t i = first_node; i <= last; ++i) {
        const double m = column_mean(ytilde, i);
        for (std::size_t p = 0; p < N; ++p) (*shifts)(p, i) = ytilde(p, i) - m;
    }
    auto mean_of = [grid, shifts, mk](const std::function<double(double, double, double)>& eval,
                                      double t, double x) {
        const std::size_t i = grid.index_of(t);
        double s = 0.0;
        for (std::size_t p = 0; p < shifts->rows; ++p)
            s += eval(t, (*shifts)(p, i) + x, (*mk)[p]);
        return s / static_cast<double>(shifts->rows);
    };
    mlp.l = [mean_of, eval = lp.L_eval](double t, double x) { return mean_of(eval, t, x); };
    mlp.r = [mean_of, eval = lp.R_eval](double t, double x) { return mean_of(eval, t, x); };
    return mlp;
}

SolutionTriple mean_reflect_bsde(const ParticleEnsemble& ens, const BSDESolution& aux,
                                 const LossPair& lp, const DmrOptions& opts) {
    const std::size_t first = aux.first_node;
    const std::size_t last = aux.last_node;
    const std::size_t N = ens.n_particles;
    const TimeGrid& grid = ens.grid;
    const std::vector<double> marks = column_copy(aux.ytilde, last);

    const MeanLossPair mlp = make_mean_losses(lp, grid, aux.ytilde, marks, first, last);

    std::vector<double> means(grid.n_nodes(), 0.0);
    double max_std = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
        means[i] = column_mean(aux.ytilde, i);
        max_std = std::max(max_std, std::sqrt(column_variance(aux.ytilde, i)));
    }
    const double mc_tol = std::max(
        1e-9, opts.mc_kappa * std::max(lp.C, 1.0) * max_std / std::sqrt(static_cast<double>(N)));

    const double T = grid.nodes[last];
    const double a = means[last];
    if (mlp.l(T, a) > mc_tol || mlp.r(T, a) < -mc_tol)
        throw std::invalid_argument("mean_reflect_bsde: terminal data violates mean constraints");

    BSPProblem bp;
    bp.grid = make_grid(grid.nodes[first], grid.nodes[last], last - first);
    bp.s.resize(last - first + 1);
    for (std::size_t j = 0; j <= last - first; ++j) bp.s[j] = means[first] - means[first + j];
    bp.a = a;
    bp.l = mlp.l;
    bp.r = mlp.r;
    bp.c = mlp.c;
    bp.C = mlp.C;
    bp.separation = mlp.separation;
    bp.anchor_tol = mc_tol;
    const SPSolution sp = solve_bsp(bp);

    SolutionTriple out;
    out.Y = Matrix(N, grid.n_nodes());
    out.Z = Matrix(N, grid.n_nodes());
    const double k_end = sp.K.K.back();
    for (std::size_t i = first; i <= last; ++i) {
        const double shift = k_end - sp.K.K[i - first];
        for (std::size_t p = 0; p < N; ++p) {
            out.Y(p, i) = aux.ytilde(p, i) + shift;
            out.Z(p, i) = aux.z(p, i);
        }
    }

    std::vector<double> k_full(grid.n_nodes(), 0.0);
    for (std::size_t i = first; i <= last; ++i) k_full[i] = sp.K.K[i - first];
    for (std::size_t i = last + 1; i < grid.n_nodes(); ++i) k_full[i] = k_end;
    out.K = bv_decompose(k_full);

    Diagnostics& d = out.diag;
    d.res_L.assign(grid.n_nodes(), 0.0);
    d.res_R.assign(grid.n_nodes(), 0.0);
    d.z2.assign(grid.n_nodes(), 0.0);
    for (std::size_t i = first; i <= last; ++i) {
        const double t = grid.nodes[i];
        d.res_L[i] = mlp.l(t, sp.x[i - first]);
        d.res_R[i] = mlp.r(t, sp.x[i - first]);
        double zz = 0.0;
        for (std::size_t p = 0; p < N; ++p) zz += out.Z(p, i) * out.Z(p, i);
        d.z2[i] = zz / static_cast<double>(N);
        for (std::size_t p = 0; p < N; ++p) d.sup_Y = std::max(d.sup_Y, std::abs(out.Y(p, i)));
    }
    d.flatoff_up = sp.flatoff_up;
    d.flatoff_down = sp.flatoff_down;
    d.mc_tol = mc_tol;
    d.sup_K = max_abs(out.K.K);
    return out;
}

SolutionTriple solve_constant_driver_dmr(const ParticleEnsemble& ens, std::span<const double> xi,
                                         const Matrix& c_proc, const LossPair& lp,
                                         const DmrOptions& opts) {
    const BSDESolution aux = solve_bsde_frozen(ens, xi, c_proc, opts.bsde);
    return mean_reflect_bsde(ens, aux, lp, opts);
}

SolutionTriple gamma_map(const Matrix& y_frozen, const Matrix& z_frozen,
                         std::span<const double> g_nodes, const ParticleEnsemble& ens,
                         std::span<const double> xi, const GeneratorSpec& f, const LossPair& lp,
                         const DmrOptions& opts) {
    const TimeGrid& grid = ens.grid;
    const std::size_t N = ens.n_particles;
    Matrix c_proc(N, grid.n_nodes());
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        const EmpiricalMeasure mu_y(column_copy(y_frozen, i));
        const EmpiricalMeasure mu_z(column_copy(z_frozen, i));
        const double g = g_nodes.empty() ? 0.0 : g_nodes[i];
        const double t = grid.nodes[i];
        for (std::size_t p = 0; p < N; ++p)
            c_proc(p, i) = f.f(t, y_frozen(p, i), mu_y, z_frozen(p, i), mu_z, g);
    }
    return solve_constant_driver_dmr(ens, xi, c_proc, lp, opts);
}

std::pair<SolutionTriple, PicardHistory> picard_solve(const ParticleEnsemble& ens,
                                                      std::span<const double> xi,
                                                      const GeneratorSpec& f, const LossPair& lp,
                                                      std::span<const double> g_nodes,
                                                      const DmrOptions& opts) {
    const TimeGrid& grid = ens.grid;
    const std::size_t N = ens.n_particles;
    const double tol_eff = opts.picard_tol * (1.0 + max_abs(xi));

    Matrix y_prev(N, grid.n_nodes());
    Matrix z_prev(N, grid.n_nodes());
    std::vector<double> k_prev(grid.n_nodes(), 0.0);
    PicardHistory hist;

    for (int it = 0; it < opts.max_picard; ++it) {
        SolutionTriple sol = gamma_map(y_prev, z_prev, g_nodes, ens, xi, f, lp, opts);
        const IterateDistances d = distances(sol.Y, y_prev, sol.Z, z_prev, sol.K.K, k_prev, grid,
                                             0, grid.n_steps);
        hist.steps.push_back({d.dY, d.dZ, d.dK});
        const auto totals = hist.totals();
        if (totals.size() >= 2 && totals[totals.size() - 2] > 0.0)
            hist.last_ratio = totals.back() / totals[totals.size() - 2];
        if (d.total() < tol_eff) {
            sol.diag.picard = hist;
            return {std::move(sol), hist};
        }
        y_prev = sol.Y;
        z_prev = sol.Z;
        k_prev = sol.K.K;
    }
    throw convergence_failure("picard_solve: no convergence within iteration budget",
                              hist.totals());
}

double compute_A0(double H, double M, double c, double C, double lambda) {
    return (3.0 + 24.0 * C / c) * H + 2.0 * M / c +
           (2.0 * H / lambda + 1.0 / 3.0) * std::exp(9.0 * lambda * H);
}

double compute_barH(double H, double H_hat, double lambda, double T, double C, double c,
                    double M) {
    const double bar_h1 = (H + H_hat * T) * std::exp(lambda * T);
    return (1.0 + 3.0 * C / c) * bar_h1 + 3.0 * C / c * H + M / c;
}

std::pair<double, double> compute_slab_lengths(QuadraticConstants& qc, double A_tilde) {
    if (qc.alpha < 0.0 || qc.alpha >= 1.0)
        throw std::invalid_argument("compute_slab_lengths: alpha must lie in [0,1)");
    const double H = qc.H;
    const double lam = qc.lambda;
    const double A = A_tilde;
    if (!(lam > 0.0)) {
        qc.A_hat = 1.0 + 36.0 * qc.C / qc.c + 2.0;
        qc.delta_A = std::numeric_limits<double>::infinity();
        qc.delta_hat_A = std::numeric_limits<double>::infinity();
        return {qc.delta_A, qc.delta_hat_A};
    }
    const double inv_om = 1.0 / (1.0 - qc.alpha);
    const double d1 = H / (9.0 * lam * A);
    const double d2 = H * H / (9.0 * lam * lam * A * A);
    const double d3 = std::pow(H / (3.0 * lam * std::pow(A, 1.0 + qc.alpha)), 2.0 * inv_om);
    qc.delta_A = std::min({d1, d2, d3});
    qc.A_hat =
        1.0 + 36.0 * qc.C / qc.c + 2.0 * std::sqrt(1.0 + 12.0 * lam * lam + 24.0 * lam * lam * A * A);
    const double e1 = 1.0 / (4.0 * qc.A_hat * lam);
    const double e2 = 1.0 / (12.0 * qc.A_hat * lam);
    const double e3 = std::pow(
        1.0 / (24.0 * std::pow(A, 2.0 * qc.alpha) * qc.A_hat * qc.A_hat * lam * lam), inv_om);
    qc.delta_hat_A = std::min({e1, e2, e3, qc.delta_A});
    return {qc.delta_A, qc.delta_hat_A};
}

QuadraticConstants plan_quadratic(double H, double H_tilde, double H_hat, double M, double c,
                                  double C, double lambda, double alpha, double T) {
    QuadraticConstants qc;
    qc.H = H;
    qc.H_tilde = H_tilde;
    qc.H_hat = H_hat;
    qc.M = M;
    qc.c = c;
    qc.C = C;
    qc.lambda = lambda;
    qc.alpha = alpha;
    qc.bar_H1 = (H + H_hat * T) * std::exp(lambda * T);
    qc.bar_H = compute_barH(H, H_hat, lambda, T, C, c, M);
    qc.A_tilde0 = lambda > 0.0 ? compute_A0(qc.bar_H, M, c, C, lambda)
                               : std::numeric_limits<double>::infinity();
    QuadraticConstants work = qc;
    work.H = qc.bar_H;
    if (lambda > 0.0 && std::isfinite(qc.A_tilde0)) {
        compute_slab_lengths(work, qc.A_tilde0);
        qc.A_hat = work.A_hat;
        qc.delta_A = work.delta_A;
        qc.delta_hat_A = work.delta_hat_A;
    } else if (!(lambda > 0.0)) {
        compute_slab_lengths(work, qc.A_tilde0);
        qc.A_hat = work.A_hat;
        qc.delta_A = work.delta_A;
        qc.delta_hat_A = work.delta_hat_A;
    } else {
        // Bound blow-up: fall back to per-step slabs.
        qc.A_hat = std::numeric_limits<double>::infinity();
        qc.delta_A = 0.0;
        qc.delta_hat_A = 0.0;
    }
    return qc;
}

SolutionTriple solve_quadratic_dmr(const ParticleEnsemble& ens, std::span<const double> xi,
                                   const GeneratorSpec& f, const LossPair& lp,
                                   std::span<const double> g_nodes, const DmrOptions& opts,
                                   QuadraticConstants* qc_out) {
    if (!f.H_tilde)
        throw std::invalid_argument("solve_quadratic_dmr: generator needs the H_tilde bound");
    const TimeGrid& grid = ens.grid;
    const std::size_t N = ens.n_particles;
    const std::size_t n = grid.n_steps;

    const double H = std::max({max_abs(xi), f.H2, 1e-8});
    const double sup_g = g_nodes.empty() ? 0.0 : max_abs(g_nodes);
    const double H_hat = *f.H_tilde + f.lambda * sup_g;
    const QuadraticConstants qc = plan_quadratic(H, *f.H_tilde, H_hat, lp.M_bound, lp.c, lp.C,
                                                 f.lambda, f.alpha, grid.span());
    if (qc_out) *qc_out = qc;

    std::size_t m_nodes = n;
    const double slab_len =
        std::max(qc.delta_hat_A, grid.delta * static_cast<double>(opts.slab_min_nodes));
    if (std::isfinite(slab_len) && slab_len < grid.span())
        m_nodes = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(slab_len / grid.delta + 1e-9)));

    SolutionTriple out;
    out.Y = Matrix(N, grid.n_nodes());
    out.Z = Matrix(N, grid.n_nodes());
    std::vector<double> terminal(xi.begin(), xi.end());
    std::vector<std::pair<std::size_t, std::vector<double>>> slab_ks;  // (start node, local K)
    PicardHistory hist;

    std::size_t b = n;
    int slab_index = 0;
    while (b > 0) {
        const std::size_t a = b > m_nodes ? b - m_nodes : 0;
        const double tol_eff = opts.picard_tol * (1.0 + max_abs(terminal));

        Matrix y_frozen(N, grid.n_nodes());
        Matrix z_frozen(N, grid.n_nodes());
        std::vector<double> k_prev(grid.n_nodes(), 0.0);
        bool converged = false;
        SolutionTriple sol;
        for (int it = 0; it < opts.max_picard; ++it) {
            std::vector<EmpiricalMeasure> mu_y, mu_z;
            mu_y.reserve(b - a + 1);
            mu_z.reserve(b - a + 1);
            for (std::size_t i = a; i <= b; ++i) {
                mu_y.emplace_back(column_copy(y_frozen, i));
                mu_z.emplace_back(column_copy(z_frozen, i));
            }
            const FrozenDriver fd = [&](std::size_t p, std::size_t i, double t, double,
                                        double z) {
                const double g = g_nodes.empty() ? 0.0 : g_nodes[i];
                return f.f(t, y_frozen(p, i), mu_y[i - a], z, mu_z[i - a], g);
            };
            const BSDESolution aux = solve_bsde_driver(ens, terminal, fd, opts.bsde, a, b);
            sol = mean_reflect_bsde(ens, aux, lp, opts);
            const IterateDistances d =
                distances(sol.Y, y_frozen, sol.Z, z_frozen, sol.K.K, k_prev, grid, a, b);
            hist.steps.push_back({d.dY, d.dZ, d.dK});
            for (std::size_t i = a; i <= b; ++i)
                for (std::size_t p = 0; p < N; ++p) {
                    y_frozen(p, i) = sol.Y(p, i);
                    z_frozen(p, i) = sol.Z(p, i);
                }
            k_prev = sol.K.K;
            if (d.total() < tol_eff) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            std::ostringstream os;
            os << "solve_quadratic_dmr: slab " << slab_index << " did not converge";
            throw convergence_failure(os.str(), hist.totals(), slab_index);
        }
        for (std::size_t i = a; i <= b; ++i)
            for (std::size_t p = 0; p < N; ++p) {
                out.Y(p, i) = sol.Y(p, i);
                out.Z(p, i) = sol.Z(p, i);
            }
        std::vector<double> k_loc(sol.K.K.begin() + static_cast<std::ptrdiff_t>(a),
                                  sol.K.K.begin() + static_cast<std::ptrdiff_t>(b) + 1);
        slab_ks.emplace_back(a, std::move(k_loc));
        terminal.resize(N);
        for (std::size_t p = 0; p < N; ++p) terminal[p] = sol.Y(p, a);
        b = a;
        ++slab_index;
    }

    std::vector<double> k_full(grid.n_nodes(), 0.0);
    double offset = 0.0;
    for (auto it = slab_ks.rbegin(); it != slab_ks.rend(); ++it) {
        const std::size_t a = it->first;
        const std::vector<double>& kl = it->second;
        for (std::size_t j = 0; j < kl.size(); ++j) k_full[a + j] = offset + kl[j];
        offset += kl.back();
    }
    out.K = bv_decompose(k_full);

    Diagnostics& d = out.diag;
    d.res_L.assign(grid.n_nodes(), 0.0);
    d.res_R.assign(grid.n_nodes(), 0.0);
    d.z2.assign(grid.n_nodes(), 0.0);
    double max_std = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = grid.nodes[i];
        double sl = 0.0, sr = 0.0, zz = 0.0;
        for (std::size_t p = 0; p < N; ++p) {
            sl += lp.L_eval(t, out.Y(p, i), xi[p]);
            sr += lp.R_eval(t, out.Y(p, i), xi[p]);
            zz += out.Z(p, i) * out.Z(p, i);
            d.sup_Y = std::max(d.sup_Y, std::abs(out.Y(p, i)));
        }
        d.res_L[i] = sl / static_cast<double>(N);
        d.res_R[i] = sr / static_cast<double>(N);
        d.z2[i] = zz / static_cast<double>(N);
        max_std = std::max(max_std, std::sqrt(column_variance(out.Y, i)));
    }
    d.mc_tol = std::max(1e-9, opts.mc_kappa * std::max(lp.C, 1.0) * max_std /
                                   std::sqrt(static_cast<double>(N)));
    for (std::size_t i = 1; i <= n; ++i) {
        const double du = out.K.K_up[i] - out.K.K_up[i - 1];
        const double dd = out.K.K_down[i] - out.K.K_down[i - 1];
        if (du > 0.0 && d.res_R[i] > d.mc_tol) d.flatoff_up += du;
        if (dd > 0.0 && d.res_L[i] < -d.mc_tol) d.flatoff_down += dd;
    }
    d.sup_K = max_abs(out.K.K);
    d.picard = hist;
    return out;
}

}  // namespace mrbsde
