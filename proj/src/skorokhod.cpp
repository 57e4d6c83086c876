#include "mrbsde/skorokhod.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>

#include "mrbsde/errors.hpp"

namespace mrbsde {

namespace {

constexpr double kFlatoffTol = 1e-8;

// K is the two-sided reflection of the zero path into the moving band
// [psi_t, phi_t]; x = s + K then satisfies l <= 0 <= r at every node.
std::vector<double> reflect_into_band(const std::vector<double>& phi,
                                      const std::vector<double>& psi) {
    const std::size_t n = phi.size();
    std::vector<double> K(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (phi[i] < psi[i]) throw numerical_failure("reflect_into_band: empty constraint band");
        double run_inf = std::numeric_limits<double>::infinity();
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t s = i + 1; s-- > 0;) {
            run_inf = std::min(run_inf, -psi[s]);
            best = std::max(best, std::min(-phi[s], run_inf));
        }
        const double first = std::min(std::max(-phi[0], 0.0), run_inf);
        K[i] = -std::max(first, best);
    }
    return K;
}

SPSolution finish_solution(const SPProblem& p, std::vector<double> phi, std::vector<double> psi,
                           std::vector<double> K) {
    SPSolution sol;
    const std::size_t n = K.size();
    sol.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) sol.x[i] = p.s[i] + K[i];
    sol.K = bv_decompose_with_initial_jump(K);
    sol.phi = std::move(phi);
    sol.psi = std::move(psi);
    for (std::size_t i = 0; i < n; ++i) {
        const double du = i == 0 ? sol.K.K_up[0] : sol.K.K_up[i] - sol.K.K_up[i - 1];
        const double dd = i == 0 ? sol.K.K_down[0] : sol.K.K_down[i] - sol.K.K_down[i - 1];
        const double t = p.grid.nodes[i];
        if (du > 0.0 && p.r(t, sol.x[i]) > kFlatoffTol) sol.flatoff_up += du;
        if (dd > 0.0 && p.l(t, sol.x[i]) < -kFlatoffTol) sol.flatoff_down += dd;
    }
    return sol;
}

}  // namespace

double solve_increasing_root(const std::function<double(double)>& g, double c_lower, double tol) {
    const double v = g(0.0);
    if (v == 0.0) return 0.0;
    if (!(c_lower > 0.0)) throw std::invalid_argument("solve_increasing_root: c must be positive");
    double half = std::abs(v) / c_lower + 1.0;
    double lo = -half, hi = half;
    int tries = 0;
    while (g(lo) > 0.0) {
        lo *= 2.0;
        if (++tries > 60) throw numerical_failure("solve_increasing_root: no lower bracket");
    }
    tries = 0;
    while (g(hi) < 0.0) {
        hi *= 2.0;
        if (++tries > 60) throw numerical_failure("solve_increasing_root: no upper bracket");
    }
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

std::pair<std::vector<double>, std::vector<double>> root_phi_psi(const SPProblem& p) {
    const std::size_t n = p.s.size();
    std::vector<double> phi(n), psi(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = p.grid.nodes[i];
        const double si = p.s[i];
        phi[i] = solve_increasing_root([&](double x) { return p.l(t, si + x); }, p.c);
        psi[i] = solve_increasing_root([&](double x) { return p.r(t, si + x); }, p.c);
    }
    return {std::move(phi), std::move(psi)};
}

SPSolution solve_sp(const SPProblem& p) {
    if (p.s.size() != p.grid.n_nodes())
        throw std::invalid_argument("solve_sp: s size does not match grid");
    auto [phi, psi] = root_phi_psi(p);
    std::vector<double> K = reflect_into_band(phi, psi);
    return finish_solution(p, std::move(phi), std::move(psi), std::move(K));
}

SPSolution solve_bsp(const BSPProblem& p) {
    const std::size_t m = p.grid.n_nodes();
    if (p.s.size() != m) throw std::invalid_argument("solve_bsp: s size does not match grid");
    const double T = p.grid.t_end;
    if (p.l(T, p.a) > p.anchor_tol || p.r(T, p.a) < -p.anchor_tol)
        throw std::invalid_argument("solve_bsp: terminal anchor violates constraints");

    // Reversed forward problem: sbar_i = a + s_n - s_{n-i}, constraints read
    // at the mirrored node time.
    SPProblem rev;
    rev.grid = p.grid;
    rev.c = p.c;
    rev.C = p.C;
    rev.separation = p.separation;
    rev.s.resize(m);
    const std::size_t n = m - 1;
    for (std::size_t i = 0; i < m; ++i) rev.s[i] = p.a + p.s[n] - p.s[n - i];
    const TimeGrid& g = p.grid;
    rev.l = [&p, &g, n](double t, double x) { return p.l(g.nodes[n - g.index_of(t)], x); };
    rev.r = [&p, &g, n](double t, double x) { return p.r(g.nodes[n - g.index_of(t)], x); };

    SPSolution bar = solve_sp(rev);

    SPSolution sol;
    sol.x.resize(m);
    sol.phi.resize(m);
    sol.psi.resize(m);
    std::vector<double> K(m);
    for (std::size_t i = 0; i < m; ++i) {
        sol.x[i] = bar.x[n - i];
        sol.phi[i] = bar.phi[n - i];
        sol.psi[i] = bar.psi[n - i];
        K[i] = bar.K.K[n] - bar.K.K[n - i];
    }
    sol.K = bv_decompose(K);
    for (std::size_t i = 1; i < m; ++i) {
        const double du = sol.K.K_up[i] - sol.K.K_up[i - 1];
        const double dd = sol.K.K_down[i] - sol.K.K_down[i - 1];
        const double t = p.grid.nodes[i];
        if (du > 0.0 && p.r(t, sol.x[i]) > kFlatoffTol) sol.flatoff_up += du;
        if (dd > 0.0 && p.l(t, sol.x[i]) < -kFlatoffTol) sol.flatoff_down += dd;
    }
    return sol;
}

SPSolution oracle_discrete_reflection(const SPProblem& p) {
    if (p.s.size() != p.grid.n_nodes())
        throw std::invalid_argument("oracle_discrete_reflection: s size does not match grid");
    auto [phi, psi] = root_phi_psi(p);
    const std::size_t n = phi.size();
    std::vector<double> K(n);
    double k = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (phi[i] < psi[i])
            throw numerical_failure("oracle_discrete_reflection: empty constraint band");
        k = std::clamp(k, psi[i], phi[i]);
        K[i] = k;
    }
    return finish_solution(p, std::move(phi), std::move(psi), std::move(K));
}

namespace {

double sup_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double loss_gap_sup(const std::function<double(double, double)>& f1,
                    const std::function<double(double, double)>& f2, const TimeGrid& grid,
                    std::span<const double> probe_xs) {
    double m = 0.0;
    for (double t : grid.nodes)
        for (double x : probe_xs) m = std::max(m, std::abs(f1(t, x) - f2(t, x)));
    return m;
}

}  // namespace

StabilityReport stability_gap_sp(const SPProblem& p1, const SPProblem& p2,
                                 std::span<const double> probe_xs) {
    const SPSolution s1 = solve_sp(p1);
    const SPSolution s2 = solve_sp(p2);
    StabilityReport rep;
    rep.lhs = sup_abs_diff(s1.K.K, s2.K.K);
    rep.sup_ds = sup_abs_diff(p1.s, p2.s);
    rep.loss_gap = std::max(loss_gap_sup(p1.l, p2.l, p1.grid, probe_xs),
                            loss_gap_sup(p1.r, p2.r, p1.grid, probe_xs));
    const double c = std::min(p1.c, p2.c);
    const double C = std::max(p1.C, p2.C);
    rep.rhs = (C / c) * rep.sup_ds + rep.loss_gap / c;
    rep.slack = rep.rhs - rep.lhs;
    return rep;
}

StabilityReport stability_gap_bsp(const BSPProblem& p1, const BSPProblem& p2,
                                  std::span<const double> probe_xs) {
    const SPSolution s1 = solve_bsp(p1);
    const SPSolution s2 = solve_bsp(p2);
    StabilityReport rep;
    rep.lhs = sup_abs_diff(s1.K.K, s2.K.K);
    rep.sup_ds = sup_abs_diff(p1.s, p2.s);
    rep.loss_gap = std::max(loss_gap_sup(p1.l, p2.l, p1.grid, probe_xs),
                            loss_gap_sup(p1.r, p2.r, p1.grid, probe_xs));
    const double c = std::min(p1.c, p2.c);
    const double C = std::max(p1.C, p2.C);
    rep.rhs = 2.0 * (C / c) * std::abs(p1.a - p2.a) + 4.0 * (C / c) * rep.sup_ds +
              2.0 * rep.loss_gap / c;
    rep.slack = rep.rhs - rep.lhs;
    return rep;
}

}  // namespace mrbsde
