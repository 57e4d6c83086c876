#include "mrbsde/regression.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mrbsde/errors.hpp"

namespace mrbsde {

namespace {

// Plain Cholesky solve; throws when the matrix is not positive definite.
std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b, std::size_t m) {
    for (std::size_t j = 0; j < m; ++j) {
        double d = a[j * m + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * m + k] * a[j * m + k];
        if (!(d > 0.0)) throw numerical_failure("regress_conditional: singular normal equations");
        const double l = std::sqrt(d);
        a[j * m + j] = l;
        for (std::size_t i = j + 1; i < m; ++i) {
            double s = a[i * m + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * m + k] * a[j * m + k];
            a[i * m + j] = s / l;
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i * m + k] * b[k];
        b[i] = s / a[i * m + i];
    }
    for (std::size_t i = m; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < m; ++k) s -= a[k * m + i] * b[k];
        b[i] = s / a[i * m + i];
    }
    return b;
}

}  // namespace

std::vector<double> regress_conditional(std::span<const double> target,
                                        std::span<const double> state,
                                        const RegressionBasis& basis) {
    const std::size_t n = target.size();
    if (n == 0 || state.size() != n)
        throw std::invalid_argument("regress_conditional: size mismatch");
    if (basis.degree < 0) throw std::invalid_argument("regress_conditional: negative degree");

    double mean = 0.0;
    for (double v : state) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : state) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);

    double tmean = 0.0;
    for (double v : target) tmean += v;
    tmean /= static_cast<double>(n);

    // Degenerate state: the conditional expectation is the plain mean.
    if (basis.degree == 0 || sd < 1e-12 * (1.0 + std::abs(mean)))
        return std::vector<double>(n, tmean);

    const std::size_t m = static_cast<std::size_t>(basis.degree) + 1;
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = (state[i] - mean) / sd;

    std::vector<double> a(m * m, 0.0), b(m, 0.0), pw(m);
    for (std::size_t i = 0; i < n; ++i) {
        pw[0] = 1.0;
        for (std::size_t j = 1; j < m; ++j) pw[j] = pw[j - 1] * u[i];
        for (std::size_t j = 0; j < m; ++j) {
            b[j] += pw[j] * target[i];
            for (std::size_t k = 0; k <= j; ++k) a[j * m + k] += pw[j] * pw[k];
        }
    }
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = j + 1; k < m; ++k) a[j * m + k] = a[k * m + j];
    // Ridge on the non-intercept coefficients only, so exact means survive.
    for (std::size_t j = 1; j < m; ++j) a[j * m + j] += basis.ridge * static_cast<double>(n);

    const std::vector<double> beta = solve_spd(std::move(a), std::move(b), m);

    std::vector<double> fitted(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = beta[0];
        double p = 1.0;
        for (std::size_t j = 1; j < m; ++j) {
            p *= u[i];
            acc += beta[j] * p;
        }
        fitted[i] = acc;
    }
    return fitted;
}

}  // namespace mrbsde
