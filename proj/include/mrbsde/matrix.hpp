#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace mrbsde {

// Dense row-major matrix, indexed (particle, node) throughout the library.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) {
        assert(r < rows && c < cols);
        return data[r * cols + c];
    }
    double operator()(std::size_t r, std::size_t c) const {
        assert(r < rows && c < cols);
        return data[r * cols + c];
    }

    bool operator==(const Matrix&) const = default;
};

inline double column_mean(const Matrix& m, std::size_t c) {
    double s = 0.0;
    for (std::size_t r = 0; r < m.rows; ++r) s += m(r, c);
    return s / static_cast<double>(m.rows);
}

inline double column_variance(const Matrix& m, std::size_t c) {
    const double mu = column_mean(m, c);
    double s = 0.0;
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double d = m(r, c) - mu;
        s += d * d;
    }
    return s / static_cast<double>(m.rows);
}

inline std::vector<double> column_copy(const Matrix& m, std::size_t c) {
    std::vector<double> out(m.rows);
    for (std::size_t r = 0; r < m.rows; ++r) out[r] = m(r, c);
    return out;
}

}  // namespace mrbsde
