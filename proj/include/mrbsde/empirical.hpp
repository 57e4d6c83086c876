#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mrbsde {

// Equal-weight empirical measure over a finite set of real samples.
// Samples are kept sorted so order-statistic formulas apply directly.
class EmpiricalMeasure {
public:
    EmpiricalMeasure() = default;

    explicit EmpiricalMeasure(std::vector<double> samples) : samples_(std::move(samples)) {
        if (samples_.empty()) throw std::invalid_argument("EmpiricalMeasure: no samples");
        for (double v : samples_)
            if (!std::isfinite(v)) throw std::invalid_argument("EmpiricalMeasure: non-finite sample");
        std::sort(samples_.begin(), samples_.end());
        double s = 0.0;
        for (double v : samples_) s += v;
        mean_ = s / static_cast<double>(samples_.size());
    }

    const std::vector<double>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    double mean() const { return mean_; }

private:
    std::vector<double> samples_;
    double mean_ = 0.0;
};

// W1 between equal-size empirical measures: mean absolute difference of
// order statistics.
inline double w1_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    if (mu.size() != nu.size())
        throw std::invalid_argument("w1_distance: sample counts differ");
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        s += std::abs(mu.samples()[i] - nu.samples()[i]);
    return s / static_cast<double>(mu.size());
}

}  // namespace mrbsde
