#include "mrbsde/generator.hpp"

#include <algorithm>
#include <stdexcept>

namespace mrbsde {

std::vector<double> evaluate_resistance(const ResistanceSpec& g, const TimeGrid& grid,
                                        std::span<const double> k_path) {
    if (k_path.size() != grid.n_nodes())
        throw std::invalid_argument("evaluate_resistance: path size does not match grid");
    std::vector<double> out(k_path.size());
    switch (g.kind) {
        case ResistanceKind::Identity:
            for (std::size_t i = 0; i < k_path.size(); ++i) out[i] = k_path[i];
            break;
        case ResistanceKind::RunningMax: {
            double m = k_path[0];
            for (std::size_t i = 0; i < k_path.size(); ++i) {
                m = std::max(m, k_path[i]);
                out[i] = m;
            }
            break;
        }
        case ResistanceKind::RunningIntegral: {
            double acc = 0.0;
            out[0] = 0.0;
            for (std::size_t i = 1; i < k_path.size(); ++i) {
                acc += 0.5 * (k_path[i - 1] + k_path[i]) * grid.delta;
                out[i] = acc;
            }
            break;
        }
        case ResistanceKind::Custom:
            if (!g.G_eval) throw std::invalid_argument("evaluate_resistance: missing G_eval");
            for (std::size_t i = 0; i < k_path.size(); ++i)
                out[i] = g.G_eval(i, k_path.subspan(0, i + 1), grid);
            break;
    }
    return out;
}

}  // namespace mrbsde
