#include "mrbsde/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mrbsde {

LossCheckReport check_loss_assumptions(const LossPair& lp, std::span<const LossProbe> probes,
                                       double tol) {
    LossCheckReport rep;
    if (probes.empty()) {
        rep.pass = false;
        rep.detail = "no probes";
        return rep;
    }
    rep.worst_low_ratio = std::numeric_limits<double>::infinity();
    rep.worst_high_ratio = 0.0;
    rep.min_gap = std::numeric_limits<double>::infinity();

    for (const LossProbe& pr : probes) {
        const double dx = pr.x - pr.y;
        if (dx == 0.0) continue;
        for (int which = 0; which < 2; ++which) {
            const auto& eval = which == 0 ? lp.L_eval : lp.R_eval;
            const double dv = eval(pr.t, pr.x, pr.mark) - eval(pr.t, pr.y, pr.mark);
            const double ratio = std::abs(dv) / std::abs(dx);
            rep.worst_low_ratio = std::min(rep.worst_low_ratio, ratio);
            rep.worst_high_ratio = std::max(rep.worst_high_ratio, ratio);
            if (dv * dx <= 0.0) ++rep.monotonicity_violations;
        }
        rep.min_gap = std::min({rep.min_gap, lp.R_eval(pr.t, pr.x, pr.mark) -
                                                 lp.L_eval(pr.t, pr.x, pr.mark),
                                lp.R_eval(pr.t, pr.y, pr.mark) - lp.L_eval(pr.t, pr.y, pr.mark)});
    }

    const double slack = tol * (1.0 + lp.C);
    rep.pass = rep.worst_low_ratio >= lp.c - slack && rep.worst_high_ratio <= lp.C + slack &&
               rep.monotonicity_violations == 0 && rep.min_gap >= lp.separation - slack;

    std::ostringstream os;
    os << "ratios [" << rep.worst_low_ratio << ", " << rep.worst_high_ratio << "] vs [" << lp.c
       << ", " << lp.C << "], min gap " << rep.min_gap << " vs " << lp.separation << ", "
       << rep.monotonicity_violations << " monotonicity violations";
    rep.detail = os.str();
    return rep;
}

}  // namespace mrbsde
