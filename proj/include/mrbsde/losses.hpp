#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mrbsde {

// Two loss evaluators with their declared constants. The `mark` argument
// carries the per-particle terminal state for random losses; deterministic
// losses ignore it. `affine` declares L(t, x) = x + g(t) (slope 1), in which
// case the mean loss E[L(t, Ytilde - E[Ytilde] + x)] collapses to L(t, x).
struct LossPair {
    std::function<double(double t, double x, double mark)> L_eval;
    std::function<double(double t, double x, double mark)> R_eval;
    double c = 1.0;
    double C = 1.0;
    double separation = 0.0;  // declared lower bound of inf (R - L)
    double M_bound = 0.0;     // bound on E[sup |L(t,0)| + sup |R(t,0)|]
    bool smooth = false;      // C^{1,2}_b compliance flag (density pipeline)
    bool affine = true;
};

struct LossProbe {
    double t;
    double x;
    double y;
    double mark = 0.0;
};

struct LossCheckReport {
    bool pass = true;
    double worst_low_ratio = 0.0;   // smallest |dL|/|dx| observed
    double worst_high_ratio = 0.0;  // largest |dL|/|dx| observed
    double min_gap = 0.0;           // min observed R - L
    int monotonicity_violations = 0;
    std::string detail;
};

LossCheckReport check_loss_assumptions(const LossPair& lp, std::span<const LossProbe> probes,
                                       double tol = 1e-12);

// Deterministic mean-loss functions l(t,x), r(t,x) evaluated at grid nodes.
struct MeanLossPair {
    std::function<double(double t, double x)> l;
    std::function<double(double t, double x)> r;
    double c = 1.0;
    double C = 1.0;
    double separation = 0.0;
};

}  // namespace mrbsde
