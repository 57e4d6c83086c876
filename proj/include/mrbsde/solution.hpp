#pragma once

#include <array>
#include <vector>

#include "mrbsde/bv_path.hpp"
#include "mrbsde/matrix.hpp"

namespace mrbsde {

// One Picard iteration record: sup|dY|, sqrt(E int |dZ|^2), sup|dK|.
struct PicardHistory {
    std::vector<std::array<double, 3>> steps;
    double last_ratio = 0.0;  // measured contraction factor

    std::vector<double> totals() const {
        std::vector<double> t;
        t.reserve(steps.size());
        for (const auto& s : steps) t.push_back(s[0] + s[1] + s[2]);
        return t;
    }
};

struct Diagnostics {
    std::vector<double> res_L;  // per node E_emp[L(t, Y_t)]
    std::vector<double> res_R;  // per node E_emp[R(t, Y_t)]
    double flatoff_up = 0.0;    // sum dK_up over nodes with E[R] > tol
    double flatoff_down = 0.0;  // sum dK_down over nodes with E[L] < -tol
    double mc_tol = 0.0;        // the 3*std/sqrt(N) scale used for activity
    std::vector<double> z2;     // per node E_emp[|Z_t|^2]
    PicardHistory picard;
    double sup_Y = 0.0;
    double sup_K = 0.0;
};

// (Y, Z, K) with K a single deterministic grid function.
struct SolutionTriple {
    Matrix Y;
    Matrix Z;
    BVPath K;
    Diagnostics diag;
};

}  // namespace mrbsde
