#pragma once

#include <string>
#include <vector>

#include "mrbsde/scenario.hpp"
#include "mrbsde/solution.hpp"

namespace mrbsde {

struct ReportRow {
    double t;
    double E_Y;
    double std_Y;
    double K;
    double K_up;
    double K_down;
    double res_L;
    double res_R;
    double flatoff_R;  // partial sum of dK_up on {E[R] > tol}
    double flatoff_L;  // partial sum of dK_down on {E[L] < -tol}
    double EZ2;
};

struct SolverReport {
    std::vector<ReportRow> rows;
    std::vector<double> picard_totals;
    std::vector<double> outer_diffs;
    double wall_seconds = 0.0;
    std::string config_echo;
    std::uint64_t seed = 0;
    bool invariants_pass = true;
    std::string invariants_detail;
};

SolverReport run_scenario(const ScenarioConfig& cfg);

// UTF-8 CSV, 12 significant digits, fixed header; byte-identical reruns.
void export_csv(const SolverReport& report, const std::string& path);

SolverReport make_report(const ScenarioConfig& cfg, const ScenarioModel& model,
                         const SolutionTriple& sol);

}  // namespace mrbsde
