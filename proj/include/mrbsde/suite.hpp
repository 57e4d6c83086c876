#pragma once

#include <string>
#include <vector>

namespace mrbsde {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

// Run the acceptance criteria whose names contain `filter` (all when empty).
// Each criterion is self-contained and pins its own tolerances.
std::vector<CriterionResult> run_acceptance(const std::string& filter = "");

std::string summary_json(const std::vector<CriterionResult>& results);

}  // namespace mrbsde
