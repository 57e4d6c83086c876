#include <algorithm>
#include <cstdio>

#include "mrbsde/suite.hpp"

int main() {
    const auto results = mrbsde::run_acceptance();
    bool all = true;
    for (const auto& r : results) {
        std::printf("%s criterion %d %s: %s [%.2f s]\n", r.pass ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.detail.c_str(), r.seconds);
        all = all && r.pass;
    }
    std::printf("%zu/%zu criteria passed\n",
                static_cast<std::size_t>(
                    std::count_if(results.begin(), results.end(),
                                  [](const auto& r) { return r.pass; })),
                results.size());
    return all ? 0 : 1;
}
