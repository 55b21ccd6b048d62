#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "isac/scenario.hpp"

namespace isac {

struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;   // worst observed error
    double tolerance = 0.0;
    std::string detail;
};

// Small scenario (M = 8, U = 2, J = 2, area 2 km out) used by the self-checks and the ordering runs.
ScenarioConfig desk_config();

// Analytic S_MI, N_MI and P_MI partials against central differences at random feasible points.
CheckResult check_gradient_fidelity(const ScenarioConfig& cfg, int points, std::uint64_t seed);

// Surrogate equals log2(1 + S/N) at the optimal v and never exceeds it elsewhere.
CheckResult check_quadratic_transform(int draws, std::uint64_t seed);

// Tangent majorizer of 1 - exp(-t/ρ) is an upper bound, tight at the expansion point.
CheckResult check_l0_majorization(int draws, std::uint64_t seed);

// Log-det MI against the per-target sum: J = 1 exactly, J = 2 with an orthogonalized Gram matrix.
std::vector<CheckResult> check_mi_consistency(const ScenarioConfig& cfg, std::uint64_t seed);

// Monotone box problem and a two-channel water-filling toy.
std::vector<CheckResult> check_convex_toys();

std::vector<CheckResult> run_property_suite();

}  // namespace isac
