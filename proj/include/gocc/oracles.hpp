#pragma once

// Independent reference implementations used by the test suites and the
// `losscheck` subcommand. Nothing here is called by the library's own
// computation paths.

#include <cstdint>
#include <vector>

namespace gocc::oracles {

/// Exhaustive minimum assignment cost over all injections of min(n, m)
/// pairs. Intended for n, m <= 8.
double brute_force_assignment_cost(const std::vector<std::vector<double>>& cost);

struct GradientCheckReport {
    int cases = 0;
    int failures = 0;
    double max_rel_err = 0.0;
};

/// Central finite differences (step h) against the analytic focal-loss
/// gradient over seeded random (logit, target, alpha, gamma) tuples with
/// |logit| <= 10.
GradientCheckReport focal_gradient_check(int n_cases, std::uint64_t seed, double h, double tol);

struct HungarianCheckReport {
    int cases = 0;
    int mismatches = 0;
    double max_abs_diff = 0.0;
};

/// Seeded random cost matrices with n, m <= 7; solver total must equal the
/// exhaustive brute force exactly.
HungarianCheckReport hungarian_check(int n_cases, std::uint64_t seed);

}  // namespace gocc::oracles
