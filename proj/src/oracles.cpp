#include "gocc/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "gocc/supervision.hpp"

namespace gocc::oracles {
namespace {

// Minimum over all ways to assign rows (in ascending order) to distinct
// columns, skipping rows when more rows than pairs remain. The running sum
// accumulates left-to-right in row order so totals are bit-comparable with
// the solver's row-ordered accumulation.
void brute_recurse(const std::vector<std::vector<double>>& cost, int row, int n, int m,
                   int pairs_left, double acc, std::vector<bool>& col_used, double& best) {
    if (pairs_left == 0) {
        best = std::min(best, acc);
        return;
    }
    if (row == n) return;

    for (int c = 0; c < m; ++c) {
        if (col_used[std::size_t(c)]) continue;
        col_used[std::size_t(c)] = true;
        brute_recurse(cost, row + 1, n, m, pairs_left - 1,
                      acc + cost[std::size_t(row)][std::size_t(c)], col_used, best);
        col_used[std::size_t(c)] = false;
    }
    if (n - row - 1 >= pairs_left) brute_recurse(cost, row + 1, n, m, pairs_left, acc, col_used, best);
}

}  // namespace

double brute_force_assignment_cost(const std::vector<std::vector<double>>& cost) {
    const int n = int(cost.size());
    const int m = n == 0 ? 0 : int(cost[0].size());
    if (n == 0 || m == 0) return 0.0;
    std::vector<bool> col_used(std::size_t(m), false);
    double best = std::numeric_limits<double>::infinity();
    brute_recurse(cost, 0, n, m, std::min(n, m), 0.0, col_used, best);
    return best;
}

GradientCheckReport focal_gradient_check(int n_cases, std::uint64_t seed, double h, double tol) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> logit_dist(-10.0, 10.0);
    std::uniform_real_distribution<double> alpha_dist(0.05, 0.95);
    std::uniform_real_distribution<double> gamma_dist(0.0, 5.0);

    GradientCheckReport report;
    report.cases = n_cases;
    for (int i = 0; i < n_cases; ++i) {
        const double logit = logit_dist(rng);
        const bool target = (rng() & 1) != 0;
        const double alpha = alpha_dist(rng);
        const double gamma = gamma_dist(rng);

        const double analytic = focal_loss(logit, target, alpha, gamma).dloss_dlogit;
        const double fd = (focal_loss(logit + h, target, alpha, gamma).loss -
                           focal_loss(logit - h, target, alpha, gamma).loss) /
                          (2.0 * h);
        const double rel =
            std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-8});
        report.max_rel_err = std::max(report.max_rel_err, rel);
        if (!(rel <= tol)) ++report.failures;
    }
    return report;
}

HungarianCheckReport hungarian_check(int n_cases, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> size_dist(1, 7);
    std::uniform_real_distribution<double> cost_dist(0.0, 10.0);

    HungarianCheckReport report;
    report.cases = n_cases;
    for (int i = 0; i < n_cases; ++i) {
        const int n = size_dist(rng), m = size_dist(rng);
        std::vector<std::vector<double>> cost(std::size_t(n),
                                              std::vector<double>(std::size_t(m), 0.0));
        for (auto& row : cost)
            for (auto& c : row) c = cost_dist(rng);

        const double solver = hungarian(cost).total_cost;
        const double brute = brute_force_assignment_cost(cost);
        const double diff = std::abs(solver - brute);
        report.max_abs_diff = std::max(report.max_abs_diff, diff);
        if (solver != brute) ++report.mismatches;
    }
    return report;
}

}  // namespace gocc::oracles
