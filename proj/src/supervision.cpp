#include "gocc/supervision.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <unordered_set>

namespace gocc {
namespace {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// Jonker-Volgenant shortest augmenting path solver, square matrix,
// 1-indexed internals. Returns row -> col.
std::vector<int> solve_square(int n, const std::function<double(int, int)>& cost) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j]) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

// Optimal total over a row/col subset; the deficient dimension is padded
// with zero-cost dummies, which forces all min(n, m) real pairs.
double optimal_total(const std::vector<std::vector<double>>& cost, const std::vector<int>& rows,
                     const std::vector<int>& cols) {
    const int n = int(rows.size()), m = int(cols.size());
    if (n == 0 || m == 0) return 0.0;
    const int size = std::max(n, m);
    const auto at = [&](int i, int j) -> double {
        return (i < n && j < m) ? cost[rows[i]][cols[j]] : 0.0;
    };
    const auto row_to_col = solve_square(size, at);
    double total = 0.0;
    for (int i = 0; i < n; ++i)
        if (row_to_col[i] < m) total += cost[rows[i]][cols[row_to_col[i]]];
    return total;
}

// Beyond this many entries the plain solver order is kept (still
// deterministic); the lexicographic refinement re-solves per candidate.
constexpr std::size_t kRefineLimit = 900;

}  // namespace

Assignment hungarian(const std::vector<std::vector<double>>& cost) {
    const int n = int(cost.size());
    const int m = n == 0 ? 0 : int(cost[0].size());
    for (const auto& row : cost) {
        if (int(row.size()) != m) throw NonFiniteCost("hungarian: ragged cost matrix");
        for (double c : row)
            if (!std::isfinite(c)) throw NonFiniteCost("hungarian: non-finite cost entry");
    }

    Assignment result;
    if (n == 0 || m == 0) return result;

    std::vector<int> rows(n), cols(m);
    for (int i = 0; i < n; ++i) rows[i] = i;
    for (int j = 0; j < m; ++j) cols[j] = j;
    const double target = optimal_total(cost, rows, cols);
    const double tol = 1e-9 * std::max(1.0, std::abs(target));

    if (std::size_t(n) * std::size_t(m) > kRefineLimit) {
        const int size = std::max(n, m);
        const auto at = [&](int i, int j) -> double {
            return (i < n && j < m) ? cost[i][j] : 0.0;
        };
        const auto row_to_col = solve_square(size, at);
        for (int i = 0; i < n; ++i)
            if (row_to_col[i] < m) result.pairs.emplace_back(i, row_to_col[i]);
    } else {
        // Fix pairs row by row, smallest column first, keeping the global
        // optimum reachable; yields the lexicographically smallest argmin.
        int need = std::min(n, m);
        double acc = 0.0;
        std::vector<int> rem_cols = cols;
        std::vector<int> rem_rows = rows;
        for (int r = 0; r < n && need > 0; ++r) {
            std::vector<int> rows_wo(rem_rows.size() - 1);
            std::copy_if(rem_rows.begin(), rem_rows.end(), rows_wo.begin(),
                         [&](int x) { return x != r; });
            bool assigned = false;
            for (std::size_t ci = 0; ci < rem_cols.size(); ++ci) {
                const int c = rem_cols[ci];
                std::vector<int> cols_wo(rem_cols.size() - 1);
                std::copy_if(rem_cols.begin(), rem_cols.end(), cols_wo.begin(),
                             [&](int x) { return x != c; });
                const double sub = optimal_total(cost, rows_wo, cols_wo);
                if (std::abs(acc + cost[r][c] + sub - target) <= tol) {
                    result.pairs.emplace_back(r, c);
                    acc += cost[r][c];
                    rem_cols = std::move(cols_wo);
                    --need;
                    assigned = true;
                    break;
                }
            }
            (void)assigned;  // leaving r unassigned is the fall-through
            rem_rows = std::move(rows_wo);
        }
    }

    std::sort(result.pairs.begin(), result.pairs.end());
    result.total_cost = 0.0;
    for (const auto& [r, c] : result.pairs) result.total_cost += cost[r][c];
    return result;
}

double pairwise_cost(const std::array<double, 10>& pred_anchor,
                     std::span<const double> class_probs, int gt_class,
                     const std::array<double, 10>& gt_anchor, const MatchCostConfig& cfg) {
    double sum = 0.0;
    for (double p : class_probs) sum += p;
    if (std::abs(sum - 1.0) > 1e-6)
        throw InvariantViolation("pairwise_cost: class probabilities must sum to 1");
    if (gt_class < 0 || std::size_t(gt_class) >= class_probs.size())
        throw ClassOutOfRange("pairwise_cost: gt class outside probability vector");
    double l1 = 0.0;
    for (int i = 0; i < 10; ++i) l1 += std::abs(pred_anchor[i] - gt_anchor[i]);
    return cfg.lambda_cls * (1.0 - class_probs[gt_class]) + cfg.lambda_reg * l1;
}

double l1_loss(const std::array<double, 10>& pred_anchor,
               const std::array<double, 10>& gt_anchor) {
    double sum = 0.0;
    for (int i = 0; i < 10; ++i) sum += std::abs(pred_anchor[i] - gt_anchor[i]);
    return sum / 10.0;
}

FocalResult focal_loss(double logit, bool target, double alpha, double gamma) {
    // With s = target ? logit : -logit: p_t = sigmoid(s),
    // 1 - p_t = sigmoid(-s), -log p_t = softplus(-s).
    const double s = target ? logit : -logit;
    const double sig_ns = sigmoid(-s);
    const double sig_s = sigmoid(s);
    const double sp = softplus(-s);
    const double alpha_t = target ? alpha : 1.0 - alpha;
    const double mod = std::pow(sig_ns, gamma);

    FocalResult res;
    res.loss = alpha_t * mod * sp;
    const double dds = -alpha_t * mod * (gamma * sig_s * sp + sig_ns);
    res.dloss_dlogit = target ? dds : -dds;
    return res;
}

double occupancy_loss(std::span<const std::uint32_t> voxel_ids, std::span<const double> logits,
                      std::span<const std::uint32_t> gt_occupied, double alpha, double gamma) {
    if (voxel_ids.size() != logits.size())
        throw VoxelEnumerationMismatch("occupancy_loss: logit count differs from voxel count");
    std::unordered_set<std::uint32_t> enumerated(voxel_ids.begin(), voxel_ids.end());
    std::unordered_set<std::uint32_t> occupied;
    for (std::uint32_t v : gt_occupied) {
        if (!enumerated.count(v))
            throw VoxelEnumerationMismatch("occupancy_loss: GT voxel missing from enumeration");
        occupied.insert(v);
    }
    if (voxel_ids.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < voxel_ids.size(); ++i)
        sum += focal_loss(logits[i], occupied.count(voxel_ids[i]) != 0, alpha, gamma).loss;
    return sum / double(voxel_ids.size());
}

double total_loss(double l_reg, double l_cls, double l_occ, const MatchCostConfig& cfg) {
    return cfg.w_reg * l_reg + cfg.w_cls * l_cls + cfg.w_occ * l_occ;
}

}  // namespace gocc
