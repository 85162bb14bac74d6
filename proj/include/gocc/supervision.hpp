#pragma once

#include <span>
#include <utility>
#include <vector>

#include "gocc/core.hpp"

namespace gocc {

struct NonFiniteCost : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ClassOutOfRange : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct VoxelEnumerationMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MatchCostConfig {
    double lambda_cls = 1.0;
    double lambda_reg = 1.0;
    double focal_alpha = 0.25;
    double focal_gamma = 2.0;
    double w_reg = 1.0;
    double w_cls = 1.0;
    double w_occ = 1.0;
};

struct Assignment {
    std::vector<std::pair<int, int>> pairs;  // sorted by row
    double total_cost = 0.0;
};

/// Min-cost assignment of min(n, m) disjoint (row, col) pairs. Rectangular
/// matrices leave |n - m| rows or columns unassigned. Among equally cheap
/// assignments the lexicographically smallest pair set is returned.
Assignment hungarian(const std::vector<std::vector<double>>& cost);

/// lambda_cls * (1 - p_pred(gt_class)) + lambda_reg * L1 over the 10 anchor
/// components. class_probs must sum to 1 within 1e-6.
double pairwise_cost(const std::array<double, 10>& pred_anchor,
                     std::span<const double> class_probs, int gt_class,
                     const std::array<double, 10>& gt_anchor, const MatchCostConfig& cfg);

/// Mean absolute difference over the 10 anchor components.
double l1_loss(const std::array<double, 10>& pred_anchor, const std::array<double, 10>& gt_anchor);

struct FocalResult {
    double loss = 0.0;
    double dloss_dlogit = 0.0;
};

/// FL(p_t) = -alpha_t (1 - p_t)^gamma log p_t with p = sigmoid(logit);
/// log-sigmoid formulation, stable for |logit| up to 80. Returns the
/// analytic gradient alongside.
FocalResult focal_loss(double logit, bool target, double alpha, double gamma);

/// Mean focal loss over an enumerated voxel region; targets are membership
/// in gt_occupied (sorted ascending). Every GT voxel must appear in the
/// enumeration.
double occupancy_loss(std::span<const std::uint32_t> voxel_ids, std::span<const double> logits,
                      std::span<const std::uint32_t> gt_occupied, double alpha, double gamma);

/// w_reg * l_reg + w_cls * l_cls + w_occ * l_occ.
double total_loss(double l_reg, double l_cls, double l_occ, const MatchCostConfig& cfg);

}  // namespace gocc
