#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gocc/core.hpp"

namespace gocc {

struct GridMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyGroundTruth : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using OccFrame = std::vector<SparseInstanceOccupancy>;

struct EvalReport {
    std::vector<double> thresholds;                       // IoU thresholds, default {0.1, 0.2, 0.3}
    std::map<int, std::vector<double>> per_class_ap;      // class -> AP per threshold
    std::vector<double> map_at;                           // mAP per threshold
    double map_occ = 0.0;                                 // mean of map_at
    double miou = 0.0;
    std::map<int, double> per_class_iou;
};

/// |a n b| / |a u b| over the sorted voxel index sets; 0 when both empty.
double voxel_iou(const SparseInstanceOccupancy& a, const SparseInstanceOccupancy& b);

struct MatchResult {
    std::vector<bool> pred_is_tp;   // in input prediction order
    std::vector<int> gt_match;      // per GT: matched prediction index or -1
};

/// Greedy one-to-one matching: predictions in descending score order (ties
/// by input order), each taking the unmatched GT of greatest IoU >= tau.
/// Caller partitions by class.
MatchResult greedy_match(std::span<const SparseInstanceOccupancy> preds,
                         std::span<const SparseInstanceOccupancy> gts, double iou_threshold);

/// All-point interpolated AP over a score-ordered TP/FP sequence.
double average_precision(const std::vector<bool>& labels, std::size_t gt_count);

/// Pools TP/FP labels per class and threshold across all frames, averages AP
/// over classes present in the GT, then averages over thresholds. mIoU
/// fields are left zero; see semantic_miou / evaluate_scene.
EvalReport map_occ(const std::vector<OccFrame>& preds_by_frame,
                   const std::vector<OccFrame>& gts_by_frame,
                   const std::vector<double>& thresholds = {0.1, 0.2, 0.3});

/// Per-frame semantic grids from instances (highest score wins a contested
/// voxel, ties by lower class_id then lower instance index), class IoU
/// accumulated globally across frames, mean over classes present in GT.
std::pair<double, std::map<int, double>> semantic_miou(const std::vector<OccFrame>& preds_by_frame,
                                                       const std::vector<OccFrame>& gts_by_frame,
                                                       const VoxelGridSpec& grid);

/// map_occ + semantic_miou in one report.
EvalReport evaluate_scene(const std::vector<OccFrame>& preds_by_frame,
                          const std::vector<OccFrame>& gts_by_frame, const VoxelGridSpec& grid,
                          const std::vector<double>& thresholds = {0.1, 0.2, 0.3});

/// The averaging step that folds per-threshold mAPs into the final score.
double mean_over_thresholds(const std::vector<double>& map_at);

/// Key-value text rendering, percent values to 2 decimals.
std::string format_report(const EvalReport& report);

/// JSON rendering (fractions, not percent).
std::string report_to_json(const EvalReport& report);

}  // namespace gocc
