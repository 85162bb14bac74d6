#include "gocc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace gocc {
namespace {

std::size_t intersection_size(const std::vector<std::uint32_t>& a,
                              const std::vector<std::uint32_t>& b) {
    std::size_t n = 0, i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j])
            ++i;
        else if (b[j] < a[i])
            ++j;
        else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

struct PooledLabel {
    double score;
    std::size_t frame;
    std::size_t order;  // in-frame prediction index
    bool tp;
};

}  // namespace

double voxel_iou(const SparseInstanceOccupancy& a, const SparseInstanceOccupancy& b) {
    const std::size_t inter = intersection_size(a.voxels, b.voxels);
    const std::size_t uni = a.voxels.size() + b.voxels.size() - inter;
    if (uni == 0) return 0.0;
    return double(inter) / double(uni);
}

MatchResult greedy_match(std::span<const SparseInstanceOccupancy> preds,
                         std::span<const SparseInstanceOccupancy> gts, double iou_threshold) {
    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });

    MatchResult res;
    res.pred_is_tp.assign(preds.size(), false);
    res.gt_match.assign(gts.size(), -1);
    std::vector<bool> gt_taken(gts.size(), false);

    for (std::size_t pi : order) {
        double best_iou = 0.0;
        int best_gt = -1;
        for (std::size_t gi = 0; gi < gts.size(); ++gi) {
            if (gt_taken[gi]) continue;
            const double iou = voxel_iou(preds[pi], gts[gi]);
            if (iou >= iou_threshold && iou > best_iou) {
                best_iou = iou;
                best_gt = int(gi);
            }
        }
        if (best_gt >= 0) {
            res.pred_is_tp[pi] = true;
            res.gt_match[best_gt] = int(pi);
            gt_taken[best_gt] = true;
        }
    }
    return res;
}

double average_precision(const std::vector<bool>& labels, std::size_t gt_count) {
    if (gt_count == 0) return labels.empty() ? 1.0 : 0.0;
    if (labels.empty()) return 0.0;

    // Monotone precision envelope from the right; each TP contributes
    // envelope / gt_count so a perfect run sums to 1 exactly.
    const std::size_t n = labels.size();
    std::vector<double> precision(n);
    std::size_t tp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i]) ++tp;
        precision[i] = double(tp) / double(i + 1);
    }
    double env = 0.0, env_sum = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        env = std::max(env, precision[i]);
        if (labels[i]) env_sum += env;
    }
    return env_sum / double(gt_count);
}

EvalReport map_occ(const std::vector<OccFrame>& preds_by_frame,
                   const std::vector<OccFrame>& gts_by_frame,
                   const std::vector<double>& thresholds) {
    if (preds_by_frame.size() != gts_by_frame.size())
        throw GridMismatch("map_occ: prediction and GT frame counts differ");

    std::set<int> gt_classes;
    std::size_t total_gt = 0;
    for (const auto& frame : gts_by_frame)
        for (const auto& g : frame) {
            gt_classes.insert(g.class_id);
            ++total_gt;
        }
    if (total_gt == 0) throw EmptyGroundTruth("map_occ: no ground-truth instance in any frame");

    EvalReport report;
    report.thresholds = thresholds;
    report.map_at.assign(thresholds.size(), 0.0);
    for (int c : gt_classes) report.per_class_ap[c].assign(thresholds.size(), 0.0);

    for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
        const double tau = thresholds[ti];
        double ap_sum = 0.0;
        for (int c : gt_classes) {
            std::vector<PooledLabel> pooled;
            std::size_t gt_count = 0;
            for (std::size_t f = 0; f < preds_by_frame.size(); ++f) {
                OccFrame p_c, g_c;
                for (const auto& p : preds_by_frame[f])
                    if (p.class_id == c) p_c.push_back(p);
                for (const auto& g : gts_by_frame[f])
                    if (g.class_id == c) g_c.push_back(g);
                gt_count += g_c.size();
                const auto match = greedy_match(p_c, g_c, tau);
                for (std::size_t i = 0; i < p_c.size(); ++i)
                    pooled.push_back({p_c[i].score, f, i, match.pred_is_tp[i]});
            }
            std::sort(pooled.begin(), pooled.end(), [](const PooledLabel& a, const PooledLabel& b) {
                if (a.score != b.score) return a.score > b.score;
                if (a.frame != b.frame) return a.frame < b.frame;
                return a.order < b.order;
            });
            std::vector<bool> labels(pooled.size());
            for (std::size_t i = 0; i < pooled.size(); ++i) labels[i] = pooled[i].tp;
            const double ap = average_precision(labels, gt_count);
            report.per_class_ap[c][ti] = ap;
            ap_sum += ap;
        }
        report.map_at[ti] = ap_sum / double(gt_classes.size());
    }

    report.map_occ = mean_over_thresholds(report.map_at);
    return report;
}

double mean_over_thresholds(const std::vector<double>& map_at) {
    if (map_at.empty()) return 0.0;
    return std::accumulate(map_at.begin(), map_at.end(), 0.0) / double(map_at.size());
}

std::pair<double, std::map<int, double>> semantic_miou(const std::vector<OccFrame>& preds_by_frame,
                                                       const std::vector<OccFrame>& gts_by_frame,
                                                       const VoxelGridSpec& grid) {
    if (preds_by_frame.size() != gts_by_frame.size())
        throw GridMismatch("semantic_miou: prediction and GT frame counts differ");

    struct Claim {
        int class_id;
        double score;
        std::size_t inst;
    };
    const auto label_grid = [&](const OccFrame& frame) {
        std::unordered_map<std::uint32_t, Claim> labels;
        for (std::size_t i = 0; i < frame.size(); ++i) {
            frame[i].validate(grid);
            for (std::uint32_t v : frame[i].voxels) {
                const Claim claim{frame[i].class_id, frame[i].score, i};
                auto [it, inserted] = labels.emplace(v, claim);
                if (inserted) continue;
                Claim& cur = it->second;
                const bool wins = claim.score > cur.score ||
                                  (claim.score == cur.score &&
                                   (claim.class_id < cur.class_id ||
                                    (claim.class_id == cur.class_id && claim.inst < cur.inst)));
                if (wins) cur = claim;
            }
        }
        return labels;
    };

    std::set<int> gt_classes;
    std::map<int, std::uint64_t> inter, uni;
    for (std::size_t f = 0; f < preds_by_frame.size(); ++f) {
        const auto pred_labels = label_grid(preds_by_frame[f]);
        const auto gt_labels = label_grid(gts_by_frame[f]);
        for (const auto& [v, claim] : gt_labels) {
            gt_classes.insert(claim.class_id);
            ++uni[claim.class_id];
            auto it = pred_labels.find(v);
            if (it != pred_labels.end() && it->second.class_id == claim.class_id)
                ++inter[claim.class_id];
        }
        for (const auto& [v, claim] : pred_labels) {
            auto it = gt_labels.find(v);
            if (it == gt_labels.end() || it->second.class_id != claim.class_id)
                ++uni[claim.class_id];
        }
    }

    std::map<int, double> per_class;
    double sum = 0.0;
    for (int c : gt_classes) {
        const double iou = uni[c] == 0 ? 0.0 : double(inter[c]) / double(uni[c]);
        per_class[c] = iou;
        sum += iou;
    }
    const double miou = gt_classes.empty() ? 0.0 : sum / double(gt_classes.size());
    return {miou, per_class};
}

EvalReport evaluate_scene(const std::vector<OccFrame>& preds_by_frame,
                          const std::vector<OccFrame>& gts_by_frame, const VoxelGridSpec& grid,
                          const std::vector<double>& thresholds) {
    EvalReport report = map_occ(preds_by_frame, gts_by_frame, thresholds);
    auto [miou, per_class] = semantic_miou(preds_by_frame, gts_by_frame, grid);
    report.miou = miou;
    report.per_class_iou = std::move(per_class);
    return report;
}

std::string format_report(const EvalReport& report) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    os << "map_occ: " << 100.0 * report.map_occ << "\n";
    for (std::size_t i = 0; i < report.thresholds.size(); ++i)
        os << "mAP@" << report.thresholds[i] << ": " << 100.0 * report.map_at[i] << "\n";
    os << "miou: " << 100.0 * report.miou << "\n";
    for (const auto& [c, aps] : report.per_class_ap) {
        os << "class " << c << " AP:";
        for (double ap : aps) os << " " << 100.0 * ap;
        const auto it = report.per_class_iou.find(c);
        if (it != report.per_class_iou.end()) os << "  IoU: " << 100.0 * it->second;
        os << "\n";
    }
    return os.str();
}

std::string report_to_json(const EvalReport& report) {
    nlohmann::json j;
    j["thresholds"] = report.thresholds;
    j["map_at"] = report.map_at;
    j["map_occ"] = report.map_occ;
    j["miou"] = report.miou;
    for (const auto& [c, aps] : report.per_class_ap) j["per_class_ap"][std::to_string(c)] = aps;
    for (const auto& [c, iou] : report.per_class_iou)
        j["per_class_iou"][std::to_string(c)] = iou;
    return j.dump(2);
}

}  // namespace gocc
