#include "gocc/track.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "gocc/supervision.hpp"

namespace gocc {

void TrackBankConfig::validate() const {
    if (!(t_track > 0.0 && t_track < 1.0))
        throw InvariantViolation("TrackBankConfig: t_track must lie in (0, 1)");
    if (!(gate_radius > 0.0))
        throw InvariantViolation("TrackBankConfig: gate_radius must be positive");
    if (top_k < 1) throw InvariantViolation("TrackBankConfig: top_k must be positive");
    if (max_age < 0) throw InvariantViolation("TrackBankConfig: max_age must be non-negative");
}

InstanceAnchor propagate_anchor(const InstanceAnchor& a, double dt) {
    InstanceAnchor out = a;
    out.center.x() += a.vx * dt;
    out.center.y() += a.vy * dt;
    return out;
}

TrackBank::TrackBank(TrackBankConfig cfg) : cfg_(cfg) { cfg_.validate(); }

std::vector<std::optional<std::uint32_t>> TrackBank::step(
    std::vector<InstancePrediction>& detections) {
    // Descending score, stable for equal scores.
    std::vector<std::size_t> det_order(detections.size());
    std::iota(det_order.begin(), det_order.end(), 0);
    std::stable_sort(det_order.begin(), det_order.end(), [&](std::size_t a, std::size_t b) {
        return detections[a].score > detections[b].score;
    });

    for (auto& e : entries_) e.anchor = propagate_anchor(e.anchor, cfg_.frame_dt);

    // Class-partitioned association on center distance.
    constexpr double kBlocked = 1e9;
    std::vector<int> det_entry(detections.size(), -1);  // detection -> bank entry
    std::vector<bool> entry_matched(entries_.size(), false);

    std::set<int> classes;
    for (const auto& d : detections) classes.insert(d.class_id);
    for (int cls : classes) {
        std::vector<std::size_t> dets, ents;
        for (std::size_t i : det_order)
            if (detections[i].class_id == cls) dets.push_back(i);
        for (std::size_t e = 0; e < entries_.size(); ++e)
            if (entries_[e].class_id == cls) ents.push_back(e);
        if (dets.empty() || ents.empty()) continue;

        std::vector<std::vector<double>> cost(dets.size(), std::vector<double>(ents.size()));
        for (std::size_t i = 0; i < dets.size(); ++i)
            for (std::size_t j = 0; j < ents.size(); ++j) {
                const double d =
                    (detections[dets[i]].anchor.center - entries_[ents[j]].anchor.center).norm();
                cost[i][j] = d <= cfg_.gate_radius ? d : kBlocked;
            }
        for (const auto& [i, j] : hungarian(cost).pairs) {
            if (cost[i][j] >= kBlocked) continue;  // beyond gate
            det_entry[dets[i]] = int(ents[j]);
            entry_matched[ents[j]] = true;
        }
    }

    // Matched entries adopt the detection; unmatched age and may be evicted.
    for (std::size_t i = 0; i < detections.size(); ++i) {
        if (det_entry[i] < 0) continue;
        TrackEntry& e = entries_[det_entry[i]];
        e.anchor = detections[i].anchor;
        e.score = detections[i].score;
        e.age = 0;
    }
    for (std::size_t e = 0; e < entries_.size(); ++e)
        if (!entry_matched[e]) ++entries_[e].age;

    // Unmatched detections become new entries, in score order.
    std::vector<int> entry_of_detection = det_entry;
    for (std::size_t i : det_order) {
        if (entry_of_detection[i] >= 0) continue;
        entry_of_detection[i] = int(entries_.size());
        entries_.push_back(TrackEntry{std::nullopt, detections[i].class_id, detections[i].anchor,
                                      detections[i].score, 0});
    }

    // Inclusive confidence gate for fresh IDs.
    for (auto& e : entries_)
        if (!e.track_id && e.score >= cfg_.t_track) e.track_id = next_id_++;

    std::vector<std::optional<std::uint32_t>> ids(detections.size());
    for (std::size_t i = 0; i < detections.size(); ++i) {
        ids[i] = entries_[entry_of_detection[i]].track_id;
        detections[i].track_id = ids[i];
    }

    // Evict stale entries, then keep the top_k by score (stable).
    std::erase_if(entries_, [&](const TrackEntry& e) { return e.age > cfg_.max_age; });
    if (int(entries_.size()) > cfg_.top_k) {
        std::vector<std::size_t> keep(entries_.size());
        std::iota(keep.begin(), keep.end(), 0);
        std::stable_sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) {
            return entries_[a].score > entries_[b].score;
        });
        keep.resize(std::size_t(cfg_.top_k));
        std::sort(keep.begin(), keep.end());
        std::vector<TrackEntry> kept;
        kept.reserve(keep.size());
        for (std::size_t k : keep) kept.push_back(entries_[k]);
        entries_ = std::move(kept);
    }
    return ids;
}

int count_id_switches(const std::vector<OccFrame>& gt_by_frame,
                      const std::vector<OccFrame>& preds_by_frame, double iou_threshold) {
    if (gt_by_frame.size() != preds_by_frame.size())
        throw GridMismatch("count_id_switches: frame counts differ");

    // GT track id -> most recent matched prediction id.
    std::map<std::uint32_t, std::optional<std::uint32_t>> last_id;
    int switches = 0;

    for (std::size_t f = 0; f < gt_by_frame.size(); ++f) {
        std::set<int> classes;
        for (const auto& g : gt_by_frame[f]) classes.insert(g.class_id);
        for (int cls : classes) {
            OccFrame g_c, p_c;
            for (const auto& g : gt_by_frame[f])
                if (g.class_id == cls) g_c.push_back(g);
            for (const auto& p : preds_by_frame[f])
                if (p.class_id == cls) p_c.push_back(p);
            const auto match = greedy_match(p_c, g_c, iou_threshold);
            for (std::size_t gi = 0; gi < g_c.size(); ++gi) {
                if (match.gt_match[gi] < 0) continue;
                if (!g_c[gi].track_id)
                    throw InvariantViolation("count_id_switches: GT instance lacks track_id");
                const auto pred_id = p_c[std::size_t(match.gt_match[gi])].track_id;
                if (!pred_id) continue;  // ID-less match neither counts nor resets
                auto& remembered = last_id[*g_c[gi].track_id];
                if (remembered && *pred_id != *remembered) ++switches;
                remembered = *pred_id;
            }
        }
    }
    return switches;
}

}  // namespace gocc
