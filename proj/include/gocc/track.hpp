#pragma once

#include <optional>
#include <vector>

#include "gocc/core.hpp"
#include "gocc/metrics.hpp"

namespace gocc {

struct TrackBankConfig {
    double t_track = 0.2;     // inclusive confidence gate for ID assignment
    int top_k = 300;          // bank capacity
    int max_age = 4;          // frames an entry survives unmatched
    double gate_radius = 4.0; // meters, association gate
    double frame_dt = 0.5;    // seconds between frames

    void validate() const;
};

struct TrackEntry {
    std::optional<std::uint32_t> track_id;
    int class_id = 0;
    InstanceAnchor anchor;
    double score = 0.0;
    int age = 0;
};

/// Constant-velocity step: planar center moves by (vx, vy) * dt.
InstanceAnchor propagate_anchor(const InstanceAnchor& a, double dt);

/// Cross-frame instance store. One bank per sequence; track IDs are unique
/// within a sequence and never change once assigned. Entries whose score
/// meets t_track (inclusive) receive the next fresh ID.
class TrackBank {
public:
    explicit TrackBank(TrackBankConfig cfg = {});

    /// Propagates, associates per class by center distance (Hungarian,
    /// gate_radius cut), updates/creates entries, assigns IDs, ages and
    /// evicts, truncates to top_k. Returns the track_id per detection, in
    /// input order, and annotates the detections in place.
    std::vector<std::optional<std::uint32_t>> step(std::vector<InstancePrediction>& detections);

    const std::vector<TrackEntry>& entries() const { return entries_; }
    std::uint32_t next_id() const { return next_id_; }

private:
    TrackBankConfig cfg_;
    std::vector<TrackEntry> entries_;
    std::uint32_t next_id_ = 0;
};

/// CLEAR-style identity switches: per GT track (track_id on GT occupancies),
/// a switch is counted whenever the matched prediction's ID differs from the
/// most recent previously matched ID. Unmatched frames neither count nor
/// reset the remembered ID. Matching is per-frame per-class greedy occupancy
/// IoU at the given threshold.
int count_id_switches(const std::vector<OccFrame>& gt_by_frame,
                      const std::vector<OccFrame>& preds_by_frame, double iou_threshold);

}  // namespace gocc
