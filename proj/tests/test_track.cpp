#include <doctest.h>

#include <set>

#include "gocc/track.hpp"

using namespace gocc;

namespace {

InstancePrediction detection(double x, double y, double score, int cls = 0, double vx = 0,
                             double vy = 0) {
    return InstancePrediction{cls, score,
                              InstanceAnchor(Vec3(x, y, 0), Vec3(2, 2, 1.5), 0, 1, vx, vy),
                              {Gaussian3D(Vec3(0, 0, 0), Vec3(0.5, 0.5, 0.5), Quat(1, 0, 0, 0))},
                              std::nullopt};
}

SparseInstanceOccupancy occ(int cls, double score, std::vector<std::uint32_t> voxels,
                            std::optional<std::uint32_t> track) {
    return SparseInstanceOccupancy{cls, score, track, std::move(voxels)};
}

}  // namespace

TEST_CASE("constant-velocity anchor propagation") {
    const InstanceAnchor a(Vec3(1, 2, 3), Vec3(2, 2, 1.5), 0, 1, 1.0, -2.0);
    const auto still = propagate_anchor(InstanceAnchor(Vec3(1, 2, 3), Vec3(2, 2, 1.5), 0, 1, 0, 0),
                                        0.7);
    CHECK(still.center == Vec3(1, 2, 3));

    const auto moved = propagate_anchor(a, 0.5);
    CHECK(moved.center.isApprox(Vec3(1.5, 1.0, 3.0), 1e-12));
    CHECK(moved.extent == a.extent);

    CHECK(propagate_anchor(a, 0.0).center == a.center);
}

TEST_CASE("confidence gate is inclusive at t_track") {
    SUBCASE("0.25 gets the first ID") {
        TrackBank bank;
        std::vector<InstancePrediction> dets = {detection(0, 0, 0.25)};
        const auto ids = bank.step(dets);
        CHECK(ids[0] == std::uint32_t(0));
        CHECK(dets[0].track_id == std::uint32_t(0));
    }
    SUBCASE("0.1 stays anonymous") {
        TrackBank bank;
        std::vector<InstancePrediction> dets = {detection(0, 0, 0.1)};
        CHECK_FALSE(bank.step(dets)[0].has_value());
    }
    SUBCASE("exactly 0.2 is inside the gate") {
        TrackBank bank;
        std::vector<InstancePrediction> dets = {detection(0, 0, 0.2)};
        CHECK(bank.step(dets)[0] == std::uint32_t(0));
    }
}

TEST_CASE("redetection within the gate keeps one ID across frames") {
    TrackBank bank;
    std::optional<std::uint32_t> id;
    for (int f = 0; f < 5; ++f) {
        std::vector<InstancePrediction> dets = {detection(1.0 + 0.2 * f, 0, 0.8, 0, 0.4, 0)};
        const auto ids = bank.step(dets);
        REQUIRE(ids[0].has_value());
        if (f == 0)
            id = ids[0];
        else
            CHECK(ids[0] == id);
    }
}

TEST_CASE("below-gate entry is promoted once its score rises") {
    TrackBank bank;
    std::vector<InstancePrediction> weak = {detection(0, 0, 0.15)};
    CHECK_FALSE(bank.step(weak)[0].has_value());
    std::vector<InstancePrediction> strong = {detection(0.1, 0, 0.5)};
    CHECK(bank.step(strong)[0].has_value());
}

TEST_CASE("distinct simultaneous detections get distinct IDs") {
    TrackBank bank;
    std::vector<InstancePrediction> dets = {detection(0, 0, 0.9), detection(20, 0, 0.8),
                                            detection(0, 20, 0.7)};
    const auto ids = bank.step(dets);
    std::set<std::uint32_t> seen;
    for (const auto& id : ids) {
        REQUIRE(id.has_value());
        CHECK(seen.insert(*id).second);
    }
}

TEST_CASE("class mismatch blocks association") {
    TrackBank bank;
    std::vector<InstancePrediction> a = {detection(0, 0, 0.9, /*cls=*/0)};
    const auto id_a = bank.step(a)[0];
    std::vector<InstancePrediction> b = {detection(0, 0, 0.9, /*cls=*/1)};
    const auto id_b = bank.step(b)[0];
    REQUIRE(id_a.has_value());
    REQUIRE(id_b.has_value());
    CHECK(*id_a != *id_b);
}

TEST_CASE("gate radius blocks association") {
    TrackBank bank;
    std::vector<InstancePrediction> a = {detection(0, 0, 0.9)};
    const auto id_a = bank.step(a)[0];
    std::vector<InstancePrediction> b = {detection(10, 0, 0.9)};  // 10 m > 4 m gate
    const auto id_b = bank.step(b)[0];
    CHECK(*id_a != *id_b);
}

TEST_CASE("entries older than max_age are evicted") {
    TrackBankConfig cfg;
    cfg.max_age = 1;
    TrackBank bank(cfg);
    std::vector<InstancePrediction> dets = {detection(0, 0, 0.9)};
    const auto first = bank.step(dets)[0];
    std::vector<InstancePrediction> none;
    bank.step(none);  // age 1
    bank.step(none);  // age 2 -> evicted
    CHECK(bank.entries().empty());
    std::vector<InstancePrediction> again = {detection(0, 0, 0.9)};
    CHECK(*bank.step(again)[0] != *first);  // IDs are never reused
}

TEST_CASE("bank never exceeds top_k") {
    TrackBankConfig cfg;
    cfg.top_k = 3;
    TrackBank bank(cfg);
    std::vector<InstancePrediction> dets;
    for (int i = 0; i < 8; ++i) dets.push_back(detection(10.0 * i, 0, 0.3 + 0.05 * i));
    bank.step(dets);
    CHECK(bank.entries().size() == 3);
}

TEST_CASE("raising t_track never assigns more IDs") {
    const auto run = [](double t_track) {
        TrackBankConfig cfg;
        cfg.t_track = t_track;
        TrackBank bank(cfg);
        int assigned = 0;
        for (int f = 0; f < 4; ++f) {
            std::vector<InstancePrediction> dets = {detection(0, 0, 0.15 + 0.1 * f),
                                                    detection(20, 0, 0.45)};
            for (const auto& id : bank.step(dets)) assigned += id.has_value();
        }
        return assigned;
    };
    CHECK(run(0.5) <= run(0.3));
    CHECK(run(0.3) <= run(0.1));
}

TEST_CASE("replaying a sequence yields identical IDs") {
    const auto run = [] {
        TrackBank bank;
        std::vector<std::optional<std::uint32_t>> all;
        for (int f = 0; f < 6; ++f) {
            std::vector<InstancePrediction> dets = {detection(0.3 * f, 0, 0.8, 0),
                                                    detection(15, 0.2 * f, 0.6, 1),
                                                    detection(-10, 5, 0.1 + 0.02 * f, 0)};
            const auto ids = bank.step(dets);
            all.insert(all.end(), ids.begin(), ids.end());
        }
        return all;
    };
    CHECK(run() == run());
}

TEST_CASE("identity switch counting") {
    const std::vector<std::uint32_t> va = {1, 2, 3}, vb = {10, 11, 12};
    SUBCASE("consistent IDs count zero") {
        std::vector<OccFrame> gt, preds;
        for (int f = 0; f < 5; ++f) {
            gt.push_back({occ(0, 1.0, va, 100), occ(0, 1.0, vb, 101)});
            preds.push_back({occ(0, 0.9, va, 0), occ(0, 0.8, vb, 1)});
        }
        CHECK(count_id_switches(gt, preds, 0.3) == 0);
    }
    SUBCASE("a mid-sequence swap counts once per affected GT track") {
        // frames 0-1: GT 100 -> pred 0, GT 101 -> pred 1; frames 2-3 swapped
        std::vector<OccFrame> gt, preds;
        for (int f = 0; f < 4; ++f) {
            gt.push_back({occ(0, 1.0, va, 100), occ(0, 1.0, vb, 101)});
            const std::uint32_t ida = f < 2 ? 0 : 1;
            const std::uint32_t idb = f < 2 ? 1 : 0;
            preds.push_back({occ(0, 0.9, va, ida), occ(0, 0.8, vb, idb)});
        }
        CHECK(count_id_switches(gt, preds, 0.3) == 2);
    }
    SUBCASE("a gap with the same ID afterwards counts zero") {
        std::vector<OccFrame> gt, preds;
        for (int f = 0; f < 5; ++f) {
            gt.push_back({occ(0, 1.0, va, 100)});
            if (f == 2 || f == 3)
                preds.push_back({});  // missed
            else
                preds.push_back({occ(0, 0.9, va, 7)});
        }
        CHECK(count_id_switches(gt, preds, 0.3) == 0);
    }
    SUBCASE("frame count mismatch is an error") {
        CHECK_THROWS_AS(count_id_switches({{}, {}}, {{}}, 0.3), GridMismatch);
    }
}
