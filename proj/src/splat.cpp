#include "gocc/splat.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <unordered_map>

namespace gocc {
namespace {

// Per-voxel log-space accumulator. Adding a zero contribution leaves the
// state bit-identical, so the fast path (which skips culled Gaussians) and
// the dense oracle (which visits them all) agree exactly.
struct OccAccum {
    double log1m = 0.0;
    bool saturated = false;

    void add(double p, double eps) {
        if (saturated) return;
        if (p >= 1.0 - eps) {
            saturated = true;
            return;
        }
        log1m += std::log1p(-p);
    }

    double value() const { return saturated ? 1.0 : 1.0 - std::exp(log1m); }
};

struct PreparedGaussian {
    Vec3 mean;
    Mat3 inv_cov;
    Aabb box;
};

double maha2(const Vec3& d, const Mat3& inv_cov) { return d.dot(inv_cov * d); }

std::vector<PreparedGaussian> prepare(const InstancePrediction& inst, double cutoff) {
    std::vector<PreparedGaussian> out;
    out.reserve(inst.gaussians.size());
    for (const auto& g : inst.gaussians) {
        const Mat3 cov = build_covariance(g);
        out.push_back({inst.anchor.center + g.offset, cov.inverse(),
                       support_aabb(g, inst.anchor.center, cutoff)});
    }
    return out;
}

}  // namespace

void SplatConfig::validate() const {
    if (!(occupancy_threshold > 0.0 && occupancy_threshold < 1.0))
        throw InvariantViolation("SplatConfig: occupancy_threshold must lie in (0, 1)");
    if (!(cutoff > 0.0)) throw InvariantViolation("SplatConfig: cutoff must be positive");
    if (!(saturation_epsilon > 0.0))
        throw InvariantViolation("SplatConfig: saturation_epsilon must be positive");
}

Mat3 build_covariance(const Gaussian3D& g) {
    const Mat3 r = g.rotation.toRotationMatrix();
    const Mat3 ss = g.scale.cwiseProduct(g.scale).asDiagonal();
    return r * ss * r.transpose();
}

double gaussian_prob(const Vec3& x, const Vec3& mean, const Mat3& cov) {
    const Vec3 d = x - mean;
    return std::exp(-0.5 * maha2(d, cov.inverse()));
}

Aabb support_aabb(const Gaussian3D& g, const Vec3& instance_center, double cutoff) {
    const Mat3 cov = build_covariance(g);
    const Vec3 center = instance_center + g.offset;
    Vec3 half;
    for (int a = 0; a < 3; ++a) half[a] = cutoff * std::sqrt(cov(a, a));
    return {center - half, center + half};
}

double aggregate_occupancy(std::span<const double> probs, double saturation_epsilon) {
    OccAccum acc;
    for (double p : probs) acc.add(p, saturation_epsilon);
    return acc.value();
}

SparseInstanceOccupancy splat_instance(const InstancePrediction& inst, const VoxelGridSpec& grid,
                                       const SplatConfig& cfg) {
    inst.validate();
    cfg.validate();

    const auto gaussians = prepare(inst, cfg.cutoff);
    const double c2 = cfg.cutoff * cfg.cutoff;

    std::unordered_map<std::uint32_t, OccAccum> accum;
    for (const auto& pg : gaussians) {
        // Small margin so a voxel center that passes the Mahalanobis test
        // can never be missed by box rounding; extra candidates contribute 0.
        Idx3 lo, hi;
        bool empty = false;
        for (int a = 0; a < 3; ++a) {
            const double inv = 1.0 / grid.voxel_size()[a];
            int l = int(std::floor((pg.box.lo[a] - 1e-9 - grid.min_corner()[a]) * inv));
            int h = int(std::floor((pg.box.hi[a] + 1e-9 - grid.min_corner()[a]) * inv));
            l = std::max(l, 0);
            h = std::min(h, grid.dims()[a] - 1);
            if (l > h) {
                empty = true;
                break;
            }
            lo[a] = l;
            hi[a] = h;
        }
        if (empty) continue;

        for (int i = lo.x(); i <= hi.x(); ++i)
            for (int j = lo.y(); j <= hi.y(); ++j)
                for (int k = lo.z(); k <= hi.z(); ++k) {
                    const Idx3 idx(i, j, k);
                    const Vec3 d = voxel_center(idx, grid) - pg.mean;
                    const double m2 = maha2(d, pg.inv_cov);
                    if (m2 > c2) continue;
                    accum[grid.linear_index(idx)].add(std::exp(-0.5 * m2),
                                                      cfg.saturation_epsilon);
                }
    }

    SparseInstanceOccupancy occ;
    occ.class_id = inst.class_id;
    occ.score = inst.score;
    occ.track_id = inst.track_id;
    for (const auto& [lin, acc] : accum)
        if (acc.value() >= cfg.occupancy_threshold) occ.voxels.push_back(lin);
    std::sort(occ.voxels.begin(), occ.voxels.end());
    return occ;
}

SparseInstanceOccupancy dense_oracle_splat(const InstancePrediction& inst,
                                           const VoxelGridSpec& grid, const SplatConfig& cfg) {
    inst.validate();
    cfg.validate();
    if (grid.voxel_count() > 100000000ull)
        throw RefusesLargeGrid("dense_oracle_splat: grid exceeds 1e8 voxels");

    const auto gaussians = prepare(inst, cfg.cutoff);
    const double c2 = cfg.cutoff * cfg.cutoff;

    SparseInstanceOccupancy occ;
    occ.class_id = inst.class_id;
    occ.score = inst.score;
    occ.track_id = inst.track_id;

    for (int i = 0; i < grid.dims().x(); ++i)
        for (int j = 0; j < grid.dims().y(); ++j)
            for (int k = 0; k < grid.dims().z(); ++k) {
                const Idx3 idx(i, j, k);
                const Vec3 center = voxel_center(idx, grid);
                OccAccum acc;
                for (const auto& pg : gaussians) {
                    const Vec3 d = center - pg.mean;
                    const double m2 = maha2(d, pg.inv_cov);
                    acc.add(m2 > c2 ? 0.0 : std::exp(-0.5 * m2), cfg.saturation_epsilon);
                }
                if (acc.value() >= cfg.occupancy_threshold)
                    occ.voxels.push_back(grid.linear_index(idx));
            }
    return occ;  // i-major scan order is already ascending
}

std::vector<SparseInstanceOccupancy> splat_scene(std::span<const InstancePrediction> instances,
                                                 const VoxelGridSpec& grid, const SplatConfig& cfg,
                                                 int threads) {
    std::vector<SparseInstanceOccupancy> out(instances.size());
    const int n_threads = std::max(1, std::min<int>(threads, int(instances.size())));
    if (n_threads == 1) {
        for (std::size_t i = 0; i < instances.size(); ++i)
            out[i] = splat_instance(instances[i], grid, cfg);
        return out;
    }
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (int t = 0; t < n_threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < instances.size(); i = next.fetch_add(1))
                out[i] = splat_instance(instances[i], grid, cfg);
        });
    for (auto& th : pool) th.join();
    return out;
}

}  // namespace gocc
