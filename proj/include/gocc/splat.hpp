#pragma once

#include <span>
#include <vector>

#include "gocc/core.hpp"

namespace gocc {

struct RefusesLargeGrid : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SplatConfig {
    double occupancy_threshold = 0.5;  // binarization threshold on aggregated p
    double cutoff = 3.0;               // Mahalanobis radius beyond which a Gaussian contributes 0
    double saturation_epsilon = 1e-12;
    double scale_floor = 0.01;  // meters

    void validate() const;
};

struct Aabb {
    Vec3 lo, hi;
};

/// Sigma = R * S * S^T * R^T with S = diag(scale).
Mat3 build_covariance(const Gaussian3D& g);

/// p = exp(-1/2 (x - mean)^T Sigma^{-1} (x - mean)); exactly 1 at the mean.
double gaussian_prob(const Vec3& x, const Vec3& mean, const Mat3& cov);

/// Exact axis-aligned bounding box of the level-c Mahalanobis ellipsoid,
/// centered at instance_center + offset. Half-extent along axis a is
/// c * sqrt(Sigma_aa).
Aabb support_aabb(const Gaussian3D& g, const Vec3& instance_center, double cutoff);

/// p = 1 - prod(1 - p_i), accumulated in log space; saturates to exactly 1
/// when any p_i >= 1 - eps.
double aggregate_occupancy(std::span<const double> probs, double saturation_epsilon = 1e-12);

/// Fast path: iterates only voxels inside each Gaussian's support box.
SparseInstanceOccupancy splat_instance(const InstancePrediction& inst, const VoxelGridSpec& grid,
                                       const SplatConfig& cfg);

/// Brute-force reference: every grid voxel against every Gaussian, same
/// cutoff rule as the fast path so results match exactly. Refuses grids
/// with more than 1e8 voxels.
SparseInstanceOccupancy dense_oracle_splat(const InstancePrediction& inst,
                                           const VoxelGridSpec& grid, const SplatConfig& cfg);

/// Elementwise splat_instance, order preserved; instances are independent.
std::vector<SparseInstanceOccupancy> splat_scene(std::span<const InstancePrediction> instances,
                                                 const VoxelGridSpec& grid, const SplatConfig& cfg,
                                                 int threads = 1);

}  // namespace gocc
