#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace gocc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using Idx3 = Eigen::Vector3i;

struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OutOfRange : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Axis-aligned voxel grid: [min_corner, max_corner) divided into
/// dims[a] cells of size voxel_size[a] per axis. The range must be an
/// integer multiple of the voxel size (relative tolerance 1e-9).
class VoxelGridSpec {
public:
    VoxelGridSpec(const Vec3& min_corner, const Vec3& max_corner, const Vec3& voxel_size);

    /// The 80 m x 80 m x 6.4 m ego grid used throughout the tests,
    /// at a configurable uniform cell size (default 0.4 m).
    static VoxelGridSpec ego_grid(double voxel_size = 0.4);

    const Vec3& min_corner() const { return min_corner_; }
    const Vec3& max_corner() const { return max_corner_; }
    const Vec3& voxel_size() const { return voxel_size_; }
    const Idx3& dims() const { return dims_; }

    std::uint64_t voxel_count() const {
        return std::uint64_t(dims_.x()) * std::uint64_t(dims_.y()) * std::uint64_t(dims_.z());
    }

    // x-major, then y, then z
    std::uint32_t linear_index(const Idx3& idx) const {
        return (std::uint32_t(idx.x()) * std::uint32_t(dims_.y()) + std::uint32_t(idx.y())) *
                   std::uint32_t(dims_.z()) +
               std::uint32_t(idx.z());
    }

    Idx3 delinearize(std::uint32_t lin) const {
        const std::uint32_t dz = std::uint32_t(dims_.z());
        const std::uint32_t dy = std::uint32_t(dims_.y());
        return Idx3(int(lin / (dy * dz)), int((lin / dz) % dy), int(lin % dz));
    }

    bool contains_index(const Idx3& idx) const {
        for (int a = 0; a < 3; ++a)
            if (idx[a] < 0 || idx[a] >= dims_[a]) return false;
        return true;
    }

    bool operator==(const VoxelGridSpec& o) const {
        return min_corner_ == o.min_corner_ && max_corner_ == o.max_corner_ &&
               voxel_size_ == o.voxel_size_ && dims_ == o.dims_;
    }
    bool operator!=(const VoxelGridSpec& o) const { return !(*this == o); }

private:
    Vec3 min_corner_, max_corner_, voxel_size_;
    Idx3 dims_;
};

/// Voxel index of a world point, or nullopt when the point lies outside
/// [min_corner, max_corner). Points on a max face are out of range.
std::optional<Idx3> world_to_voxel(const Vec3& p, const VoxelGridSpec& grid);

/// World position of a voxel's center. Throws OutOfRange on a bad index.
Vec3 voxel_center(const Idx3& index, const VoxelGridSpec& grid);

/// One probabilistic occupancy primitive: mean offset from the owning
/// instance center, per-axis scale, and rotation. Scales below the floor
/// are clamped at construction (or rejected when clamping is disabled).
struct Gaussian3D {
    static constexpr double kDefaultScaleFloor = 0.01;

    Gaussian3D(const Vec3& offset, const Vec3& scale, const Quat& rotation,
               double scale_floor = kDefaultScaleFloor, bool clamp_scale = true);

    Vec3 offset;
    Vec3 scale;
    Quat rotation;  // unit, stored normalized
};

/// 10-scalar pose record: center (3), extent (3), yaw as (sin, cos),
/// planar velocity (vx, vy).
struct InstanceAnchor {
    InstanceAnchor(const Vec3& center, const Vec3& extent, double sin_yaw, double cos_yaw,
                   double vx, double vy);

    static InstanceAnchor from_array(const std::array<double, 10>& a);
    std::array<double, 10> to_array() const;

    Vec3 center;
    Vec3 extent;
    double sin_yaw, cos_yaw;  // unit pair, stored normalized
    double vx, vy;
};

struct InstancePrediction {
    int class_id = 0;
    double score = 0.0;
    InstanceAnchor anchor;
    std::vector<Gaussian3D> gaussians;  // non-empty
    std::optional<std::uint32_t> track_id;

    void validate() const;
};

/// Per-instance sparse occupancy: strictly ascending linear voxel indices.
struct SparseInstanceOccupancy {
    int class_id = 0;
    double score = 0.0;
    std::optional<std::uint32_t> track_id;
    std::vector<std::uint32_t> voxels;

    void validate(const VoxelGridSpec& grid) const;
};

}  // namespace gocc
