#include "gocc/core.hpp"

#include <algorithm>

namespace gocc {

VoxelGridSpec::VoxelGridSpec(const Vec3& min_corner, const Vec3& max_corner,
                             const Vec3& voxel_size)
    : min_corner_(min_corner), max_corner_(max_corner), voxel_size_(voxel_size) {
    for (int a = 0; a < 3; ++a) {
        if (!(max_corner_[a] > min_corner_[a]))
            throw InvariantViolation("VoxelGridSpec: max_corner must exceed min_corner on axis " +
                                     std::to_string(a));
        if (!(voxel_size_[a] > 0.0))
            throw InvariantViolation("VoxelGridSpec: voxel_size must be positive on axis " +
                                     std::to_string(a));
        const double range = max_corner_[a] - min_corner_[a];
        const double n = std::floor(range / voxel_size_[a] + 0.5);
        if (n < 1.0 || std::abs(n * voxel_size_[a] - range) > 1e-9 * range)
            throw InvariantViolation(
                "VoxelGridSpec: range is not an integer multiple of voxel_size on axis " +
                std::to_string(a));
        dims_[a] = int(n);
    }
}

VoxelGridSpec VoxelGridSpec::ego_grid(double voxel_size) {
    return VoxelGridSpec(Vec3(-40.0, -40.0, -1.0), Vec3(40.0, 40.0, 5.4),
                         Vec3(voxel_size, voxel_size, voxel_size));
}

std::optional<Idx3> world_to_voxel(const Vec3& p, const VoxelGridSpec& grid) {
    Idx3 idx;
    for (int a = 0; a < 3; ++a) {
        const double t = std::floor((p[a] - grid.min_corner()[a]) / grid.voxel_size()[a]);
        if (t < 0.0 || t >= double(grid.dims()[a])) return std::nullopt;
        idx[a] = int(t);
    }
    return idx;
}

Vec3 voxel_center(const Idx3& index, const VoxelGridSpec& grid) {
    if (!grid.contains_index(index))
        throw OutOfRange("voxel_center: index outside grid dims");
    Vec3 c;
    for (int a = 0; a < 3; ++a)
        c[a] = grid.min_corner()[a] + (double(index[a]) + 0.5) * grid.voxel_size()[a];
    return c;
}

Gaussian3D::Gaussian3D(const Vec3& offset_, const Vec3& scale_, const Quat& rotation_,
                       double scale_floor, bool clamp_scale)
    : offset(offset_), scale(scale_), rotation(rotation_) {
    for (int a = 0; a < 3; ++a) {
        if (scale[a] < scale_floor) {
            if (!clamp_scale)
                throw InvariantViolation("Gaussian3D: scale below floor on axis " +
                                         std::to_string(a));
            scale[a] = scale_floor;
        }
    }
    // kept as given (no renormalization) so read/write round-trips are byte-exact
    const double n = rotation.norm();
    if (std::abs(n - 1.0) > 1e-6)
        throw InvariantViolation("Gaussian3D: rotation quaternion not unit length");
}

InstanceAnchor::InstanceAnchor(const Vec3& center_, const Vec3& extent_, double sin_yaw_,
                               double cos_yaw_, double vx_, double vy_)
    : center(center_), extent(extent_), sin_yaw(sin_yaw_), cos_yaw(cos_yaw_), vx(vx_), vy(vy_) {
    for (int a = 0; a < 3; ++a)
        if (!(extent[a] > 0.0))
            throw InvariantViolation("InstanceAnchor: extent must be strictly positive");
    const double n = std::sqrt(sin_yaw * sin_yaw + cos_yaw * cos_yaw);
    if (std::abs(n - 1.0) > 1e-6)
        throw InvariantViolation("InstanceAnchor: (sin, cos) yaw pair not unit length");
    sin_yaw /= n;
    cos_yaw /= n;
}

InstanceAnchor InstanceAnchor::from_array(const std::array<double, 10>& a) {
    return InstanceAnchor(Vec3(a[0], a[1], a[2]), Vec3(a[3], a[4], a[5]), a[6], a[7], a[8], a[9]);
}

std::array<double, 10> InstanceAnchor::to_array() const {
    return {center.x(), center.y(), center.z(), extent.x(), extent.y(), extent.z(),
            sin_yaw,    cos_yaw,    vx,         vy};
}

void InstancePrediction::validate() const {
    if (gaussians.empty())
        throw InvariantViolation("InstancePrediction: gaussians must be non-empty");
    if (class_id < 0)
        throw InvariantViolation("InstancePrediction: class_id must be non-negative");
    if (!(score >= 0.0 && score <= 1.0))
        throw InvariantViolation("InstancePrediction: score must lie in [0, 1]");
}

void SparseInstanceOccupancy::validate(const VoxelGridSpec& grid) const {
    const std::uint64_t n = grid.voxel_count();
    for (std::size_t i = 0; i < voxels.size(); ++i) {
        if (std::uint64_t(voxels[i]) >= n)
            throw InvariantViolation("SparseInstanceOccupancy: voxel index out of range");
        if (i > 0 && voxels[i] <= voxels[i - 1])
            throw InvariantViolation("SparseInstanceOccupancy: voxel indices not strictly ascending");
    }
}

}  // namespace gocc
