#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gocc/core.hpp"
#include "gocc/splat.hpp"

namespace gocc {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BadMagic : ParseError {
    using ParseError::ParseError;
};
struct VersionUnsupported : ParseError {
    using ParseError::ParseError;
};
struct DimsInconsistent : ParseError {
    using ParseError::ParseError;
};
struct IndicesNotAscending : ParseError {
    using ParseError::ParseError;
};
struct ConfigInvalid : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// JSON-Lines scene: line 1 is a header record (grid, class names, K),
/// each further line one frame of instance predictions.
struct SceneFile {
    struct Frame {
        double t = 0.0;
        std::vector<InstancePrediction> instances;
    };

    VoxelGridSpec grid;
    std::vector<std::string> classes;
    int k = 0;  // Gaussians per instance; 0 = unconstrained
    std::vector<Frame> frames;
};

SceneFile read_scene(const std::string& path);
void write_scene(const SceneFile& scene, const std::string& path);

/// One frame of sparse instance occupancies on a grid. On disk: "GOCC"
/// magic, u32 version, grid (9 f64 + 3 u32 dims), u32 instance count, then
/// per instance i64 track_id (-1 = none), u16 class, f32 score, u32 voxel
/// count and ascending u32 linear indices. Little-endian. A .gocc file may
/// hold several consecutive blocks, one per frame.
struct OccFile {
    VoxelGridSpec grid;
    std::vector<SparseInstanceOccupancy> instances;
};

OccFile read_occ_block(std::istream& in);
void write_occ_block(const OccFile& occ, std::ostream& out);

std::vector<OccFile> read_occ(const std::string& path);  // all blocks
void write_occ(std::span<const OccFile> frames, const std::string& path);

struct MotionConfig {
    double frame_dt = 0.5;  // seconds between frames
};

/// Random instances inside the grid: anchors in the inner 70% of the range,
/// Gaussian offsets bounded by the instance extent, track_id = index.
std::vector<InstancePrediction> sample_instances(std::uint64_t seed, int n, int k,
                                                 const VoxelGridSpec& grid,
                                                 double scale_floor = 0.01);

struct SyntheticScene {
    SceneFile scene;
    std::vector<OccFile> gt;  // one block per frame, oracle-splatted
};

/// Deterministic synthetic test-data factory. Anchors are sampled inside
/// the grid, Gaussian offsets bounded by instance extent, motion is
/// constant-velocity, GT occupancy comes from dense_oracle_splat. Instances
/// that splat to an empty voxel set in a frame are dropped from that frame.
/// Persistent GT track IDs across frames.
SyntheticScene gen_synthetic(std::uint64_t seed, int n_frames, int n_instances, int k,
                             const VoxelGridSpec& grid, const MotionConfig& motion = {},
                             const SplatConfig& splat_cfg = {});

/// ASCII PLY, one colored vertex per occupied voxel center; color cycles
/// per instance by track_id (fallback: instance index).
void export_ply(const OccFile& occ, const std::string& path);

}  // namespace gocc
