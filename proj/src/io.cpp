#include "gocc/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace gocc {
namespace {

using nlohmann::json;

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& j, const char* what, int line) {
    if (!j.is_array() || j.size() != 3)
        throw ParseError("line " + std::to_string(line) + ": " + what + " must be a 3-array");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const char* what) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw ParseError(std::string("GOCC: truncated while reading ") + what);
    return v;
}

constexpr char kMagic[4] = {'G', 'O', 'C', 'C'};
constexpr std::uint32_t kVersion = 1;

const std::array<std::array<std::uint8_t, 3>, 12> kPalette = {{
    {230, 25, 75},  {60, 180, 75},   {255, 225, 25}, {0, 130, 200},
    {245, 130, 48}, {145, 30, 180},  {70, 240, 240}, {240, 50, 230},
    {210, 245, 60}, {250, 190, 212}, {0, 128, 128},  {220, 190, 255},
}};

}  // namespace

SceneFile read_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scene file: " + path);

    std::string line;
    int line_no = 0;

    if (!std::getline(in, line)) throw ParseError("scene file is empty: " + path);
    ++line_no;
    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception& e) {
        throw ParseError("line 1: " + std::string(e.what()));
    }
    if (header.value("type", "") != "header") throw ParseError("line 1: expected header record");
    if (!header.contains("grid")) throw ParseError("line 1: header missing grid");
    const json& g = header["grid"];
    VoxelGridSpec grid(vec3_from_json(g.at("min"), "grid.min", 1),
                       vec3_from_json(g.at("max"), "grid.max", 1),
                       vec3_from_json(g.at("voxel_size"), "grid.voxel_size", 1));

    SceneFile scene{grid, {}, 0, {}};
    if (header.contains("classes"))
        scene.classes = header["classes"].get<std::vector<std::string>>();
    scene.k = header.value("k", 0);

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + std::string(e.what()));
        }
        if (rec.value("type", "") != "frame")
            throw ParseError("line " + std::to_string(line_no) + ": expected frame record");

        SceneFile::Frame frame;
        frame.t = rec.value("t", 0.0);
        for (const json& ji : rec.at("instances")) {
            const json& ja = ji.at("anchor");
            if (!ja.is_array() || ja.size() != 10)
                throw ParseError("line " + std::to_string(line_no) +
                                 ": anchor must have exactly 10 scalars");
            std::array<double, 10> a{};
            for (int i = 0; i < 10; ++i) a[std::size_t(i)] = ja[std::size_t(i)].get<double>();

            InstancePrediction inst{ji.at("class").get<int>(), ji.at("score").get<double>(),
                                    InstanceAnchor::from_array(a), {}, std::nullopt};
            if (ji.contains("track_id") && !ji["track_id"].is_null())
                inst.track_id = ji["track_id"].get<std::uint32_t>();

            for (const json& jg : ji.at("gaussians")) {
                if (!jg.is_array() || jg.size() != 10)
                    throw ParseError("line " + std::to_string(line_no) +
                                     ": gaussian row must have exactly 10 scalars");
                inst.gaussians.emplace_back(
                    Vec3(jg[0].get<double>(), jg[1].get<double>(), jg[2].get<double>()),
                    Vec3(jg[3].get<double>(), jg[4].get<double>(), jg[5].get<double>()),
                    Quat(jg[6].get<double>(), jg[7].get<double>(), jg[8].get<double>(),
                         jg[9].get<double>()));
            }
            inst.validate();
            if (scene.k > 0 && int(inst.gaussians.size()) != scene.k)
                throw InvariantViolation("line " + std::to_string(line_no) +
                                         ": gaussians count differs from header k");
            frame.instances.push_back(std::move(inst));
        }
        scene.frames.push_back(std::move(frame));
    }
    return scene;
}

void write_scene(const SceneFile& scene, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open scene file for writing: " + path);

    json header;
    header["type"] = "header";
    header["grid"]["min"] = vec3_to_json(scene.grid.min_corner());
    header["grid"]["max"] = vec3_to_json(scene.grid.max_corner());
    header["grid"]["voxel_size"] = vec3_to_json(scene.grid.voxel_size());
    header["classes"] = scene.classes;
    header["k"] = scene.k;
    out << header.dump() << "\n";

    for (const auto& frame : scene.frames) {
        json rec;
        rec["type"] = "frame";
        rec["t"] = frame.t;
        rec["instances"] = json::array();
        for (const auto& inst : frame.instances) {
            json ji;
            ji["class"] = inst.class_id;
            ji["score"] = inst.score;
            ji["anchor"] = inst.anchor.to_array();
            if (inst.track_id)
                ji["track_id"] = *inst.track_id;
            else
                ji["track_id"] = nullptr;
            ji["gaussians"] = json::array();
            for (const auto& g : inst.gaussians)
                ji["gaussians"].push_back(json::array(
                    {g.offset.x(), g.offset.y(), g.offset.z(), g.scale.x(), g.scale.y(),
                     g.scale.z(), g.rotation.w(), g.rotation.x(), g.rotation.y(),
                     g.rotation.z()}));
            rec["instances"].push_back(std::move(ji));
        }
        out << rec.dump() << "\n";
    }
}

OccFile read_occ_block(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in) throw ParseError("GOCC: truncated while reading magic");
    if (std::memcmp(magic, kMagic, 4) != 0) throw BadMagic("GOCC: bad magic bytes");

    const auto version = read_pod<std::uint32_t>(in, "version");
    if (version != kVersion)
        throw VersionUnsupported("GOCC: unsupported version " + std::to_string(version));

    Vec3 lo, hi, vs;
    for (int a = 0; a < 3; ++a) lo[a] = read_pod<double>(in, "min corner");
    for (int a = 0; a < 3; ++a) hi[a] = read_pod<double>(in, "max corner");
    for (int a = 0; a < 3; ++a) vs[a] = read_pod<double>(in, "voxel size");
    Idx3 dims;
    for (int a = 0; a < 3; ++a) dims[a] = int(read_pod<std::uint32_t>(in, "dims"));

    VoxelGridSpec grid(lo, hi, vs);
    if (grid.dims() != dims)
        throw DimsInconsistent("GOCC: stored dims disagree with corners and voxel size");

    OccFile occ{grid, {}};
    const auto count = read_pod<std::uint32_t>(in, "instance count");
    occ.instances.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        SparseInstanceOccupancy s;
        const auto tid = read_pod<std::int64_t>(in, "track_id");
        if (tid >= 0) s.track_id = std::uint32_t(tid);
        s.class_id = int(read_pod<std::uint16_t>(in, "class"));
        s.score = double(read_pod<float>(in, "score"));
        const auto nv = read_pod<std::uint32_t>(in, "voxel count");
        s.voxels.resize(nv);
        for (std::uint32_t v = 0; v < nv; ++v) s.voxels[v] = read_pod<std::uint32_t>(in, "voxel");
        for (std::uint32_t v = 0; v < nv; ++v) {
            if (std::uint64_t(s.voxels[v]) >= grid.voxel_count())
                throw DimsInconsistent("GOCC: voxel index out of range in instance " +
                                       std::to_string(i));
            if (v > 0 && s.voxels[v] <= s.voxels[v - 1])
                throw IndicesNotAscending("GOCC: indices not strictly ascending in instance " +
                                          std::to_string(i));
        }
        occ.instances.push_back(std::move(s));
    }
    return occ;
}

void write_occ_block(const OccFile& occ, std::ostream& out) {
    out.write(kMagic, 4);
    write_pod(out, kVersion);
    for (int a = 0; a < 3; ++a) write_pod(out, occ.grid.min_corner()[a]);
    for (int a = 0; a < 3; ++a) write_pod(out, occ.grid.max_corner()[a]);
    for (int a = 0; a < 3; ++a) write_pod(out, occ.grid.voxel_size()[a]);
    for (int a = 0; a < 3; ++a) write_pod(out, std::uint32_t(occ.grid.dims()[a]));
    write_pod(out, std::uint32_t(occ.instances.size()));
    for (const auto& s : occ.instances) {
        s.validate(occ.grid);
        write_pod(out, s.track_id ? std::int64_t(*s.track_id) : std::int64_t(-1));
        write_pod(out, std::uint16_t(s.class_id));
        write_pod(out, float(s.score));
        write_pod(out, std::uint32_t(s.voxels.size()));
        for (std::uint32_t v : s.voxels) write_pod(out, v);
    }
}

std::vector<OccFile> read_occ(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open occupancy file: " + path);
    std::vector<OccFile> frames;
    while (in.peek() != std::char_traits<char>::eof()) frames.push_back(read_occ_block(in));
    if (frames.empty()) throw ParseError("occupancy file has no blocks: " + path);
    return frames;
}

void write_occ(std::span<const OccFile> frames, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open occupancy file for writing: " + path);
    for (const auto& f : frames) write_occ_block(f, out);
}

std::vector<InstancePrediction> sample_instances(std::uint64_t seed, int n, int k,
                                                 const VoxelGridSpec& grid, double scale_floor) {
    if (n < 0) throw ConfigInvalid("sample_instances: negative count");
    if (k < 1) throw ConfigInvalid("sample_instances: k must be at least 1");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const Vec3 lo = grid.min_corner();
    const Vec3 span = grid.max_corner() - lo;

    std::vector<InstancePrediction> out;
    out.reserve(std::size_t(n));
    for (int i = 0; i < n; ++i) {
        Vec3 center;
        for (int a = 0; a < 3; ++a) center[a] = lo[a] + (0.15 + 0.7 * unit(rng)) * span[a];
        const Vec3 extent(0.8 + 2.2 * unit(rng), 0.8 + 2.2 * unit(rng), 0.8 + 1.2 * unit(rng));
        const double yaw = 2.0 * M_PI * unit(rng) - M_PI;
        const double vx = 4.0 * unit(rng) - 2.0;
        const double vy = 4.0 * unit(rng) - 2.0;
        InstanceAnchor anchor(center, extent, std::sin(yaw), std::cos(yaw), vx, vy);

        InstancePrediction inst{int(rng() % 4), 0.25 + 0.75 * unit(rng), anchor, {},
                                std::uint32_t(i)};
        for (int g = 0; g < k; ++g) {
            Vec3 offset, scale;
            for (int a = 0; a < 3; ++a) {
                offset[a] = (unit(rng) - 0.5) * extent[a];
                scale[a] = 0.15 + 0.45 * unit(rng);
            }
            Eigen::Vector4d q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
            while (q.norm() < 1e-6)
                q = Eigen::Vector4d(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
            q.normalize();
            inst.gaussians.emplace_back(offset, scale, Quat(q[0], q[1], q[2], q[3]), scale_floor);
        }
        out.push_back(std::move(inst));
    }
    return out;
}

SyntheticScene gen_synthetic(std::uint64_t seed, int n_frames, int n_instances, int k,
                             const VoxelGridSpec& grid, const MotionConfig& motion,
                             const SplatConfig& splat_cfg) {
    if (n_frames < 0) throw ConfigInvalid("gen_synthetic: negative frame count");
    const auto bodies = sample_instances(seed, n_instances, k, grid, splat_cfg.scale_floor);

    SyntheticScene out{SceneFile{grid, {"car", "truck", "pedestrian", "cyclist"}, k, {}}, {}};
    for (int f = 0; f < n_frames; ++f) {
        SceneFile::Frame frame;
        frame.t = f * motion.frame_dt;
        OccFile gt{grid, {}};
        for (const auto& body : bodies) {
            InstancePrediction inst = body;
            const double dt = f * motion.frame_dt;
            inst.anchor.center.x() += inst.anchor.vx * dt;
            inst.anchor.center.y() += inst.anchor.vy * dt;
            auto occ = dense_oracle_splat(inst, grid, splat_cfg);
            if (occ.voxels.empty()) continue;  // occupies nothing this frame
            frame.instances.push_back(std::move(inst));
            gt.instances.push_back(std::move(occ));
        }
        out.scene.frames.push_back(std::move(frame));
        out.gt.push_back(std::move(gt));
    }
    return out;
}

void export_ply(const OccFile& occ, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open PLY file for writing: " + path);

    std::size_t n_vertices = 0;
    for (const auto& s : occ.instances) n_vertices += s.voxels.size();

    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << n_vertices << "\n";
    out << "property float x\nproperty float y\nproperty float z\n";
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out << "end_header\n";

    for (std::size_t i = 0; i < occ.instances.size(); ++i) {
        const auto& s = occ.instances[i];
        const auto& color =
            kPalette[(s.track_id ? std::size_t(*s.track_id) : i) % kPalette.size()];
        for (std::uint32_t v : s.voxels) {
            const Vec3 c = voxel_center(occ.grid.delinearize(v), occ.grid);
            out << c.x() << " " << c.y() << " " << c.z() << " " << int(color[0]) << " "
                << int(color[1]) << " " << int(color[2]) << "\n";
        }
    }
}

}  // namespace gocc
