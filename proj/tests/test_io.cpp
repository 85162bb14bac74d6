#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gocc/io.hpp"
#include "gocc/metrics.hpp"

using namespace gocc;

namespace {

namespace fs = std::filesystem;

std::string tmp_path(const std::string& name) {
    return (fs::temp_directory_path() / ("gocc_test_" + name)).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

VoxelGridSpec small_grid() {
    return VoxelGridSpec(Vec3(-8, -8, -2), Vec3(8, 8, 2), Vec3(0.4, 0.4, 0.4));
}

bool scenes_equal(const SceneFile& a, const SceneFile& b) {
    if (a.grid != b.grid || a.classes != b.classes || a.k != b.k ||
        a.frames.size() != b.frames.size())
        return false;
    for (std::size_t f = 0; f < a.frames.size(); ++f) {
        const auto& fa = a.frames[f];
        const auto& fb = b.frames[f];
        if (fa.t != fb.t || fa.instances.size() != fb.instances.size()) return false;
        for (std::size_t i = 0; i < fa.instances.size(); ++i) {
            const auto& ia = fa.instances[i];
            const auto& ib = fb.instances[i];
            if (ia.class_id != ib.class_id || ia.score != ib.score ||
                ia.track_id != ib.track_id || ia.anchor.to_array() != ib.anchor.to_array() ||
                ia.gaussians.size() != ib.gaussians.size())
                return false;
            for (std::size_t g = 0; g < ia.gaussians.size(); ++g) {
                const auto& ga = ia.gaussians[g];
                const auto& gb = ib.gaussians[g];
                if (ga.offset != gb.offset || ga.scale != gb.scale ||
                    ga.rotation.coeffs() != gb.rotation.coeffs())
                    return false;
            }
        }
    }
    return true;
}

}  // namespace

TEST_CASE("scene JSONL round-trips structurally") {
    const auto synth = gen_synthetic(41, 3, 3, 5, small_grid());
    const auto path = tmp_path("scene_rt.jsonl");
    write_scene(synth.scene, path);
    const auto back = read_scene(path);
    CHECK(scenes_equal(synth.scene, back));

    // write of a re-read is byte-identical
    const auto path2 = tmp_path("scene_rt2.jsonl");
    write_scene(back, path2);
    CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("header-only scene reads as zero frames") {
    const auto path = tmp_path("header_only.jsonl");
    {
        std::ofstream out(path);
        out << R"({"type":"header","grid":{"min":[0,0,0],"max":[4,4,4],"voxel_size":[1,1,1]},"classes":[],"k":0})"
            << "\n";
    }
    const auto scene = read_scene(path);
    CHECK(scene.frames.empty());
    CHECK(scene.grid.dims() == Idx3(4, 4, 4));
}

TEST_CASE("malformed scene lines are rejected with a line number") {
    const auto path = tmp_path("bad_scene.jsonl");
    {
        std::ofstream out(path);
        out << R"({"type":"header","grid":{"min":[0,0,0],"max":[4,4,4],"voxel_size":[1,1,1]},"classes":[],"k":0})"
            << "\n";
        out << R"({"type":"frame","t":0,"instances":[{"class":0,"score":0.5,"anchor":[1,1,1,1,1,1,0,1,0,0],"track_id":null,"gaussians":[[0,0,0,1,1,1,1,0,0]]}]})"
            << "\n";  // gaussian row of length 9
    }
    try {
        read_scene(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("GOCC round-trips byte-exactly") {
    const auto synth = gen_synthetic(42, 2, 4, 6, small_grid());
    const auto path = tmp_path("occ_rt.gocc");
    write_occ(synth.gt, path);
    const auto bytes = slurp(path);

    const auto back = read_occ(path);
    REQUIRE(back.size() == synth.gt.size());
    const auto path2 = tmp_path("occ_rt2.gocc");
    write_occ(back, path2);
    CHECK(slurp(path2) == bytes);
}

TEST_CASE("empty GOCC block has the exact header size") {
    // magic + version + 9 corner/size f64 + 3 dims u32 + count u32
    const OccFile empty{small_grid(), {}};
    std::ostringstream out(std::ios::binary);
    write_occ_block(empty, out);
    CHECK(out.str().size() == 4 + 4 + 9 * 8 + 3 * 4 + 4);
}

TEST_CASE("GOCC rejects corrupted input") {
    const auto synth = gen_synthetic(43, 1, 2, 4, small_grid());
    const auto path = tmp_path("occ_bad.gocc");
    write_occ(synth.gt, path);
    auto bytes = slurp(path);

    SUBCASE("bad magic") {
        bytes[0] = 'X';
        std::istringstream in(bytes, std::ios::binary);
        CHECK_THROWS_AS(read_occ_block(in), BadMagic);
    }
    SUBCASE("unsupported version") {
        bytes[4] = 9;
        std::istringstream in(bytes, std::ios::binary);
        CHECK_THROWS_AS(read_occ_block(in), VersionUnsupported);
    }
    SUBCASE("inconsistent dims") {
        bytes[4 + 4 + 72] = char(bytes[4 + 4 + 72] + 1);
        std::istringstream in(bytes, std::ios::binary);
        CHECK_THROWS_AS(read_occ_block(in), DimsInconsistent);
    }
    SUBCASE("truncation") {
        std::istringstream in(bytes.substr(0, 40), std::ios::binary);
        CHECK_THROWS_AS(read_occ_block(in), ParseError);
    }
}

TEST_CASE("GOCC rejects non-ascending indices") {
    OccFile occ{small_grid(), {SparseInstanceOccupancy{0, 0.5, std::nullopt, {5, 4}}}};
    std::ostringstream out(std::ios::binary);
    // write_occ_block validates before writing
    CHECK_THROWS_AS(write_occ_block(occ, out), InvariantViolation);

    // hand-build a block with descending indices to exercise the reader
    occ.instances[0].voxels = {4, 5};
    std::ostringstream ok(std::ios::binary);
    write_occ_block(occ, ok);
    auto bytes = ok.str();
    const std::size_t voxel_off = bytes.size() - 8;
    std::swap(bytes[voxel_off], bytes[voxel_off + 4]);  // 5, 4
    std::istringstream in(bytes, std::ios::binary);
    CHECK_THROWS_AS(read_occ_block(in), IndicesNotAscending);
}

TEST_CASE("synthetic generation is deterministic and self-consistent") {
    const auto grid = small_grid();
    SUBCASE("same seed gives byte-identical files") {
        const auto a = gen_synthetic(7, 2, 3, 4, grid);
        const auto b = gen_synthetic(7, 2, 3, 4, grid);
        const auto pa = tmp_path("synth_a.gocc"), pb = tmp_path("synth_b.gocc");
        write_occ(a.gt, pa);
        write_occ(b.gt, pb);
        CHECK(slurp(pa) == slurp(pb));
        const auto sa = tmp_path("synth_a.jsonl"), sb = tmp_path("synth_b.jsonl");
        write_scene(a.scene, sa);
        write_scene(b.scene, sb);
        CHECK(slurp(sa) == slurp(sb));
    }
    SUBCASE("zero instances gives empty frames") {
        const auto s = gen_synthetic(1, 2, 0, 4, grid);
        for (const auto& f : s.scene.frames) CHECK(f.instances.empty());
        for (const auto& g : s.gt) CHECK(g.instances.empty());
    }
    SUBCASE("GT evaluates against itself at 1.0") {
        const auto s = gen_synthetic(9, 2, 4, 6, grid);
        std::vector<OccFrame> frames;
        for (const auto& g : s.gt) frames.push_back(g.instances);
        const auto report = evaluate_scene(frames, frames, grid);
        CHECK(report.map_occ == 1.0);
        CHECK(report.miou == 1.0);
    }
    SUBCASE("invalid config") {
        CHECK_THROWS_AS(gen_synthetic(1, 1, 1, 0, grid), ConfigInvalid);
        CHECK_THROWS_AS(gen_synthetic(1, -1, 1, 4, grid), ConfigInvalid);
    }
}

TEST_CASE("shipped golden files parse identically") {
    const std::string dir = GOCC_GOLDEN_DIR;
    const auto scene = read_scene(dir + "/scene.jsonl");
    CHECK(scene.grid.dims() == Idx3(100, 100, 8));
    CHECK(scene.classes ==
          std::vector<std::string>{"car", "truck", "pedestrian", "cyclist"});
    CHECK(scene.k == 4);
    REQUIRE(scene.frames.size() == 2);
    REQUIRE(scene.frames[0].instances.size() == 2);
    CHECK(scene.frames[0].instances[0].class_id == 3);
    CHECK(scene.frames[0].instances[1].class_id == 2);
    CHECK(scene.frames[0].instances[0].track_id == std::uint32_t(0));
    CHECK(scene.frames[1].t == 0.5);

    const auto gt = read_occ(dir + "/gt.gocc");
    REQUIRE(gt.size() == 2);
    CHECK(gt[0].grid == scene.grid);
    REQUIRE(gt[0].instances.size() == 2);
    CHECK(gt[0].instances[0].voxels.size() == 4);
    CHECK(gt[0].instances[0].voxels.front() == 42628);
    CHECK(gt[0].instances[0].voxels.back() == 43435);
    CHECK(gt[1].instances[1].voxels.size() == 3);
    CHECK(gt[1].instances[1].voxels.front() == 39571);
    CHECK(gt[1].instances[1].voxels.back() == 40371);
    CHECK(gt[1].instances[1].score == doctest::Approx(0.683851).epsilon(1e-5));
}

TEST_CASE("PLY export") {
    const auto grid = small_grid();
    SUBCASE("vertex count equals total voxel count, two instances two colors") {
        OccFile occ{grid,
                    {SparseInstanceOccupancy{0, 0.9, std::uint32_t(0), {1, 2, 3}},
                     SparseInstanceOccupancy{1, 0.8, std::uint32_t(1), {10, 11}}}};
        const auto path = tmp_path("vis.ply");
        export_ply(occ, path);
        const auto text = slurp(path);
        CHECK(text.find("element vertex 5") != std::string::npos);

        // last token triplets differ between the two instances
        std::istringstream in(text);
        std::string line;
        std::vector<std::string> colors;
        bool body = false;
        while (std::getline(in, line)) {
            if (body) {
                const auto pos = line.find(' ', line.find(' ', line.find(' ') + 1) + 1);
                colors.push_back(line.substr(pos + 1));
            }
            if (line == "end_header") body = true;
        }
        REQUIRE(colors.size() == 5);
        CHECK(colors[0] == colors[2]);
        CHECK(colors[0] != colors[3]);
    }
    SUBCASE("empty file is a valid zero-vertex PLY") {
        const OccFile occ{grid, {}};
        const auto path = tmp_path("vis_empty.ply");
        export_ply(occ, path);
        CHECK(slurp(path).find("element vertex 0") != std::string::npos);
    }
}
