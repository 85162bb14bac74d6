#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/resource.h>

#include <CLI11.hpp>

#include "gocc/io.hpp"
#include "gocc/metrics.hpp"
#include "gocc/oracles.hpp"
#include "gocc/splat.hpp"
#include "gocc/supervision.hpp"
#include "gocc/track.hpp"

namespace {

using namespace gocc;

long peak_rss_kb() {
    rusage ru{};
    getrusage(RUSAGE_SELF, &ru);
    return ru.ru_maxrss;
}

VoxelGridSpec override_voxel_size(const VoxelGridSpec& grid, double voxel_size) {
    if (voxel_size <= 0.0) return grid;
    return VoxelGridSpec(grid.min_corner(), grid.max_corner(),
                         Vec3(voxel_size, voxel_size, voxel_size));
}

int default_threads() {
    if (const char* env = std::getenv("GUIDE_THREADS")) {
        const int t = std::atoi(env);
        if (t > 0) return t;
    }
    return 1;
}

std::vector<double> parse_ious(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    if (out.empty()) throw CLI::ValidationError("--ious", "no thresholds given");
    return out;
}

int cmd_splat(const std::string& scene_path, const std::string& out_path, double voxel_size,
              double threshold, double cutoff, bool oracle, int threads) {
    const SceneFile scene = read_scene(scene_path);
    const VoxelGridSpec grid = override_voxel_size(scene.grid, voxel_size);
    SplatConfig cfg;
    cfg.occupancy_threshold = threshold;
    cfg.cutoff = cutoff;

    std::vector<OccFile> frames;
    frames.reserve(scene.frames.size());
    for (const auto& frame : scene.frames) {
        OccFile occ{grid, {}};
        if (oracle) {
            for (const auto& inst : frame.instances)
                occ.instances.push_back(dense_oracle_splat(inst, grid, cfg));
        } else {
            occ.instances = splat_scene(frame.instances, grid, cfg, threads);
        }
        frames.push_back(std::move(occ));
    }
    write_occ(frames, out_path);
    std::size_t voxels = 0;
    for (const auto& f : frames)
        for (const auto& s : f.instances) voxels += s.voxels.size();
    std::cout << "splatted " << scene.frames.size() << " frame(s), " << voxels
              << " occupied voxels -> " << out_path << "\n";
    return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& gt_path,
             const std::string& ious_csv, bool as_json) {
    const auto preds = read_occ(pred_path);
    const auto gts = read_occ(gt_path);
    if (preds.size() != gts.size())
        throw GridMismatch("eval: prediction and GT frame counts differ");
    for (std::size_t f = 0; f < preds.size(); ++f)
        if (preds[f].grid != gts[f].grid)
            throw GridMismatch("eval: grids differ at frame " + std::to_string(f));

    std::vector<OccFrame> pred_frames, gt_frames;
    for (const auto& p : preds) pred_frames.push_back(p.instances);
    for (const auto& g : gts) gt_frames.push_back(g.instances);

    const EvalReport report =
        evaluate_scene(pred_frames, gt_frames, gts.front().grid, parse_ious(ious_csv));
    std::cout << (as_json ? report_to_json(report) + "\n" : format_report(report));
    return 0;
}

int cmd_track(const std::string& scene_path, const std::string& gt_path,
              const std::string& out_path, double iou, const TrackBankConfig& bank_cfg) {
    SceneFile scene = read_scene(scene_path);
    const auto gts = read_occ(gt_path);
    if (gts.size() != scene.frames.size())
        throw GridMismatch("track: scene and GT frame counts differ");

    TrackBank bank(bank_cfg);
    const SplatConfig splat_cfg;
    std::vector<OccFile> out_frames;
    std::vector<OccFrame> pred_frames, gt_frames;
    for (std::size_t f = 0; f < scene.frames.size(); ++f) {
        auto& dets = scene.frames[f].instances;
        const auto ids = bank.step(dets);
        std::cout << "frame " << f << ":";
        for (std::size_t i = 0; i < ids.size(); ++i) {
            std::cout << " det" << i << "->";
            if (ids[i])
                std::cout << *ids[i];
            else
                std::cout << "-";
        }
        std::cout << "\n";

        OccFile occ{scene.grid, splat_scene(dets, scene.grid, splat_cfg, 1)};
        pred_frames.push_back(occ.instances);
        gt_frames.push_back(gts[f].instances);
        out_frames.push_back(std::move(occ));
    }
    write_occ(out_frames, out_path);
    std::cout << "IDS: " << count_id_switches(gt_frames, pred_frames, iou) << "\n";
    return 0;
}

int cmd_synth(std::uint64_t seed, int frames, int instances, int k, double voxel_size,
              const std::string& out_scene, const std::string& out_gt) {
    const VoxelGridSpec grid = VoxelGridSpec::ego_grid(voxel_size);
    const auto synth = gen_synthetic(seed, frames, instances, k, grid);
    write_scene(synth.scene, out_scene);
    write_occ(synth.gt, out_gt);
    std::cout << "wrote " << synth.scene.frames.size() << " frame(s) -> " << out_scene << ", "
              << out_gt << "\n";
    return 0;
}

int cmd_losscheck() {
    const auto grad = oracles::focal_gradient_check(1000, 20240817, 1e-5, 1e-4);
    std::cout << "focal gradient check: " << grad.cases - grad.failures << "/" << grad.cases
              << " pass, max relative error " << grad.max_rel_err << "\n";
    const auto hung = oracles::hungarian_check(500, 424242);
    std::cout << "hungarian brute-force check: " << hung.cases - hung.mismatches << "/"
              << hung.cases << " pass, max |diff| " << hung.max_abs_diff << "\n";
    if (grad.failures == 0 && hung.mismatches == 0) {
        std::cout << "losscheck: PASS\n";
        return 0;
    }
    std::cerr << "losscheck: FAIL\n";
    return 3;
}

int cmd_bench(int instances, int k, double voxel_size, int threads, std::uint64_t seed) {
    const VoxelGridSpec grid = VoxelGridSpec::ego_grid(voxel_size);
    const auto scene = sample_instances(seed, instances, k, grid);
    const SplatConfig cfg;

    const auto t0 = std::chrono::steady_clock::now();
    const auto occ = splat_scene(scene, grid, cfg, threads);
    const auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    std::size_t voxels = 0;
    for (const auto& s : occ) voxels += s.voxels.size();
    std::cout << "bench: " << instances << " instances x " << k << " gaussians, voxel "
              << voxel_size << " m, " << threads << " thread(s)\n";
    std::cout << "wall time: " << ms << " ms\n";
    std::cout << "occupied voxels: " << voxels << "\n";
    std::cout << "peak rss: " << peak_rss_kb() << " kB\n";
    return 0;
}

int cmd_export_ply(const std::string& occ_path, const std::string& out_path, int frame) {
    const auto frames = read_occ(occ_path);
    if (frame < 0 || std::size_t(frame) >= frames.size())
        throw ParseError("export-ply: frame index out of range");
    export_ply(frames[std::size_t(frame)], out_path);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian instance occupancy toolkit"};
    app.require_subcommand(1);

    // splat
    std::string splat_scene_path, splat_out;
    double splat_voxel = 0.0, splat_threshold = 0.5, splat_cutoff = 3.0;
    bool splat_oracle = false;
    int splat_threads = default_threads();
    auto* sc_splat = app.add_subcommand("splat", "Splat a scene to sparse voxel occupancy");
    sc_splat->add_option("--scene", splat_scene_path)->required();
    sc_splat->add_option("--out", splat_out)->required();
    sc_splat->add_option("--voxel-size", splat_voxel, "Override the header grid resolution");
    sc_splat->add_option("--threshold", splat_threshold);
    sc_splat->add_option("--cutoff", splat_cutoff);
    sc_splat->add_flag("--oracle", splat_oracle, "Use the dense brute-force splatter");
    sc_splat->add_option("--threads", splat_threads);

    // eval
    std::string eval_pred, eval_gt, eval_ious = "0.1,0.2,0.3";
    bool eval_json = false;
    auto* sc_eval = app.add_subcommand("eval", "Instance-occupancy mAP and semantic mIoU");
    sc_eval->add_option("--pred", eval_pred)->required();
    sc_eval->add_option("--gt", eval_gt)->required();
    sc_eval->add_option("--ious", eval_ious);
    sc_eval->add_flag("--json", eval_json);

    // track
    std::string track_scene, track_gt, track_out;
    double track_iou = 0.1;
    TrackBankConfig bank_cfg;
    auto* sc_track = app.add_subcommand("track", "Assign track IDs per frame and count switches");
    sc_track->add_option("--scene", track_scene)->required();
    sc_track->add_option("--gt", track_gt)->required();
    sc_track->add_option("--out", track_out)->required();
    sc_track->add_option("--iou", track_iou);
    sc_track->add_option("--t-track", bank_cfg.t_track);
    sc_track->add_option("--top-k", bank_cfg.top_k);
    sc_track->add_option("--max-age", bank_cfg.max_age);
    sc_track->add_option("--gate-radius", bank_cfg.gate_radius);
    sc_track->add_option("--frame-dt", bank_cfg.frame_dt);

    // synth
    std::uint64_t synth_seed = 0;
    int synth_frames = 1, synth_instances = 5, synth_k = 48;
    double synth_voxel = 0.4;
    std::string synth_out_scene, synth_out_gt;
    auto* sc_synth = app.add_subcommand("synth", "Generate a deterministic synthetic scene + GT");
    sc_synth->add_option("--seed", synth_seed);
    sc_synth->add_option("--frames", synth_frames);
    sc_synth->add_option("--instances", synth_instances);
    sc_synth->add_option("--k", synth_k);
    sc_synth->add_option("--voxel-size", synth_voxel);
    sc_synth->add_option("--out-scene", synth_out_scene)->required();
    sc_synth->add_option("--out-gt", synth_out_gt)->required();

    // losscheck
    app.add_subcommand("losscheck", "Run the gradient and Hungarian oracle suites");

    // bench
    int bench_instances = 900, bench_k = 48, bench_threads = default_threads();
    double bench_voxel = 0.4;
    std::uint64_t bench_seed = 1;
    auto* sc_bench = app.add_subcommand("bench", "Time splat_scene and report peak memory");
    sc_bench->add_option("--instances", bench_instances);
    sc_bench->add_option("--k", bench_k);
    sc_bench->add_option("--voxel-size", bench_voxel);
    sc_bench->add_option("--threads", bench_threads);
    sc_bench->add_option("--seed", bench_seed);

    // export-ply
    std::string ply_occ, ply_out;
    int ply_frame = 0;
    auto* sc_ply = app.add_subcommand("export-ply", "Write occupied voxel centers as ASCII PLY");
    sc_ply->add_option("--occ", ply_occ)->required();
    sc_ply->add_option("--out", ply_out)->required();
    sc_ply->add_option("--frame", ply_frame);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (sc_splat->parsed())
            return cmd_splat(splat_scene_path, splat_out, splat_voxel, splat_threshold,
                             splat_cutoff, splat_oracle, splat_threads);
        if (sc_eval->parsed()) return cmd_eval(eval_pred, eval_gt, eval_ious, eval_json);
        if (sc_track->parsed())
            return cmd_track(track_scene, track_gt, track_out, track_iou, bank_cfg);
        if (sc_synth->parsed())
            return cmd_synth(synth_seed, synth_frames, synth_instances, synth_k, synth_voxel,
                             synth_out_scene, synth_out_gt);
        if (app.get_subcommand("losscheck")->parsed()) return cmd_losscheck();
        if (sc_bench->parsed())
            return cmd_bench(bench_instances, bench_k, bench_voxel, bench_threads, bench_seed);
        if (sc_ply->parsed()) return cmd_export_ply(ply_occ, ply_out, ply_frame);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
