// Command-line front end: rendering, flow synthesis, warping, FFT-based
// augmentation, loss evaluation, pose metrics and the self-supervision
// harness, all seeded and reproducible.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "poseflow/experiment.hpp"
#include "poseflow/io.hpp"
#include "poseflow/rng.hpp"

namespace fs = std::filesystem;
using namespace poseflow;

namespace {

// Seed priority: --seed flag, then POSEFLOW_SEED, then (for config-driven
// subcommands) the config value, then 0.
std::optional<std::uint64_t> requested_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("POSEFLOW_SEED")) return std::strtoull(env, nullptr, 10);
    return std::nullopt;
}

TriangleMesh load_mesh_arg(const std::string& arg) {
    if (arg == "cube") return make_box(0.4, 0.4, 0.4);
    if (arg == "plane") return make_plane(0.4, 0.4);
    return load_obj(arg);
}

ImageBuffer match_channels(const ImageBuffer& img, int channels) {
    if (img.channels == channels) return img;
    ImageBuffer out(img.width, img.height, channels);
    const Raster<double> gray = to_grayscale(img);
    for (int c = 0; c < channels; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) out.at(c, x, y) = gray.at(x, y);
    return out;
}

Pose load_single_pose(const fs::path& path) {
    const auto poses = load_poses_jsonl(path);
    if (poses.empty()) throw MalformedFile("pose file is empty: " + path.string());
    return poses.front();
}

struct CameraFlags {
    double fx = 280.0, fy = 280.0, cx = 128.0, cy = 128.0;
    int width = 256, height = 256;

    void attach(CLI::App* cmd) {
        cmd->add_option("--fx", fx, "focal length x (pixels)");
        cmd->add_option("--fy", fy, "focal length y (pixels)");
        cmd->add_option("--cx", cx, "principal point x (pixels)");
        cmd->add_option("--cy", cy, "principal point y (pixels)");
        cmd->add_option("--width", width, "image width");
        cmd->add_option("--height", height, "image height");
    }
    CameraIntrinsics K() const { return {fx, fy, cx, cy}; }
};

int run_augment(const fs::path& src_dir, const fs::path& style_dir, const fs::path& out_dir,
                double beta, double delta0, std::uint64_t seed) {
    std::vector<fs::path> sources, styles;
    for (const auto& e : fs::directory_iterator(src_dir))
        if (e.path().extension() == ".png") sources.push_back(e.path());
    for (const auto& e : fs::directory_iterator(style_dir))
        if (e.path().extension() == ".png") styles.push_back(e.path());
    std::sort(sources.begin(), sources.end());
    std::sort(styles.begin(), styles.end());
    if (sources.empty() || styles.empty()) {
        std::cerr << "augment: no PNG inputs found\n";
        return 2;
    }

    fs::create_directories(out_dir);
    AugmentConfig cfg{beta, delta0, seed};
    for (std::size_t i = 0; i < sources.size(); ++i) {
        // Per-item derived seed: items are independent of iteration order.
        auto rng = make_rng(seed, i);
        const ImageBuffer src = load_png(sources[i]);
        std::uniform_int_distribution<std::size_t> pick(0, styles.size() - 1);
        ImageBuffer style = match_channels(load_png(styles[pick(rng)]), src.channels);
        if (style.width != src.width || style.height != src.height)
            style = resize_bilinear(style, src.width, src.height);
        const ImageBuffer out = augment(src, style, cfg, rng);
        save_png(out_dir / sources[i].filename(), out);
    }
    std::cout << "augmented " << sources.size() << " image(s) -> " << out_dir.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"poseflow: shape-constraint flow and pose self-supervision toolkit"};
    app.require_subcommand(1);
    app.fallthrough(); // let --seed/--jobs appear after the subcommand name

    std::optional<std::uint64_t> seed_flag;
    app.add_option("--seed", seed_flag, "master seed (fallback: POSEFLOW_SEED, then 0)");
    int jobs = 0;
    app.add_option("--jobs", jobs, "worker threads (default: hardware)");

    // augment
    auto* aug = app.add_subcommand("augment", "FFT-based amplitude mix/dropout augmentation");
    std::string aug_src, aug_style, aug_out;
    double aug_beta = 1.0, aug_delta0 = 0.5;
    aug->add_option("--src-dir", aug_src, "directory of source PNGs")->required();
    aug->add_option("--style-dir", aug_style, "directory of style target PNGs")->required();
    aug->add_option("--out-dir", aug_out, "output directory")->required();
    aug->add_option("--beta", aug_beta, "mix strength upper bound");
    aug->add_option("--delta0", aug_delta0, "mix-vs-dropout threshold in (0,1)");

    // render
    auto* ren = app.add_subcommand("render", "rasterize a mesh at a pose");
    std::string ren_mesh, ren_pose, ren_out;
    CameraFlags ren_cam;
    ren->add_option("--mesh", ren_mesh, "OBJ path or 'cube'/'plane'")->required();
    ren->add_option("--pose", ren_pose, "pose JSON-lines file (first line used)")->required();
    ren->add_option("--out", ren_out, "output directory")->required();
    ren_cam.attach(ren);

    // flow-synth
    auto* fsy = app.add_subcommand("flow-synth", "pose-guided flow between two poses");
    std::string fs_mesh, fs_pose_a, fs_pose_b, fs_out;
    CameraFlags fs_cam;
    fsy->add_option("--mesh", fs_mesh, "OBJ path or 'cube'/'plane'")->required();
    fsy->add_option("--pose-a", fs_pose_a, "source pose JSON-lines")->required();
    fsy->add_option("--pose-b", fs_pose_b, "target pose JSON-lines")->required();
    fsy->add_option("--out", fs_out, "output .flo path")->required();
    fs_cam.attach(fsy);

    // warp
    auto* wrp = app.add_subcommand("warp", "warp an image by a flow field");
    std::string w_img, w_flow, w_out, w_mode = "backward", w_valid;
    wrp->add_option("--image", w_img, "input PNG")->required();
    wrp->add_option("--flow", w_flow, "input .flo")->required();
    wrp->add_option("--out", w_out, "output PNG")->required();
    wrp->add_option("--mode", w_mode, "backward or forward")->check(CLI::IsMember({"backward", "forward"}));
    wrp->add_option("--valid", w_valid, "companion validity PNG for the flow");

    // eval-loss
    auto* evl = app.add_subcommand("eval-loss", "evaluate all self-supervision losses once");
    std::string evl_config, evl_out;
    evl->add_option("--config", evl_config, "experiment JSON config")->required();
    evl->add_option("--out", evl_out, "write the JSON record here instead of stdout");

    // eval-pose
    auto* evp = app.add_subcommand("eval-pose", "ADD(-S) and n deg / n cm metrics");
    std::string ep_pred, ep_gt, ep_mesh;
    bool ep_symmetric = false;
    double ep_deg = 5.0, ep_cm = 5.0;
    evp->add_option("--pred", ep_pred, "predicted poses JSON-lines")->required();
    evp->add_option("--gt", ep_gt, "ground-truth poses JSON-lines")->required();
    evp->add_option("--mesh", ep_mesh, "OBJ path or 'cube'/'plane'")->required();
    evp->add_flag("--symmetric", ep_symmetric, "use ADD-S for the distance columns");
    evp->add_option("--deg", ep_deg, "rotation threshold (degrees)");
    evp->add_option("--cm", ep_cm, "translation threshold (centimeters)");

    // selfsup-sim
    auto* sim = app.add_subcommand("selfsup-sim", "run the teacher-student harness");
    std::string sim_config, sim_out = "out";
    sim->add_option("--config", sim_config, "experiment JSON config")->required();
    sim->add_option("--out-dir", sim_out, "output directory");

    // demo
    auto* demo = app.add_subcommand("demo", "cube scene, damped-oracle refinement, metrics table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (jobs > 0) omp_set_num_threads(jobs);
    const std::optional<std::uint64_t> seed_request = requested_seed(seed_flag);
    const std::uint64_t seed = seed_request.value_or(0);

    try {
        if (*aug) return run_augment(aug_src, aug_style, aug_out, aug_beta, aug_delta0, seed);

        if (*ren) {
            const TriangleMesh mesh = load_mesh_arg(ren_mesh);
            const Pose pose = load_single_pose(ren_pose);
            const RenderMaps maps = rasterize(mesh, pose, ren_cam.K(), ren_cam.width, ren_cam.height);
            fs::create_directories(ren_out);
            save_mask_png(fs::path(ren_out) / "mask.png", maps.mask);
            save_png(fs::path(ren_out) / "shaded.png", shaded_render(maps));
            save_pfh(fs::path(ren_out) / "depth.pfh", maps.depth);
            std::cout << "rendered " << mask_area(maps.mask) << " mask pixel(s) -> " << ren_out
                      << "\n";
            return 0;
        }

        if (*fsy) {
            const TriangleMesh mesh = load_mesh_arg(fs_mesh);
            const Pose pose_a = load_single_pose(fs_pose_a);
            const Pose pose_b = load_single_pose(fs_pose_b);
            const RenderMaps maps = rasterize(mesh, pose_a, fs_cam.K(), fs_cam.width, fs_cam.height);
            const FlowField flow = flow_from_poses(maps, pose_a, pose_b, fs_cam.K());
            save_flo(fs_out, flow);
            save_mask_png(fs::path(fs_out).concat(".valid.png"), flow.valid);
            std::cout << "wrote " << fs_out << " and companion validity mask\n";
            return 0;
        }

        if (*wrp) {
            const ImageBuffer img = load_png(w_img);
            FlowField flow = load_flo(w_flow);
            if (!w_valid.empty()) {
                const Mask valid = load_mask_png(w_valid);
                if (valid.width != flow.width || valid.height != flow.height)
                    throw DimensionMismatch("warp: validity mask shape differs from flow");
                flow.valid = valid;
            }
            if (w_mode == "backward") {
                auto [out, valid] = backward_warp(img, flow);
                save_png(w_out, out);
                save_mask_png(fs::path(w_out).concat(".valid.png"), valid);
            } else {
                save_png(w_out, forward_warp(img, flow));
            }
            std::cout << "wrote " << w_out << "\n";
            return 0;
        }

        if (*evl) {
            ExperimentConfig cfg = ExperimentConfig::load(evl_config);
            if (seed_request) cfg.reseed(*seed_request);
            const LossRecord rec = run_eval_loss(cfg);
            const std::string dump = loss_record_to_json(rec).dump(2);
            if (evl_out.empty()) {
                std::cout << dump << "\n";
            } else {
                std::ofstream(evl_out) << dump << "\n";
            }
            return 0;
        }

        if (*evp) {
            const TriangleMesh mesh = load_mesh_arg(ep_mesh);
            const auto pred = load_poses_jsonl(ep_pred);
            const auto gt = load_poses_jsonl(ep_gt);
            if (pred.size() != gt.size())
                throw LengthMismatch("eval-pose: pose lists differ in length");
            const auto points = sample_model_points(mesh, 1024, seed);
            std::vector<PoseErrorRecord> records;
            records.reserve(pred.size());
            for (std::size_t i = 0; i < pred.size(); ++i)
                records.push_back(evaluate_pose(pred[i], gt[i], points));
            const MetricsSummary s = summarize(records, mesh.diameter, ep_symmetric, ep_deg, ep_cm);
            nlohmann::json j;
            j["metric"] = ep_symmetric ? "ADD-S" : "ADD";
            j["acc_0.05d"] = s.acc_005d;
            j["acc_0.1d"] = s.acc_01d;
            j["acc_" + std::to_string(static_cast<int>(ep_deg)) + "deg"] = s.acc_deg;
            j["acc_" + std::to_string(static_cast<int>(ep_cm)) + "cm"] = s.acc_cm;
            j["mean"] = s.mean;
            j["count"] = s.count;
            std::cout << j.dump(2) << "\n";
            return 0;
        }

        if (*sim) {
            ExperimentConfig cfg = ExperimentConfig::load(sim_config);
            if (seed_request) cfg.reseed(*seed_request);
            run_selfsup_sim(cfg, sim_out, &std::cout);
            std::cout << "wrote " << (fs::path(sim_out) / "losses.jsonl").string() << "\n";
            return 0;
        }

        if (*demo) {
            run_demo(seed, std::cout);
            return 0;
        }
    } catch (const MalformedFile& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
