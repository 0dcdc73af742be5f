#include "poseflow/experiment.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "poseflow/io.hpp"
#include "poseflow/rng.hpp"

namespace poseflow {

namespace {

using nlohmann::json;

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig cfg;
    if (!j.contains("seed")) throw MalformedFile("experiment config: seed is mandatory");
    cfg.seed = j.at("seed").get<std::uint64_t>();

    maybe(j, "mesh", cfg.mesh);
    maybe(j, "mesh_scale", cfg.mesh_scale);
    maybe(j, "steps", cfg.steps);
    maybe(j, "estimator", cfg.estimator);
    maybe(j, "damping", cfg.damping);
    maybe(j, "object_distance", cfg.object_distance);

    if (j.contains("image")) {
        cfg.width = j["image"].value("width", cfg.width);
        cfg.height = j["image"].value("height", cfg.height);
    }
    if (j.contains("camera")) {
        const auto& c = j["camera"];
        cfg.K.fx = c.value("fx", cfg.K.fx);
        cfg.K.fy = c.value("fy", cfg.K.fy);
        cfg.K.cx = c.value("cx", cfg.K.cx);
        cfg.K.cy = c.value("cy", cfg.K.cy);
    }
    if (j.contains("perturbation")) {
        cfg.p0_rot_deg = j["perturbation"].value("rot_deg", cfg.p0_rot_deg);
        cfg.p0_trans_frac = j["perturbation"].value("trans_frac", cfg.p0_trans_frac);
    }
    if (j.contains("crop_size")) cfg.crop_size = j["crop_size"].get<int>();

    if (j.contains("selfsup")) {
        const auto& s = j["selfsup"];
        cfg.selfsup.n_views = s.value("n_views", cfg.selfsup.n_views);
        cfg.selfsup.s_teacher = s.value("s_teacher", cfg.selfsup.s_teacher);
        cfg.selfsup.s_student = s.value("s_student", cfg.selfsup.s_student);
        cfg.selfsup.ema_m = s.value("ema_m", cfg.selfsup.ema_m);
        cfg.selfsup.eps_px = s.value("eps_px", cfg.selfsup.eps_px);
        cfg.selfsup.fd_step = s.value("fd_step", cfg.selfsup.fd_step);
        cfg.selfsup.view_rot_deg = s.value("view_rot_deg", cfg.selfsup.view_rot_deg);
        cfg.selfsup.view_trans_frac = s.value("view_trans_frac", cfg.selfsup.view_trans_frac);
        if (s.contains("noise")) {
            cfg.selfsup.noise.gaussian_sigma =
                s["noise"].value("gaussian_sigma", cfg.selfsup.noise.gaussian_sigma);
            cfg.selfsup.noise.brightness_jitter =
                s["noise"].value("brightness_jitter", cfg.selfsup.noise.brightness_jitter);
        }
        if (s.contains("weights")) {
            cfg.selfsup.weights.gamma1 = s["weights"].value("gamma1", cfg.selfsup.weights.gamma1);
            cfg.selfsup.weights.gamma2 = s["weights"].value("gamma2", cfg.selfsup.weights.gamma2);
            cfg.selfsup.weights.gamma3 = s["weights"].value("gamma3", cfg.selfsup.weights.gamma3);
            cfg.selfsup.weights.gamma4 = s["weights"].value("gamma4", cfg.selfsup.weights.gamma4);
        }
        if (s.contains("rule"))
            cfg.selfsup.rule = s["rule"].get<std::string>() == "majority"
                                   ? ConsistencyRule::Majority
                                   : ConsistencyRule::AnyOther;
    }
    if (j.contains("augment")) {
        cfg.augment.beta = j["augment"].value("beta", cfg.augment.beta);
        cfg.augment.delta0 = j["augment"].value("delta0", cfg.augment.delta0);
    }
    cfg.reseed(cfg.seed);

    if (cfg.selfsup.n_views < 2) throw MalformedFile("experiment config: n_views must be >= 2");
    if (cfg.selfsup.s_teacher < 1 || cfg.selfsup.s_student < 1)
        throw MalformedFile("experiment config: iteration counts must be >= 1");
    if (!(cfg.selfsup.ema_m > 0.0 && cfg.selfsup.ema_m < 1.0))
        throw MalformedFile("experiment config: ema_m must lie in (0,1)");
    return cfg;
}

void ExperimentConfig::reseed(std::uint64_t new_seed) {
    seed = new_seed;
    selfsup.seed = new_seed;
    selfsup.noise.seed = derive_seed(new_seed, 21);
    augment.seed = new_seed;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path, bool check_paths) {
    std::ifstream is(path);
    if (!is) throw MalformedFile("experiment config: cannot open " + path.string());
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw MalformedFile("experiment config: " + std::string(e.what()),
                            static_cast<long long>(e.byte));
    }
    ExperimentConfig cfg = from_json(j);
    if (check_paths && cfg.mesh != "cube" && cfg.mesh != "plane" &&
        !std::filesystem::exists(cfg.mesh))
        throw MalformedFile("experiment config: mesh path does not exist: " + cfg.mesh);
    return cfg;
}

TriangleMesh build_mesh(const ExperimentConfig& cfg) {
    if (cfg.mesh == "cube") return make_box(cfg.mesh_scale, cfg.mesh_scale, cfg.mesh_scale);
    if (cfg.mesh == "plane") return make_plane(cfg.mesh_scale, cfg.mesh_scale);
    return load_obj(cfg.mesh);
}

SampleScene build_scene(const ExperimentConfig& cfg) {
    TriangleMesh mesh = build_mesh(cfg);
    auto rng = make_rng(cfg.seed, 1);
    Pose gt;
    gt.t = Vec3(0, 0, cfg.object_distance);
    gt = perturb_pose(gt, 180.0, 0.0, rng); // random orientation, fixed distance

    if (!cfg.crop_size) {
        return make_sample_scene(std::move(mesh), cfg.K, cfg.width, cfg.height, gt,
                                 cfg.p0_rot_deg, cfg.p0_trans_frac, cfg.selfsup);
    }

    // Full-frame capture cropped to the projected bounding square around P0,
    // then everything downstream runs in the cropped camera. The p0 draw here
    // matches the one inside make_sample_scene (same seed stream).
    auto p0_rng = make_rng(cfg.selfsup.seed, 11);
    const Pose p0 = perturb_pose(gt, cfg.p0_rot_deg, cfg.p0_trans_frac, p0_rng);
    const ImageBuffer full =
        shaded_render(rasterize(mesh, gt, cfg.K, cfg.width, cfg.height));
    auto [patch, K2] = crop_to_object(full, mesh, p0, cfg.K, *cfg.crop_size);

    SampleScene scene = make_sample_scene(std::move(mesh), K2, *cfg.crop_size, *cfg.crop_size,
                                          gt, cfg.p0_rot_deg, cfg.p0_trans_frac, cfg.selfsup);
    scene.real_clean = std::move(patch); // the resampled capture, not a direct render
    return scene;
}

std::pair<ImageBuffer, CameraIntrinsics> crop_to_object(const ImageBuffer& img,
                                                        const TriangleMesh& mesh, const Pose& p0,
                                                        const CameraIntrinsics& K, int out_size,
                                                        double padding) {
    const auto projected = project_points(mesh.vertices, p0, K);
    double min_x = projected[0].uv.x(), max_x = min_x;
    double min_y = projected[0].uv.y(), max_y = min_y;
    for (const auto& pr : projected) {
        min_x = std::min(min_x, pr.uv.x());
        max_x = std::max(max_x, pr.uv.x());
        min_y = std::min(min_y, pr.uv.y());
        max_y = std::max(max_y, pr.uv.y());
    }
    const double cx = 0.5 * (min_x + max_x);
    const double cy = 0.5 * (min_y + max_y);
    const double side = padding * std::max(max_x - min_x, max_y - min_y);
    if (!(side > 0.0)) throw DegenerateInput("crop_to_object: degenerate projection");

    const double x0 = cx - side / 2.0;
    const double y0 = cy - side / 2.0;
    const double scale = out_size / side;

    // Resample the crop with bilinear lookups in the source frame.
    ImageBuffer out(out_size, out_size, img.channels, 0.0);
    for (int c = 0; c < img.channels; ++c) {
        for (int y = 0; y < out_size; ++y) {
            for (int x = 0; x < out_size; ++x) {
                const double sx = x0 + (x + 0.5) / scale - 0.5;
                const double sy = y0 + (y + 0.5) / scale - 0.5;
                if (sx < 0 || sy < 0 || sx > img.width - 1 || sy > img.height - 1) continue;
                const int ix = std::min(static_cast<int>(sx), img.width - 2);
                const int iy = std::min(static_cast<int>(sy), img.height - 2);
                const double fx = sx - ix, fy = sy - iy;
                out.at(c, x, y) = (1 - fx) * (1 - fy) * img.at(c, ix, iy) +
                                  fx * (1 - fy) * img.at(c, ix + 1, iy) +
                                  (1 - fx) * fy * img.at(c, ix, iy + 1) +
                                  fx * fy * img.at(c, ix + 1, iy + 1);
            }
        }
    }
    CameraIntrinsics K2;
    K2.fx = K.fx * scale;
    K2.fy = K.fy * scale;
    K2.cx = (K.cx - x0) * scale;
    K2.cy = (K.cy - y0) * scale;
    return {std::move(out), K2};
}

json loss_record_to_json(const LossRecord& rec) {
    json j;
    j["flow"] = rec.flow;
    j["photo"] = rec.photo;
    j["warp_mask"] = rec.warp_mask;
    j["feat"] = rec.feat;
    j["pose"] = rec.pose;
    j["img_level"] = rec.img_level;
    j["total"] = rec.total;
    j["rot_err_deg"] = rec.rot_err_deg;
    j["trans_err_m"] = rec.trans_err_m;
    return j;
}

namespace {

std::unique_ptr<Estimator> make_estimator(const ExperimentConfig& cfg, const SampleScene& scene) {
    if (cfg.estimator == "analytic") return std::make_unique<AnalyticOracle>(scene.gt, scene.K);
    if (cfg.estimator == "damped")
        return std::make_unique<DampedOracle>(scene.gt, scene.K, cfg.damping);
    if (cfg.estimator == "toy")
        return std::make_unique<ToyEstimator>(scene.gt, scene.K,
                                              ToyEstimator::default_initial_params());
    throw MalformedFile("experiment config: unknown estimator '" + cfg.estimator + "'");
}

} // namespace

double run_selfsup_sim(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                       std::ostream* log) {
    std::filesystem::create_directories(out_dir);
    SampleScene scene = build_scene(cfg);

    std::unique_ptr<Estimator> student = make_estimator(cfg, scene);
    std::unique_ptr<Estimator> teacher = student->clone(); // shared initial weights

    std::ofstream losses(out_dir / "losses.jsonl");
    if (!losses) throw MalformedFile("run_selfsup_sim: cannot write to " + out_dir.string());

    auto rng = make_rng(cfg.seed, 31);
    LossRecord first{}, last{};
    for (int step = 0; step < cfg.steps; ++step) {
        const LossRecord rec = self_train_step(*teacher, *student, scene, cfg.selfsup, rng);
        if (step == 0) first = rec;
        last = rec;
        json j = loss_record_to_json(rec);
        j["step"] = step;
        losses << j.dump() << "\n";
        if (log && (step % 20 == 0 || step + 1 == cfg.steps))
            *log << "step " << step << " total " << rec.total << "\n";
    }

    json summary;
    summary["steps"] = cfg.steps;
    summary["initial_total"] = first.total;
    summary["final_total"] = last.total;
    summary["final_rot_err_deg"] = last.rot_err_deg;
    summary["final_trans_err_m"] = last.trans_err_m;
    std::ofstream(out_dir / "summary.json") << summary.dump(2) << "\n";
    return last.total;
}

LossRecord run_eval_loss(const ExperimentConfig& cfg) {
    SampleScene scene = build_scene(cfg);
    std::unique_ptr<Estimator> student = make_estimator(cfg, scene);
    std::unique_ptr<Estimator> teacher = student->clone();
    auto rng = make_rng(cfg.seed, 31);
    return self_train_step(*teacher, *student, scene, cfg.selfsup, rng);
}

DemoResult run_demo(std::uint64_t seed, std::ostream& out, int n_starts) {
    const TriangleMesh mesh = make_box(0.4, 0.4, 0.4);
    const CameraIntrinsics K{280.0, 280.0, 128.0, 128.0};
    const int size = 256;

    DemoResult res;
    std::vector<PoseErrorRecord> records;
    const std::vector<Vec3> points = sample_model_points(mesh, 1024, derive_seed(seed, 3));

    out << "demo: cube scene, damped-oracle refinement (gamma=0.5, S=8), " << n_starts
        << " seeded starts\n";
    for (int trial = 0; trial < n_starts; ++trial) {
        auto rng = make_rng(seed, 100 + trial);
        Pose gt;
        gt.t = Vec3(0, 0, 0.9);
        gt = perturb_pose(gt, 180.0, 0.0, rng);
        const Pose p0 = perturb_pose(gt, 10.0, 0.05, rng);

        const ImageBuffer real = shaded_render(rasterize(mesh, gt, K, size, size));
        ViewSet views = render_views_around(mesh, p0, K, size, size, 4, 15.0, 0.05, rng);

        DampedOracle oracle(gt, K, 0.5);
        const RefineTrace trace = refine(oracle, real, views, p0, mesh, K, 8);
        const Pose refined = trace.poses.back();

        if (trial == 0) {
            res.initial_rot_deg = rotation_error_deg(p0.R, gt.R);
            res.initial_trans_m = translation_error(p0.t, gt.t);
        }
        records.push_back(evaluate_pose(refined, gt, points));
        res.max_final_rot_deg = std::max(res.max_final_rot_deg, records.back().rot_err);
        res.max_final_trans_m = std::max(res.max_final_trans_m, records.back().trans_err);
    }

    res.metrics = summarize(records, mesh.diameter, true);
    out << std::fixed << std::setprecision(2);
    out << "  ADD-S 0.05d  ADD-S 0.1d   5deg      5cm      MEAN\n";
    out << "  " << std::setw(9) << res.metrics.acc_005d << "  " << std::setw(9)
        << res.metrics.acc_01d << "  " << std::setw(8) << res.metrics.acc_deg << "  "
        << std::setw(8) << res.metrics.acc_cm << "  " << std::setw(8) << res.metrics.mean << "\n";
    out << std::setprecision(6);
    out << "worst final rotation error: " << res.max_final_rot_deg << " deg\n";
    out << "worst final translation error: " << res.max_final_trans_m * 1000.0 << " mm\n";
    return res;
}

} // namespace poseflow
