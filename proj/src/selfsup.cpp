#include "poseflow/selfsup.hpp"

#include <cmath>

#include "poseflow/rng.hpp"

namespace poseflow {

ViewSet render_views_around(const TriangleMesh& mesh, const Pose& p0, const CameraIntrinsics& K,
                            int width, int height, int n_views, double max_rot_deg,
                            double max_trans_frac, std::mt19937_64& rng) {
    ViewSet views;
    views.poses.reserve(n_views);
    for (int i = 0; i < n_views; ++i)
        views.poses.push_back(perturb_pose(p0, max_rot_deg, max_trans_frac, rng));
    views.maps.reserve(n_views);
    views.images.reserve(n_views);
    views.masks.reserve(n_views);
    for (int i = 0; i < n_views; ++i) {
        views.maps.push_back(rasterize(mesh, views.poses[i], K, width, height));
        views.images.push_back(shaded_render(views.maps.back()));
        views.masks.push_back(views.maps.back().mask);
    }
    return views;
}

RefineTrace refine(Estimator& estimator, const ImageBuffer& real, const ViewSet& views,
                   const Pose& p0, const TriangleMesh& /*mesh*/, const CameraIntrinsics& K,
                   int S) {
    if (S < 1) throw DegenerateInput("refine: S must be >= 1");

    RefineTrace trace;
    trace.poses.push_back(p0);

    // Pose-guided flow toward the current estimate; recomputed after each update.
    auto pose_guided = [&](const Pose& pose) {
        std::vector<FlowField> out;
        out.reserve(views.poses.size());
        for (std::size_t i = 0; i < views.poses.size(); ++i)
            out.push_back(flow_from_poses(views.maps[i], views.poses[i], pose, K));
        return out;
    };

    std::vector<FlowField> guided = pose_guided(p0);
    for (int j = 0; j < S; ++j) {
        const Pose& current = trace.poses.back();
        std::vector<FlowField> flows = estimator.estimate_flow(real, views, guided, current, K);
        const RelativePose delta = estimator.estimate_relative_pose(flows, views, current, K);
        Pose next;
        try {
            next = apply_relative_pose(current, delta, K);
        } catch (const DegenerateInput&) {
            throw DivergedPose("refine: pose left the camera frustum at iteration " +
                               std::to_string(j + 1));
        }
        if (!(next.t.z() > 0.0))
            throw DivergedPose("refine: pose left the camera frustum at iteration " +
                               std::to_string(j + 1));
        trace.flows.push_back(std::move(flows));
        trace.poses.push_back(next);
        guided = pose_guided(next);
    }
    return trace;
}

PseudoLabels generate_pseudo_labels(Estimator& teacher, const ImageBuffer& real_clean,
                                    const ViewSet& views, const Pose& p0,
                                    const TriangleMesh& mesh, const CameraIntrinsics& K,
                                    const SelfSupConfig& cfg) {
    if (static_cast<int>(views.poses.size()) < 2)
        throw InsufficientViews("generate_pseudo_labels: need at least 2 views");

    RefineTrace trace = refine(teacher, real_clean, views, p0, mesh, K, cfg.s_teacher);

    const std::size_t n = views.poses.size();
    std::vector<std::vector<FlowField>> cross(n, std::vector<FlowField>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) cross[i][j] = flow_from_poses(views.maps[i], views.poses[i],
                                                      views.poses[j], K);

    PseudoLabels out;
    out.flows = trace.flows.back();
    out.kept = consistency_filter(out.flows, cross, cfg.eps_px, cfg.rule);
    out.pose = trace.poses.back(); // passed through unfiltered
    return out;
}

ImageBuffer noisy_augment(const ImageBuffer& img, const NoiseConfig& nc, std::mt19937_64& rng) {
    ImageBuffer out = img;
    std::uniform_real_distribution<double> jitter(-nc.brightness_jitter, nc.brightness_jitter);
    const double offset = nc.brightness_jitter > 0.0 ? jitter(rng) : 0.0;
    if (nc.gaussian_sigma > 0.0) {
        std::normal_distribution<double> gauss(0.0, nc.gaussian_sigma);
        for (double& v : out.data) v += gauss(rng) + offset;
    } else if (offset != 0.0) {
        for (double& v : out.data) v += offset;
    }
    clamp01(out);
    return out;
}

std::vector<double> ema_update(const std::vector<double>& teacher_params,
                               const std::vector<double>& student_params, double m) {
    if (teacher_params.size() != student_params.size())
        throw LengthMismatch("ema_update: parameter vectors differ in length");
    std::vector<double> out(teacher_params.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = m * teacher_params[i] + (1.0 - m) * student_params[i];
    return out;
}

SampleScene make_sample_scene(TriangleMesh mesh, const CameraIntrinsics& K, int width, int height,
                              const Pose& gt, double p0_rot_deg, double p0_trans_frac,
                              const SelfSupConfig& cfg) {
    SampleScene scene;
    scene.mesh = std::move(mesh);
    scene.K = K;
    scene.width = width;
    scene.height = height;
    scene.gt = gt;

    auto rng = make_rng(cfg.seed, 11);
    scene.p0 = perturb_pose(gt, p0_rot_deg, p0_trans_frac, rng);
    scene.real_clean = shaded_render(rasterize(scene.mesh, gt, K, width, height));

    auto view_rng = make_rng(cfg.seed, 12);
    scene.views = render_views_around(scene.mesh, scene.p0, K, width, height, cfg.n_views,
                                      cfg.view_rot_deg, cfg.view_trans_frac, view_rng);
    scene.loss_points = sample_model_points(scene.mesh, 1024, derive_seed(cfg.seed, 13));
    return scene;
}

namespace {

struct StudentEval {
    LossRecord rec;
    Pose pose;
};

StudentEval evaluate_student(Estimator& student, const ImageBuffer& noisy,
                             const SampleScene& scene, const PseudoLabels& pseudo,
                             const SelfSupConfig& cfg) {
    RefineTrace trace =
        refine(student, noisy, scene.views, scene.p0, scene.mesh, scene.K, cfg.s_student);
    const std::vector<FlowField>& f_stu = trace.flows.back();
    const Pose p_stu = trace.poses.back();

    LossRecord rec;
    double flow_sum = 0.0;
    for (std::size_t i = 0; i < f_stu.size(); ++i)
        flow_sum += flow_loss(f_stu[i], pseudo.flows[i], pseudo.kept[i]).value;
    rec.flow = flow_sum;
    rec.photo = photometric_loss(scene.real_clean, f_stu, pseudo.flows, scene.views.masks).value;
    rec.warp_mask = warp_mask_loss(scene.views.masks, f_stu, pseudo.flows);
    rec.pose = point_matching_loss(p_stu, pseudo.pose, scene.loss_points, false);

    // Feature-space pseudo-label: real features transported by the teacher
    // flow supervise the ones transported by the student flow, so this term
    // also vanishes when the student matches the teacher.
    const FeatureMap F_real = extract_features(scene.real_clean);
    double feat_sum = 0.0;
    for (std::size_t i = 0; i < f_stu.size(); ++i) {
        const Mask fmask = downsample_mask(scene.views.masks[i], F_real.stride);
        const auto [target, target_valid] = backward_warp_features(F_real, pseudo.flows[i]);
        Mask m(fmask.width, fmask.height, 0);
        for (std::size_t j = 0; j < m.data.size(); ++j)
            m.data[j] = fmask.data[j] && target_valid.data[j];
        feat_sum += feature_level_loss(F_real, target, f_stu[i], m);
    }
    rec.feat = feat_sum;

    rec.img_level = image_level_loss(rec.flow, rec.photo, rec.warp_mask, cfg.weights);
    rec.total = total_selfsup_loss(rec.pose, rec.img_level, rec.feat, cfg.weights);
    return {rec, p_stu};
}

} // namespace

LossRecord self_train_step(Estimator& teacher, Estimator& student, const SampleScene& scene,
                           const SelfSupConfig& cfg, std::mt19937_64& rng) {
    const PseudoLabels pseudo = generate_pseudo_labels(teacher, scene.real_clean, scene.views,
                                                       scene.p0, scene.mesh, scene.K, cfg);

    const ImageBuffer noisy = noisy_augment(scene.real_clean, cfg.noise, rng);

    StudentEval base = evaluate_student(student, noisy, scene, pseudo, cfg);
    base.rec.rot_err_deg = rotation_error_deg(base.pose.R, scene.gt.R);
    base.rec.trans_err_m = translation_error(base.pose.t, scene.gt.t);

    std::vector<double> params = student.parameters();
    if (!params.empty()) {
        // Central finite differences of the total loss over the student
        // parameters, then one descent step and the EMA teacher update.
        const double h = 1e-4;
        std::vector<double> grad(params.size(), 0.0);
        for (std::size_t k = 0; k < params.size(); ++k) {
            std::vector<double> plus = params, minus = params;
            plus[k] += h;
            minus[k] -= h;
            student.set_parameters(plus);
            const double lp = evaluate_student(student, noisy, scene, pseudo, cfg).rec.total;
            student.set_parameters(minus);
            const double lm = evaluate_student(student, noisy, scene, pseudo, cfg).rec.total;
            grad[k] = (lp - lm) / (2.0 * h);
        }
        double gnorm = 0.0;
        for (double g : grad) gnorm += g * g;
        gnorm = std::sqrt(gnorm);
        if (gnorm > 1e-12) {
            const double step = cfg.fd_step / std::max(1.0, gnorm);
            for (std::size_t k = 0; k < params.size(); ++k) params[k] -= step * grad[k];
        }
        student.set_parameters(params);
        teacher.set_parameters(ema_update(teacher.parameters(), params, cfg.ema_m));
    }
    return base.rec;
}

} // namespace poseflow
