#pragma once

#include <memory>
#include <random>
#include <vector>

#include "poseflow/flow.hpp"
#include "poseflow/geometry.hpp"
#include "poseflow/image.hpp"
#include "poseflow/losses.hpp"
#include "poseflow/mesh.hpp"
#include "poseflow/raster.hpp"

namespace poseflow {

struct NoiseConfig {
    double gaussian_sigma = 0.0;    // per-pixel additive noise std
    double brightness_jitter = 0.0; // global offset drawn from U(-b, b)
    std::uint64_t seed = 0;
};

struct SelfSupConfig {
    int n_views = 4;
    int s_teacher = 8;
    int s_student = 4;
    double ema_m = 0.999;
    double eps_px = 2.0;
    NoiseConfig noise;
    LossWeights weights;
    std::uint64_t seed = 0;
    double fd_step = 0.05;           // gradient-step length for toy estimators
    ConsistencyRule rule = ConsistencyRule::AnyOther;
    double view_rot_deg = 15.0;      // render-view perturbation around P0
    double view_trans_frac = 0.05;
};

// The N synthetic views rendered once around P0 and reused across iterations.
struct ViewSet {
    std::vector<Pose> poses;
    std::vector<RenderMaps> maps;
    std::vector<ImageBuffer> images;
    std::vector<Mask> masks;
};

ViewSet render_views_around(const TriangleMesh& mesh, const Pose& p0, const CameraIntrinsics& K,
                            int width, int height, int n_views, double max_rot_deg,
                            double max_trans_frac, std::mt19937_64& rng);

/// Flow/pose estimator contract. Implementations must be deterministic given
/// identical inputs and parameters; parameters() may be empty for analytic
/// estimators.
class Estimator {
public:
    virtual ~Estimator() = default;

    virtual std::vector<FlowField> estimate_flow(const ImageBuffer& real, const ViewSet& views,
                                                 const std::vector<FlowField>& pose_guided,
                                                 const Pose& current,
                                                 const CameraIntrinsics& K) = 0;

    virtual RelativePose estimate_relative_pose(const std::vector<FlowField>& flows,
                                                const ViewSet& views, const Pose& current,
                                                const CameraIntrinsics& K) = 0;

    virtual std::vector<double> parameters() const { return {}; }
    virtual void set_parameters(const std::vector<double>&) {}
    virtual std::unique_ptr<Estimator> clone() const = 0;
};

/// Reads the ground truth: flows are the analytic pose-guided flows to gt,
/// the relative pose is the exact correction. One iteration converges.
class AnalyticOracle final : public Estimator {
public:
    AnalyticOracle(Pose gt, CameraIntrinsics K) : gt_(gt), K_(K) {}
    std::vector<FlowField> estimate_flow(const ImageBuffer&, const ViewSet&,
                                         const std::vector<FlowField>&, const Pose&,
                                         const CameraIntrinsics&) override;
    RelativePose estimate_relative_pose(const std::vector<FlowField>&, const ViewSet&,
                                        const Pose&, const CameraIntrinsics&) override;
    std::unique_ptr<Estimator> clone() const override;

private:
    Pose gt_;
    CameraIntrinsics K_;
};

/// Returns the true correction scaled by gamma; pose error contracts by
/// (1 - gamma) per iteration, exactly, in the untangled parameterization.
class DampedOracle final : public Estimator {
public:
    DampedOracle(Pose gt, CameraIntrinsics K, double gamma) : gt_(gt), K_(K), gamma_(gamma) {}
    std::vector<FlowField> estimate_flow(const ImageBuffer&, const ViewSet&,
                                         const std::vector<FlowField>&, const Pose&,
                                         const CameraIntrinsics&) override;
    RelativePose estimate_relative_pose(const std::vector<FlowField>&, const ViewSet&,
                                        const Pose&, const CameraIntrinsics&) override;
    std::unique_ptr<Estimator> clone() const override;

private:
    Pose gt_;
    CameraIntrinsics K_;
    double gamma_;
};

/// Parameterized estimator for exercising the training loop end to end.
/// Flow: pose-guided prior blended with the oracle residual through a
/// learnable gain plus a learnable bias. Relative pose: linear map on flow
/// statistics pooled over views (mean residual, mean radial expansion).
class ToyEstimator final : public Estimator {
public:
    // params: [gain_f, bias_u, bias_v, w_u, w_v, w_z]
    ToyEstimator(Pose gt, CameraIntrinsics K, std::vector<double> params);
    static std::vector<double> default_initial_params();

    std::vector<FlowField> estimate_flow(const ImageBuffer&, const ViewSet&,
                                         const std::vector<FlowField>&, const Pose&,
                                         const CameraIntrinsics&) override;
    RelativePose estimate_relative_pose(const std::vector<FlowField>&, const ViewSet&,
                                        const Pose&, const CameraIntrinsics&) override;
    std::vector<double> parameters() const override { return params_; }
    void set_parameters(const std::vector<double>& p) override;
    std::unique_ptr<Estimator> clone() const override;

private:
    Pose gt_;
    CameraIntrinsics K_;
    std::vector<double> params_;
};

struct RefineTrace {
    std::vector<Pose> poses;                  // S+1 entries, front() == P0
    std::vector<std::vector<FlowField>> flows; // S entries, per-view fields
};

/// Iterative refinement: S rounds of estimator flow -> relative pose ->
/// pose update, with the pose-guided flow recomputed after each update.
/// Throws DivergedPose when an iterate leaves the camera frustum (t.z <= 0).
RefineTrace refine(Estimator& estimator, const ImageBuffer& real, const ViewSet& views,
                   const Pose& p0, const TriangleMesh& mesh, const CameraIntrinsics& K, int S);

struct PseudoLabels {
    std::vector<FlowField> flows;
    std::vector<Mask> kept;
    Pose pose;
};

/// Teacher pass: refine for s_teacher iterations, filter the final flows by
/// cross-view consistency, pass the final pose through unfiltered.
PseudoLabels generate_pseudo_labels(Estimator& teacher, const ImageBuffer& real_clean,
                                    const ViewSet& views, const Pose& p0,
                                    const TriangleMesh& mesh, const CameraIntrinsics& K,
                                    const SelfSupConfig& cfg);

/// Gaussian pixel noise plus a global brightness offset, clamped to [0,1].
ImageBuffer noisy_augment(const ImageBuffer& img, const NoiseConfig& nc, std::mt19937_64& rng);

/// theta_t <- m * theta_t + (1 - m) * theta_s, element-wise.
std::vector<double> ema_update(const std::vector<double>& teacher_params,
                               const std::vector<double>& student_params, double m);

struct LossRecord {
    double flow = 0.0;
    double photo = 0.0;
    double warp_mask = 0.0;
    double feat = 0.0;
    double pose = 0.0;
    double img_level = 0.0;
    double total = 0.0;
    double rot_err_deg = 0.0;   // student final pose vs gt, diagnostic
    double trans_err_m = 0.0;
};

struct SampleScene {
    TriangleMesh mesh;
    CameraIntrinsics K;
    int width = 256;
    int height = 256;
    Pose gt;
    Pose p0;
    ImageBuffer real_clean;
    ViewSet views;
    std::vector<Vec3> loss_points;
};

SampleScene make_sample_scene(TriangleMesh mesh, const CameraIntrinsics& K, int width, int height,
                              const Pose& gt, double p0_rot_deg, double p0_trans_frac,
                              const SelfSupConfig& cfg);

/// One teacher-student round: clean pseudo-labels, noisy student pass, all
/// loss terms, and (for parameterized estimators) one finite-difference
/// gradient step followed by the EMA teacher update. The returned record holds
/// the losses evaluated before the parameter update.
LossRecord self_train_step(Estimator& teacher, Estimator& student, const SampleScene& scene,
                           const SelfSupConfig& cfg, std::mt19937_64& rng);

} // namespace poseflow
