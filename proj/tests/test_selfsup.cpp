#include <doctest.h>

#include <cmath>

#include "poseflow/selfsup.hpp"
#include "poseflow/rng.hpp"

using namespace poseflow;

namespace {

const CameraIntrinsics kK{280.0, 280.0, 128.0, 128.0};

Pose gt_pose(std::uint64_t seed) {
    auto rng = make_rng(seed);
    Pose p;
    p.t = Vec3(0, 0, 0.9);
    return perturb_pose(p, 180.0, 0.0, rng);
}

struct Scene {
    TriangleMesh mesh = make_box(0.4, 0.4, 0.4);
    Pose gt;
    Pose p0;
    ImageBuffer real;
    ViewSet views;
};

Scene make_scene(std::uint64_t seed, int n_views = 4, int size = 256, double p0_rot = 8.0,
                 double p0_trans = 0.04) {
    Scene s;
    s.gt = gt_pose(seed);
    auto rng = make_rng(seed, 1);
    s.p0 = perturb_pose(s.gt, p0_rot, p0_trans, rng);
    s.real = shaded_render(rasterize(s.mesh, s.gt, kK, size, size));
    auto vrng = make_rng(seed, 2);
    s.views = render_views_around(s.mesh, s.p0, kK, size, size, n_views, 15.0, 0.05, vrng);
    return s;
}

// Returns the prior flows untouched and an identity update.
class ZeroEstimator final : public Estimator {
public:
    std::vector<FlowField> estimate_flow(const ImageBuffer&, const ViewSet&,
                                         const std::vector<FlowField>& pose_guided, const Pose&,
                                         const CameraIntrinsics&) override {
        return pose_guided;
    }
    RelativePose estimate_relative_pose(const std::vector<FlowField>&, const ViewSet&,
                                        const Pose&, const CameraIntrinsics&) override {
        return RelativePose::identity();
    }
    std::unique_ptr<Estimator> clone() const override {
        return std::make_unique<ZeroEstimator>(*this);
    }
};

// Wraps an estimator and adds a constant pixel offset to one view's flow.
class CorruptingEstimator final : public Estimator {
public:
    CorruptingEstimator(std::unique_ptr<Estimator> inner, std::size_t view, double offset)
        : inner_(std::move(inner)), view_(view), offset_(offset) {}

    std::vector<FlowField> estimate_flow(const ImageBuffer& real, const ViewSet& views,
                                         const std::vector<FlowField>& guided, const Pose& cur,
                                         const CameraIntrinsics& K) override {
        auto flows = inner_->estimate_flow(real, views, guided, cur, K);
        for (std::size_t j = 0; j < flows[view_].u.size(); ++j)
            if (flows[view_].valid.data[j]) flows[view_].u[j] += offset_;
        return flows;
    }
    RelativePose estimate_relative_pose(const std::vector<FlowField>& flows, const ViewSet& views,
                                        const Pose& cur, const CameraIntrinsics& K) override {
        return inner_->estimate_relative_pose(flows, views, cur, K);
    }
    std::unique_ptr<Estimator> clone() const override {
        return std::make_unique<CorruptingEstimator>(inner_->clone(), view_, offset_);
    }

private:
    std::unique_ptr<Estimator> inner_;
    std::size_t view_;
    double offset_;
};

} // namespace

TEST_CASE("analytic oracle converges in one iteration and stays") {
    const Scene s = make_scene(701);
    AnalyticOracle oracle(s.gt, kK);
    const RefineTrace trace = refine(oracle, s.real, s.views, s.p0, s.mesh, kK, 4);
    REQUIRE(trace.poses.size() == 5);
    for (std::size_t j = 1; j < trace.poses.size(); ++j) {
        CHECK(rotation_error_deg(trace.poses[j].R, s.gt.R) < 1e-9);
        CHECK(translation_error(trace.poses[j].t, s.gt.t) < 1e-12);
    }
}

TEST_CASE("damped oracle contracts geometrically") {
    const Scene s = make_scene(702);
    const double gamma = 0.5;
    DampedOracle oracle(s.gt, kK, gamma);
    const RefineTrace trace = refine(oracle, s.real, s.views, s.p0, s.mesh, kK, 8);

    const double e0 = rotation_error_deg(s.p0.R, s.gt.R);
    REQUIRE(e0 > 0.1);
    for (int j = 1; j <= 8; ++j) {
        const double ej = rotation_error_deg(trace.poses[j].R, s.gt.R);
        const double expected = e0 * std::pow(1.0 - gamma, j);
        CHECK(ej == doctest::Approx(expected).epsilon(1e-6));
    }
    // Contraction bound from the module invariants, with slack.
    for (double g : {0.3, 0.7}) {
        DampedOracle o(s.gt, kK, g);
        const RefineTrace t = refine(o, s.real, s.views, s.p0, s.mesh, kK, 6);
        CHECK(rotation_error_deg(t.poses.back().R, s.gt.R) <=
              std::pow(1.0 - g, 6) * e0 * 1.1 + 1e-12);
    }
}

TEST_CASE("zero estimator leaves the trace at P0") {
    const Scene s = make_scene(703);
    ZeroEstimator zero;
    const RefineTrace trace = refine(zero, s.real, s.views, s.p0, s.mesh, kK, 3);
    for (const Pose& p : trace.poses) {
        CHECK((p.R - s.p0.R).norm() == 0.0);
        CHECK((p.t - s.p0.t).norm() == 0.0);
    }
}

TEST_CASE("pseudo labels from the analytic teacher are complete and exact") {
    const Scene s = make_scene(704);
    SelfSupConfig cfg;
    cfg.n_views = 4;
    cfg.seed = 704;

    AnalyticOracle teacher(s.gt, kK);
    const PseudoLabels pl =
        generate_pseudo_labels(teacher, s.real, s.views, s.p0, s.mesh, kK, cfg);
    CHECK((pl.pose.R - s.gt.R).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((pl.pose.t - s.gt.t).norm() < 1e-12);
    for (std::size_t i = 0; i < pl.flows.size(); ++i)
        CHECK(mask_area(pl.kept[i]) == mask_area(pl.flows[i].valid));
}

TEST_CASE("a corrupted teacher view is filtered out") {
    const Scene s = make_scene(705);
    SelfSupConfig cfg;
    cfg.n_views = 4;
    cfg.seed = 705;

    CorruptingEstimator teacher(std::make_unique<AnalyticOracle>(s.gt, kK), 2, 10.0);
    const PseudoLabels pl =
        generate_pseudo_labels(teacher, s.real, s.views, s.p0, s.mesh, kK, cfg);
    CHECK(mask_area(pl.kept[2]) == 0);
    // Healthy views stay essentially intact; a small silhouette band can lose
    // its cross-view witnesses to occlusion at these view baselines.
    for (int i : {0, 1, 3}) {
        const double kept_frac = static_cast<double>(mask_area(pl.kept[i])) /
                                 static_cast<double>(mask_area(pl.flows[i].valid));
        CHECK(kept_frac > 0.99);
    }
}

TEST_CASE("pseudo-label purity under a partial corruption") {
    const Scene s = make_scene(706);
    SelfSupConfig cfg;
    cfg.n_views = 4;
    cfg.seed = 706;

    AnalyticOracle inner(s.gt, kK);
    RefineTrace trace = refine(inner, s.real, s.views, s.p0, s.mesh, kK, cfg.s_teacher);
    std::vector<FlowField> flows = trace.flows.back();

    // Corrupt a known pixel rectangle in view 0.
    Mask corrupted(flows[0].width, flows[0].height, 0);
    for (int y = 100; y < 140; ++y)
        for (int x = 100; x < 140; ++x) {
            const std::size_t i = flows[0].idx(x, y);
            if (!flows[0].valid.data[i]) continue;
            flows[0].u[i] += 10.0;
            corrupted.at(x, y) = 1;
        }

    const std::size_t n = s.views.poses.size();
    std::vector<std::vector<FlowField>> cross(n, std::vector<FlowField>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j)
                cross[i][j] =
                    flow_from_poses(s.views.maps[i], s.views.poses[i], s.views.poses[j], kK);

    const auto kept = consistency_filter(flows, cross, 2.0);
    // Precision: nothing corrupted may survive.
    for (int y = 0; y < corrupted.height; ++y)
        for (int x = 0; x < corrupted.width; ++x)
            if (corrupted.at(x, y)) CHECK(kept[0].at(x, y) == 0);
}

TEST_CASE("single view is rejected up front") {
    const Scene s = make_scene(707, 2);
    SelfSupConfig cfg;
    cfg.n_views = 1;
    ViewSet one;
    one.poses = {s.views.poses[0]};
    one.maps = {s.views.maps[0]};
    one.images = {s.views.images[0]};
    one.masks = {s.views.masks[0]};
    AnalyticOracle teacher(s.gt, kK);
    CHECK_THROWS_AS(generate_pseudo_labels(teacher, s.real, one, s.p0, s.mesh, kK, cfg),
                    InsufficientViews);
}

TEST_CASE("noisy_augment") {
    const ImageBuffer img(64, 64, 3, 0.5);

    SUBCASE("zero noise is the identity") {
        NoiseConfig nc;
        auto rng = make_rng(708);
        CHECK(noisy_augment(img, nc, rng).data == img.data);
    }
    SUBCASE("mean absolute deviation matches the folded normal") {
        NoiseConfig nc;
        nc.gaussian_sigma = 0.05;
        ImageBuffer big(256, 256, 1, 0.5);
        auto rng = make_rng(709);
        const ImageBuffer noisy = noisy_augment(big, nc, rng);
        double mad = 0.0;
        for (std::size_t i = 0; i < big.data.size(); ++i)
            mad += std::abs(noisy.data[i] - big.data[i]);
        mad /= static_cast<double>(big.data.size());
        const double expected = 0.05 * std::sqrt(2.0 / M_PI);
        CHECK(mad == doctest::Approx(expected).epsilon(0.1));
    }
    SUBCASE("same seed, same output") {
        NoiseConfig nc;
        nc.gaussian_sigma = 0.03;
        nc.brightness_jitter = 0.02;
        auto r1 = make_rng(710);
        auto r2 = make_rng(710);
        CHECK(noisy_augment(img, nc, r1).data == noisy_augment(img, nc, r2).data);
    }
}

TEST_CASE("ema_update") {
    SUBCASE("fixed point") {
        const std::vector<double> w = {1.0, -2.0, 3.0};
        CHECK(ema_update(w, w, 0.999) == w);
    }
    SUBCASE("geometric approach to a constant student") {
        const double w0 = 1.0, w = 0.25, m = 0.9;
        std::vector<double> teacher = {w0};
        for (int k = 1; k <= 10; ++k) {
            teacher = ema_update(teacher, {w}, m);
            CHECK(teacher[0] == doctest::Approx(w + (w0 - w) * std::pow(m, k)).epsilon(1e-9));
        }
    }
    SUBCASE("mismatched lengths throw") {
        CHECK_THROWS_AS(ema_update({1.0}, {1.0, 2.0}, 0.9), LengthMismatch);
    }
    SUBCASE("0.999^1000 residual") {
        std::vector<double> teacher = {1.0};
        for (int k = 0; k < 1000; ++k) teacher = ema_update(teacher, {0.0}, 0.999);
        CHECK(std::abs(teacher[0] - 0.36769542477096373) < 1e-9); // 0.999^1000
        CHECK(teacher[0] == doctest::Approx(0.3677).epsilon(1e-3));
    }
}

TEST_CASE("self_train_step at the oracle fixed point has zero loss") {
    SelfSupConfig cfg;
    cfg.n_views = 2;
    cfg.seed = 711;
    cfg.noise.gaussian_sigma = 0.02;

    SampleScene scene = make_sample_scene(make_box(0.4, 0.4, 0.4), kK, 128, 128, gt_pose(711),
                                          8.0, 0.04, cfg);
    AnalyticOracle teacher(scene.gt, kK);
    AnalyticOracle student(scene.gt, kK);
    auto rng = make_rng(712);
    const LossRecord rec = self_train_step(teacher, student, scene, cfg, rng);
    // Flow-anchored terms compare bitwise-identical fields and vanish exactly;
    // the pose and feature terms pass through iterated matrix products and
    // carry double-precision dust.
    CHECK(rec.flow == 0.0);
    CHECK(rec.photo == 0.0);
    CHECK(rec.warp_mask == 0.0);
    CHECK(rec.feat < 1e-12);
    CHECK(rec.pose < 1e-12);
    CHECK(rec.total < 1e-10);
}

TEST_CASE("pseudo labels ignore the student's noise setting") {
    const Scene s = make_scene(713, 2, 128);
    SelfSupConfig a;
    a.n_views = 2;
    a.seed = 713;
    SelfSupConfig b = a;
    b.noise.gaussian_sigma = 0.05;

    AnalyticOracle teacher(s.gt, kK);
    const PseudoLabels pa = generate_pseudo_labels(teacher, s.real, s.views, s.p0, s.mesh, kK, a);
    const PseudoLabels pb = generate_pseudo_labels(teacher, s.real, s.views, s.p0, s.mesh, kK, b);
    for (std::size_t i = 0; i < pa.flows.size(); ++i) {
        CHECK(pa.flows[i].u == pb.flows[i].u);
        CHECK(pa.flows[i].v == pb.flows[i].v);
        CHECK(pa.kept[i].data == pb.kept[i].data);
    }
}

TEST_CASE("toy estimator training lowers the loss") {
    SelfSupConfig cfg;
    cfg.n_views = 2;
    cfg.s_teacher = 8;
    cfg.s_student = 4;
    cfg.seed = 714;
    cfg.noise.gaussian_sigma = 0.01;
    cfg.fd_step = 0.05;

    SampleScene scene = make_sample_scene(make_box(0.4, 0.4, 0.4), kK, 96, 96, gt_pose(714),
                                          6.0, 0.04, cfg);
    ToyEstimator student(scene.gt, kK, ToyEstimator::default_initial_params());
    auto teacher = student.clone();

    auto rng = make_rng(715);
    double initial = 0.0, final_loss = 0.0;
    for (int step = 0; step < 60; ++step) {
        const LossRecord rec = self_train_step(*teacher, student, scene, cfg, rng);
        if (step == 0) initial = rec.total;
        final_loss = rec.total;
    }
    REQUIRE(initial > 0.0);
    CHECK(final_loss < 0.9 * initial);
}

TEST_CASE("self_train_step is reproducible") {
    SelfSupConfig cfg;
    cfg.n_views = 2;
    cfg.seed = 716;
    cfg.noise.gaussian_sigma = 0.02;

    const auto run = [&] {
        SampleScene scene = make_sample_scene(make_box(0.4, 0.4, 0.4), kK, 96, 96, gt_pose(716),
                                              6.0, 0.04, cfg);
        ToyEstimator student(scene.gt, kK, ToyEstimator::default_initial_params());
        auto teacher = student.clone();
        auto rng = make_rng(717);
        std::vector<double> totals;
        for (int step = 0; step < 3; ++step)
            totals.push_back(self_train_step(*teacher, student, scene, cfg, rng).total);
        return totals;
    };
    CHECK(run() == run());
}
