#include <doctest.h>

#include <cmath>

#include "poseflow/metrics.hpp"
#include "poseflow/rng.hpp"

using namespace poseflow;

namespace {

std::vector<Vec3> random_points(std::size_t n, std::uint64_t seed, double extent = 0.2) {
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> d(-extent, extent);
    std::vector<Vec3> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.emplace_back(d(rng), d(rng), d(rng));
    return out;
}

Pose base_pose() {
    Pose p;
    p.t = Vec3(0, 0, 1);
    return p;
}

} // namespace

TEST_CASE("add and adds on identical and translated poses") {
    // Grid points: known minimum spacing 0.1, so the small translation below
    // keeps every nearest neighbor at its own index.
    std::vector<Vec3> points;
    for (int ix = 0; ix < 4; ++ix)
        for (int iy = 0; iy < 4; ++iy)
            for (int iz = 0; iz < 4; ++iz)
                points.emplace_back(0.1 * ix - 0.15, 0.1 * iy - 0.15, 0.1 * iz - 0.15);
    const Pose a = base_pose();

    CHECK(add_error(a, a, points) == 0.0);
    CHECK(adds_error(a, a, points) == 0.0);

    Pose b = a;
    b.t += Vec3(0.003, 0.002, -0.001); // small against the point spacing
    const double t = 0.003741657386773941; // |(0.003, 0.002, -0.001)|
    CHECK(add_error(b, a, points) == doctest::Approx(t).epsilon(1e-9));
    CHECK(adds_error(b, a, points) == doctest::Approx(t).epsilon(1e-9));
}

TEST_CASE("a symmetric ring rotated by its symmetry angle fools ADD but not ADD-S") {
    std::vector<Vec3> ring;
    for (int i = 0; i < 8; ++i) {
        const double a = 2.0 * M_PI * i / 8.0;
        ring.emplace_back(0.1 * std::cos(a), 0.1 * std::sin(a), 0.0);
    }
    const Pose gt = base_pose();
    Pose rotated = gt;
    rotated.R = axis_angle_to_matrix(Vec3(0, 0, 1), 2.0 * M_PI / 8.0) * gt.R;

    CHECK(add_error(rotated, gt, ring) > 0.01);
    CHECK(adds_error(rotated, gt, ring) < 1e-6);
}

TEST_CASE("accuracy thresholds are strict") {
    const double diameter = 0.5;
    std::vector<PoseErrorRecord> records(4);
    records[0].add = records[0].adds = 0.0;
    records[1].add = records[1].adds = 0.05 * diameter; // exactly at 0.05d: incorrect
    records[2].add = records[2].adds = 0.04 * diameter;
    records[3].add = records[3].adds = 0.2 * diameter;

    CHECK(accuracy_add(records, diameter, 0.05, false) == doctest::Approx(50.0));
    CHECK(accuracy_add(records, diameter, 0.1, false) == doctest::Approx(75.0));

    std::vector<PoseErrorRecord> recs(1);
    recs[0].rot_err = 4.9;
    recs[0].trans_err = 0.051; // 5.1 cm
    const auto [deg, cm] = accuracy_deg_cm(recs, 5.0, 5.0);
    CHECK(deg == doctest::Approx(100.0));
    CHECK(cm == doctest::Approx(0.0));

    std::vector<PoseErrorRecord> zeros(3);
    const auto [dz, cz] = accuracy_deg_cm(zeros, 5.0, 5.0);
    CHECK(dz == doctest::Approx(100.0));
    CHECK(cz == doctest::Approx(100.0));
}

TEST_CASE("hand-counted mixed set") {
    const double diameter = 1.0;
    std::vector<PoseErrorRecord> records;
    const std::vector<double> errs = {0.01, 0.02, 0.04, 0.06, 0.09, 0.11, 0.3};
    for (double e : errs) {
        PoseErrorRecord r;
        r.add = r.adds = e;
        r.rot_err = e * 100.0;  // 1..30 degrees
        r.trans_err = e;        // meters
        records.push_back(r);
    }
    // errors < 0.05: {0.01, 0.02, 0.04} -> 3/7
    CHECK(accuracy_add(records, diameter, 0.05, false) == doctest::Approx(100.0 * 3 / 7));
    // errors < 0.1: 5/7
    CHECK(accuracy_add(records, diameter, 0.1, false) == doctest::Approx(100.0 * 5 / 7));
    // rot < 5 deg: {1,2,4} -> 3/7 ; trans < 5 cm: {0.01,0.02,0.04} -> 3/7
    const auto [deg, cm] = accuracy_deg_cm(records, 5.0, 5.0);
    CHECK(deg == doctest::Approx(100.0 * 3 / 7));
    CHECK(cm == doctest::Approx(100.0 * 3 / 7));
}

TEST_CASE("adds never exceeds add") {
    const auto points = random_points(64, 602);
    auto rng = make_rng(603);
    for (int trial = 0; trial < 1000; ++trial) {
        const Pose a = perturb_pose(base_pose(), 180.0, 0.1, rng);
        const Pose b = perturb_pose(base_pose(), 180.0, 0.1, rng);
        const PoseErrorRecord r = evaluate_pose(a, b, points);
        CHECK(r.adds <= r.add + 1e-9);
        CHECK(r.add >= 0.0);
    }
}

TEST_CASE("add is invariant under a global rigid transform") {
    const auto points = random_points(64, 604);
    auto rng = make_rng(605);
    for (int trial = 0; trial < 200; ++trial) {
        const Pose a = perturb_pose(base_pose(), 60.0, 0.05, rng);
        const Pose b = perturb_pose(base_pose(), 60.0, 0.05, rng);
        const Pose g = perturb_pose(base_pose(), 180.0, 0.3, rng);

        const auto compose = [](const Pose& outer, const Pose& inner) {
            Pose out;
            out.R = outer.R * inner.R;
            out.t = outer.R * inner.t + outer.t;
            return out;
        };
        const double direct = add_error(a, b, points);
        const double moved = add_error(compose(g, a), compose(g, b), points);
        CHECK(moved == doctest::Approx(direct).epsilon(1e-9));
    }
}

TEST_CASE("accuracies are monotone in their thresholds") {
    auto rng = make_rng(606);
    const auto points = random_points(64, 607);
    std::vector<PoseErrorRecord> records;
    for (int i = 0; i < 50; ++i) {
        const Pose a = perturb_pose(base_pose(), 20.0, 0.1, rng);
        const Pose b = perturb_pose(base_pose(), 20.0, 0.1, rng);
        records.push_back(evaluate_pose(a, b, points));
    }
    double prev_add = 0.0, prev_deg = 0.0, prev_cm = 0.0;
    for (double scale : {0.3, 0.6, 1.0, 2.0}) {
        const double acc = accuracy_add(records, 0.4, 0.1 * scale, false);
        const auto [deg, cm] = accuracy_deg_cm(records, 5.0 * scale, 5.0 * scale);
        CHECK(acc >= prev_add);
        CHECK(deg >= prev_deg);
        CHECK(cm >= prev_cm);
        prev_add = acc;
        prev_deg = deg;
        prev_cm = cm;
    }
}

TEST_CASE("summarize mirrors the table layout") {
    std::vector<PoseErrorRecord> records(2);
    records[0] = PoseErrorRecord{0.0, 0.0, 0.0, 0.0};
    records[1] = PoseErrorRecord{10.0, 10.0, 90.0, 10.0}; // hopeless
    const MetricsSummary s = summarize(records, 1.0, false);
    CHECK(s.acc_005d == doctest::Approx(50.0));
    CHECK(s.acc_01d == doctest::Approx(50.0));
    CHECK(s.acc_deg == doctest::Approx(50.0));
    CHECK(s.acc_cm == doctest::Approx(50.0));
    CHECK(s.mean == doctest::Approx(50.0));
    CHECK(s.count == 2);
}
