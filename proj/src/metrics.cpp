#include "poseflow/metrics.hpp"

#include <cmath>

#include "poseflow/errors.hpp"

namespace poseflow {

namespace {

void transform_points(const Pose& pose, std::span<const Vec3> points, std::vector<Vec3>& out) {
    out.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = pose.R * points[i] + pose.t;
}

} // namespace

double add_error(const Pose& P_pred, const Pose& P_gt, std::span<const Vec3> points) {
    if (points.empty()) throw DegenerateInput("add_error: no points");
    std::vector<Vec3> a, b;
    transform_points(P_pred, points, a);
    transform_points(P_gt, points, b);
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) total += (a[i] - b[i]).norm();
    return total / static_cast<double>(a.size());
}

double adds_error(const Pose& P_pred, const Pose& P_gt, std::span<const Vec3> points) {
    if (points.empty()) throw DegenerateInput("adds_error: no points");
    std::vector<Vec3> a, b;
    transform_points(P_pred, points, a);
    transform_points(P_gt, points, b);
    const std::size_t n = a.size();
    std::vector<double> nn(n);
    #pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        double best = (a[i] - b[0]).squaredNorm();
        for (std::size_t j = 1; j < n; ++j) best = std::min(best, (a[i] - b[j]).squaredNorm());
        nn[i] = std::sqrt(best);
    }
    double total = 0.0;
    for (double d : nn) total += d;
    return total / static_cast<double>(n);
}

PoseErrorRecord evaluate_pose(const Pose& P_pred, const Pose& P_gt, std::span<const Vec3> points) {
    PoseErrorRecord rec;
    rec.add = add_error(P_pred, P_gt, points);
    rec.adds = adds_error(P_pred, P_gt, points);
    rec.rot_err = rotation_error_deg(P_pred.R, P_gt.R);
    rec.trans_err = translation_error(P_pred.t, P_gt.t);
    return rec;
}

double accuracy_add(std::span<const PoseErrorRecord> records, double diameter, double frac,
                    bool symmetric) {
    if (records.empty()) return 0.0;
    const double threshold = frac * diameter;
    std::size_t ok = 0;
    for (const auto& r : records) {
        const double err = symmetric ? r.adds : r.add;
        if (err < threshold) ++ok; // strict: errors exactly at the threshold count as incorrect
    }
    return 100.0 * static_cast<double>(ok) / static_cast<double>(records.size());
}

std::pair<double, double> accuracy_deg_cm(std::span<const PoseErrorRecord> records, double n_deg,
                                          double n_cm) {
    if (records.empty()) return {0.0, 0.0};
    std::size_t ok_deg = 0, ok_cm = 0;
    const double trans_threshold_m = n_cm / 100.0;
    for (const auto& r : records) {
        if (r.rot_err < n_deg) ++ok_deg;
        if (r.trans_err < trans_threshold_m) ++ok_cm;
    }
    const double n = static_cast<double>(records.size());
    return {100.0 * ok_deg / n, 100.0 * ok_cm / n};
}

MetricsSummary summarize(std::span<const PoseErrorRecord> records, double diameter,
                         bool symmetric, double n_deg, double n_cm) {
    MetricsSummary s;
    s.symmetric = symmetric;
    s.count = records.size();
    s.acc_005d = accuracy_add(records, diameter, 0.05, symmetric);
    s.acc_01d = accuracy_add(records, diameter, 0.1, symmetric);
    std::tie(s.acc_deg, s.acc_cm) = accuracy_deg_cm(records, n_deg, n_cm);
    s.mean = (s.acc_005d + s.acc_01d + s.acc_deg + s.acc_cm) / 4.0;
    return s;
}

} // namespace poseflow
