#pragma once

#include <span>
#include <utility>
#include <vector>

#include "poseflow/geometry.hpp"

namespace poseflow {

struct PoseErrorRecord {
    double add = 0.0;       // meters
    double adds = 0.0;      // meters, always <= add
    double rot_err = 0.0;   // degrees
    double trans_err = 0.0; // meters
};

/// Mean index-matched distance between the transformed point sets.
double add_error(const Pose& P_pred, const Pose& P_gt, std::span<const Vec3> points);

/// Mean distance from each predicted point to its nearest ground-truth point
/// (exact brute-force nearest neighbor; point sets are desk scale).
double adds_error(const Pose& P_pred, const Pose& P_gt, std::span<const Vec3> points);

PoseErrorRecord evaluate_pose(const Pose& P_pred, const Pose& P_gt, std::span<const Vec3> points);

/// Percent of records with the chosen distance strictly below frac * diameter.
double accuracy_add(std::span<const PoseErrorRecord> records, double diameter, double frac,
                    bool symmetric);

/// Percent of records with rot_err < n_deg, and independently with
/// trans_err < n_cm centimeters. Thresholds are strict.
std::pair<double, double> accuracy_deg_cm(std::span<const PoseErrorRecord> records, double n_deg,
                                          double n_cm);

// One row of the summary table the CLI prints: ADD(-S) 0.05d / 0.1d, 5deg,
// 5cm, and their arithmetic mean.
struct MetricsSummary {
    bool symmetric = false;
    double acc_005d = 0.0;
    double acc_01d = 0.0;
    double acc_deg = 0.0;
    double acc_cm = 0.0;
    double mean = 0.0;
    std::size_t count = 0;
};

MetricsSummary summarize(std::span<const PoseErrorRecord> records, double diameter,
                         bool symmetric, double n_deg = 5.0, double n_cm = 5.0);

} // namespace poseflow
