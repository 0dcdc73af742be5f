#pragma once

#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "poseflow/errors.hpp"

namespace poseflow {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Rot6d = Eigen::Matrix<double, 6, 1>;

struct CameraIntrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
};

// Rigid transform from model frame to camera frame. The object is expected
// to sit in front of the camera (t.z > 0).
struct Pose {
    Mat3 R = Mat3::Identity();
    Vec3 t = Vec3(0, 0, 1);
};

// Decoupled pose update. v = (v_x, v_y, v_z): v_x, v_y shift the projected
// center in normalized-pixel units, v_z is a log depth ratio.
struct RelativePose {
    Rot6d rot6 = (Rot6d() << 1, 0, 0, 0, 1, 0).finished();
    Vec3 v = Vec3::Zero();

    static RelativePose identity() { return RelativePose{}; }
};

/// Gram-Schmidt map from the 6-vector (two matrix columns) to a proper rotation.
/// Throws DegenerateInput when the columns are near zero or near parallel.
Mat3 rot6d_to_matrix(const Rot6d& r);

Rot6d matrix_to_rot6d(const Mat3& R);

bool is_rotation_matrix(const Mat3& R, double tol = 1e-6);

/// Untangled update: R_new = R_delta * R_prev, depth scaled by exp(-v_z),
/// image-plane offsets applied in normalized pixels.
Pose apply_relative_pose(const Pose& prev, const RelativePose& delta, const CameraIntrinsics& K);

/// Exact inverse of apply_relative_pose: the delta taking prev onto target.
RelativePose relative_pose_between(const Pose& prev, const Pose& target, const CameraIntrinsics& K);

RelativePose scale_relative_pose(const RelativePose& delta, double factor);

struct Projection {
    Vec2 uv;      // pixels
    double depth; // meters, camera z
};

/// Pinhole projection of model-frame points. Throws BehindCamera listing any
/// point whose camera-frame depth falls below 1e-9.
std::vector<Projection> project_points(std::span<const Vec3> points, const Pose& pose,
                                       const CameraIntrinsics& K);

/// Single-point variant; returns false instead of throwing when behind the camera.
bool project_point(const Vec3& p, const Pose& pose, const CameraIntrinsics& K, Vec2& uv,
                   double& depth);

double rotation_error_deg(const Mat3& Ra, const Mat3& Rb);
double translation_error(const Vec3& ta, const Vec3& tb);

Mat3 axis_angle_to_matrix(const Vec3& axis, double angle_rad);
/// Log map; returns axis * angle (angle in [0, pi]).
Vec3 matrix_to_axis_angle(const Mat3& R);

/// Random pose near `base`: rotation perturbed uniformly in axis-angle up to
/// max_rot_deg, translation components shifted by U(-f, f) * base.t.z.
Pose perturb_pose(const Pose& base, double max_rot_deg, double max_trans_frac,
                  std::mt19937_64& rng);

} // namespace poseflow
