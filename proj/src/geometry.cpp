#include "poseflow/geometry.hpp"

#include <cmath>

namespace poseflow {

Mat3 rot6d_to_matrix(const Rot6d& r) {
    Vec3 a1(r[0], r[1], r[2]);
    Vec3 a2(r[3], r[4], r[5]);
    const double n1 = a1.norm();
    if (!(n1 > 1e-9)) throw DegenerateInput("rot6d_to_matrix: first column norm too small");
    Vec3 b1 = a1 / n1;
    Vec3 a2_perp = a2 - b1.dot(a2) * b1;
    const double n2 = a2_perp.norm();
    if (!(n2 > 1e-9)) throw DegenerateInput("rot6d_to_matrix: columns are near parallel");
    Vec3 b2 = a2_perp / n2;
    Vec3 b3 = b1.cross(b2);
    Mat3 R;
    R.col(0) = b1;
    R.col(1) = b2;
    R.col(2) = b3;
    return R;
}

Rot6d matrix_to_rot6d(const Mat3& R) {
    Rot6d r;
    r << R(0, 0), R(1, 0), R(2, 0), R(0, 1), R(1, 1), R(2, 1);
    return r;
}

bool is_rotation_matrix(const Mat3& R, double tol) {
    const Mat3 gram = R.transpose() * R - Mat3::Identity();
    if (gram.cwiseAbs().maxCoeff() >= tol) return false;
    return std::abs(R.determinant() - 1.0) < tol;
}

Pose apply_relative_pose(const Pose& prev, const RelativePose& delta, const CameraIntrinsics& K) {
    Pose out;
    out.R = rot6d_to_matrix(delta.rot6) * prev.R;
    const double tz_prev = prev.t.z();
    const double tz_new = tz_prev / std::exp(delta.v.z());
    if (!(tz_new > 0.0) || !std::isfinite(tz_new))
        throw DegenerateInput("apply_relative_pose: updated depth is not positive");
    out.t.z() = tz_new;
    out.t.x() = (delta.v.x() / K.fx + prev.t.x() / tz_prev) * tz_new;
    out.t.y() = (delta.v.y() / K.fy + prev.t.y() / tz_prev) * tz_new;
    return out;
}

RelativePose relative_pose_between(const Pose& prev, const Pose& target,
                                   const CameraIntrinsics& K) {
    RelativePose d;
    d.rot6 = matrix_to_rot6d(target.R * prev.R.transpose());
    d.v.z() = std::log(prev.t.z() / target.t.z());
    d.v.x() = (target.t.x() / target.t.z() - prev.t.x() / prev.t.z()) * K.fx;
    d.v.y() = (target.t.y() / target.t.z() - prev.t.y() / prev.t.z()) * K.fy;
    return d;
}

RelativePose scale_relative_pose(const RelativePose& delta, double factor) {
    RelativePose out;
    const Vec3 aa = matrix_to_axis_angle(rot6d_to_matrix(delta.rot6));
    const double angle = aa.norm();
    Mat3 R = angle > 0.0 ? axis_angle_to_matrix(aa / angle, factor * angle) : Mat3::Identity();
    out.rot6 = matrix_to_rot6d(R);
    out.v = factor * delta.v;
    return out;
}

std::vector<Projection> project_points(std::span<const Vec3> points, const Pose& pose,
                                       const CameraIntrinsics& K) {
    std::vector<Projection> out(points.size());
    std::vector<std::size_t> behind;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Vec3 pc = pose.R * points[i] + pose.t;
        if (!(pc.z() > 1e-9)) {
            behind.push_back(i);
            continue;
        }
        out[i].uv = Vec2(K.fx * pc.x() / pc.z() + K.cx, K.fy * pc.y() / pc.z() + K.cy);
        out[i].depth = pc.z();
    }
    if (!behind.empty())
        throw BehindCamera("project_points: " + std::to_string(behind.size()) +
                               " point(s) behind the camera",
                           std::move(behind));
    return out;
}

bool project_point(const Vec3& p, const Pose& pose, const CameraIntrinsics& K, Vec2& uv,
                   double& depth) {
    const Vec3 pc = pose.R * p + pose.t;
    if (!(pc.z() > 1e-9)) return false;
    uv = Vec2(K.fx * pc.x() / pc.z() + K.cx, K.fy * pc.y() / pc.z() + K.cy);
    depth = pc.z();
    return true;
}

double rotation_error_deg(const Mat3& Ra, const Mat3& Rb) {
    const double tr = (Ra * Rb.transpose()).trace();
    const double c = std::clamp((tr - 1.0) / 2.0, -1.0, 1.0);
    return std::acos(c) * 180.0 / M_PI;
}

double translation_error(const Vec3& ta, const Vec3& tb) { return (ta - tb).norm(); }

Mat3 axis_angle_to_matrix(const Vec3& axis, double angle_rad) {
    return Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
}

Vec3 matrix_to_axis_angle(const Mat3& R) {
    Eigen::AngleAxisd aa(R);
    return aa.axis() * aa.angle();
}

Pose perturb_pose(const Pose& base, double max_rot_deg, double max_trans_frac,
                  std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    // Uniform axis via rejection sampling from the cube.
    Vec3 axis;
    do {
        axis = Vec3(unit(rng), unit(rng), unit(rng));
    } while (axis.squaredNorm() < 1e-6 || axis.squaredNorm() > 1.0);
    const double angle = u01(rng) * max_rot_deg * M_PI / 180.0;

    Pose out;
    out.R = axis_angle_to_matrix(axis, angle) * base.R;
    const double scale = max_trans_frac * base.t.z();
    out.t = base.t + Vec3(unit(rng) * scale, unit(rng) * scale, unit(rng) * scale);
    return out;
}

} // namespace poseflow
