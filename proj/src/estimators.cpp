#include "poseflow/selfsup.hpp"

#include <cmath>

namespace poseflow {

namespace {

std::vector<FlowField> analytic_flows(const ViewSet& views, const Pose& target,
                                      const CameraIntrinsics& K) {
    std::vector<FlowField> out;
    out.reserve(views.poses.size());
    for (std::size_t i = 0; i < views.poses.size(); ++i)
        out.push_back(flow_from_poses(views.maps[i], views.poses[i], target, K));
    return out;
}

} // namespace

std::vector<FlowField> AnalyticOracle::estimate_flow(const ImageBuffer&, const ViewSet& views,
                                                     const std::vector<FlowField>&, const Pose&,
                                                     const CameraIntrinsics& K) {
    return analytic_flows(views, gt_, K);
}

RelativePose AnalyticOracle::estimate_relative_pose(const std::vector<FlowField>&, const ViewSet&,
                                                    const Pose& current,
                                                    const CameraIntrinsics& K) {
    return relative_pose_between(current, gt_, K);
}

std::unique_ptr<Estimator> AnalyticOracle::clone() const {
    return std::make_unique<AnalyticOracle>(*this);
}

std::vector<FlowField> DampedOracle::estimate_flow(const ImageBuffer&, const ViewSet& views,
                                                   const std::vector<FlowField>&, const Pose&,
                                                   const CameraIntrinsics& K) {
    return analytic_flows(views, gt_, K);
}

RelativePose DampedOracle::estimate_relative_pose(const std::vector<FlowField>&, const ViewSet&,
                                                  const Pose& current, const CameraIntrinsics& K) {
    return scale_relative_pose(relative_pose_between(current, gt_, K), gamma_);
}

std::unique_ptr<Estimator> DampedOracle::clone() const {
    return std::make_unique<DampedOracle>(*this);
}

ToyEstimator::ToyEstimator(Pose gt, CameraIntrinsics K, std::vector<double> params)
    : gt_(gt), K_(K), params_(std::move(params)) {
    if (params_.size() != 6) throw LengthMismatch("ToyEstimator: expected 6 parameters");
}

std::vector<double> ToyEstimator::default_initial_params() {
    // [gain_f, bias_u, bias_v, w_u, w_v, w_z]; deliberately under-gained and
    // biased so self-training has something to fix.
    return {0.45, 1.2, -0.9, 0.5, 0.5, 0.5};
}

void ToyEstimator::set_parameters(const std::vector<double>& p) {
    if (p.size() != 6) throw LengthMismatch("ToyEstimator: expected 6 parameters");
    params_ = p;
}

std::unique_ptr<Estimator> ToyEstimator::clone() const {
    return std::make_unique<ToyEstimator>(*this);
}

std::vector<FlowField> ToyEstimator::estimate_flow(const ImageBuffer&, const ViewSet& views,
                                                   const std::vector<FlowField>& pose_guided,
                                                   const Pose&, const CameraIntrinsics& K) {
    const double gain_f = params_[0];
    const double bias_u = params_[1];
    const double bias_v = params_[2];

    std::vector<FlowField> oracle = analytic_flows(views, gt_, K);
    std::vector<FlowField> out = pose_guided;
    for (std::size_t i = 0; i < out.size(); ++i) {
        FlowField& f = out[i];
        const FlowField& g = pose_guided[i];
        const FlowField& o = oracle[i];
        for (std::size_t j = 0; j < f.u.size(); ++j) {
            if (!(g.valid.data[j] && o.valid.data[j])) {
                f.valid.data[j] = 0;
                continue;
            }
            f.u[j] = g.u[j] + gain_f * (o.u[j] - g.u[j]) + bias_u;
            f.v[j] = g.v[j] + gain_f * (o.v[j] - g.v[j]) + bias_v;
        }
    }
    return out;
}

RelativePose ToyEstimator::estimate_relative_pose(const std::vector<FlowField>& flows,
                                                  const ViewSet& views, const Pose& current,
                                                  const CameraIntrinsics& K) {
    const double w_u = params_[3];
    const double w_v = params_[4];
    const double w_z = params_[5];

    // Pooled statistics of the flow residual beyond the current pose estimate:
    // mean offset (pixels) and mean radial expansion rate around the principal
    // point. These are the observables a linear pose head reads.
    double sum_u = 0.0, sum_v = 0.0, sum_rad = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < flows.size(); ++i) {
        const FlowField guided = flow_from_poses(views.maps[i], views.poses[i], current, K);
        const FlowField& f = flows[i];
        for (int y = 0; y < f.height; ++y) {
            for (int x = 0; x < f.width; ++x) {
                const std::size_t j = f.idx(x, y);
                if (!(f.valid.data[j] && guided.valid.data[j])) continue;
                const double ru = f.u[j] - guided.u[j];
                const double rv = f.v[j] - guided.v[j];
                sum_u += ru;
                sum_v += rv;
                // Radial component relative to the distance from the principal
                // point at the flow target; positive = expansion = approach.
                const double px = x + 0.5 + guided.u[j] - K.cx;
                const double py = y + 0.5 + guided.v[j] - K.cy;
                const double r2 = px * px + py * py;
                if (r2 > 1.0) sum_rad += (ru * px + rv * py) / r2;
                ++count;
            }
        }
    }
    RelativePose delta; // identity rotation: the toy head only moves translation
    if (count == 0) return delta;
    const double inv = 1.0 / static_cast<double>(count);
    delta.v.x() = w_u * sum_u * inv;
    delta.v.y() = w_v * sum_v * inv;
    delta.v.z() = w_z * sum_rad * inv;
    return delta;
}

} // namespace poseflow
