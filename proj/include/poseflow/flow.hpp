#pragma once

#include <optional>
#include <vector>

#include "poseflow/geometry.hpp"
#include "poseflow/image.hpp"
#include "poseflow/raster.hpp"

namespace poseflow {

// Dense displacement field in pixels, f(x) = x_target - x_source at pixel
// centers. valid marks pixels whose displacement is defined.
struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<double> u;
    std::vector<double> v;
    Mask valid;

    FlowField() = default;
    FlowField(int w, int h)
        : width(w), height(h), u(static_cast<std::size_t>(w) * h, 0.0),
          v(static_cast<std::size_t>(w) * h, 0.0), valid(w, h, 0) {}

    std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
    bool same_shape(const FlowField& o) const { return width == o.width && height == o.height; }
};

/// Pose-guided flow: for every source mask pixel, the displacement of its
/// visible model point when re-projected under tgt_pose. Valid exactly on the
/// source mask minus points that fall behind the camera under tgt_pose.
FlowField flow_from_poses(const RenderMaps& src, const Pose& src_pose, const Pose& tgt_pose,
                          const CameraIntrinsics& K);

/// Bilinear sample of img at x + f(x). Samples that leave the image or start
/// from invalid flow pixels are marked invalid and set to 0.
std::pair<ImageBuffer, Mask> backward_warp(const ImageBuffer& img, const FlowField& flow);

/// Bilinear splatting of valid source pixels to x + f(x); accumulated values
/// are weight-normalized, pixels with accumulated weight <= 1e-6 become 0.
ImageBuffer forward_warp(const ImageBuffer& img, const FlowField& flow);

// Raw splat accumulation behind forward_warp: per-pixel value and weight sums
// before normalization. The accumulation conserves mass exactly (each source
// pixel deposits at most its own value, all of it when the footprint stays
// inside the frame); normalization redistributes it.
struct SplatAccumulator {
    ImageBuffer sums;
    Raster<double> weights;
};
SplatAccumulator forward_warp_accumulate(const ImageBuffer& img, const FlowField& flow);

/// Bilinear flow lookup at a continuous pixel-center position, renormalizing
/// over the valid neighbors. Empty when no valid neighbor carries weight.
std::optional<Vec2> sample_flow(const FlowField& flow, double px, double py);

enum class ConsistencyRule {
    AnyOther,  // keep a pixel if at least one other view agrees
    Majority,  // keep a pixel if more than half of the other views agree
};

/// Cross-view geometric consistency filter for pseudo-labels. cross_view[i][j]
/// must hold the analytic flow from view i to view j (diagonal unused). A
/// pixel u of view i agrees with view j when routing u through j reaches the
/// same target within eps_px. Throws InsufficientViews for fewer than 2 views.
std::vector<Mask> consistency_filter(const std::vector<FlowField>& flows,
                                     const std::vector<std::vector<FlowField>>& cross_view,
                                     double eps_px,
                                     ConsistencyRule rule = ConsistencyRule::AnyOther);

} // namespace poseflow
