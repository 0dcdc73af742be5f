#pragma once

#include <span>
#include <vector>

#include "poseflow/features.hpp"
#include "poseflow/flow.hpp"
#include "poseflow/geometry.hpp"
#include "poseflow/image.hpp"

namespace poseflow {

struct LossWeights {
    double gamma1 = 0.1;  // flow term inside the image-level loss
    double gamma2 = 0.1;  // photometric term inside the image-level loss
    double gamma3 = 10.0; // pose term in the total
    double gamma4 = 10.0; // image-level term in the total
};

// Scalar loss plus the number of pixels it averaged over; count == 0 flags an
// empty mask (value is 0 in that case).
struct MaskedLoss {
    double value = 0.0;
    std::size_t count = 0;
};

/// Census loss: 7x7 ternary census descriptors on grayscale, soft Hamming
/// distance with per-pair saturation, generalized Charbonnier aggregation
/// shifted so identical inputs score exactly 0. Averaged over mask pixels
/// whose window lies fully inside the image.
MaskedLoss census_loss(const ImageBuffer& a, const ImageBuffer& b, const Mask& mask);

/// Sum over views of the census loss between I_r backward-warped by the
/// student flow and by the teacher flow, restricted to the render mask and
/// both warps' validity.
MaskedLoss photometric_loss(const ImageBuffer& I_r, const std::vector<FlowField>& f_stu,
                            const std::vector<FlowField>& f_tea, const std::vector<Mask>& masks);

/// Sum over views of the L1 distance between the render masks forward-warped
/// by the student and teacher flows, each view normalized by its mask area.
double warp_mask_loss(const std::vector<Mask>& masks_s, const std::vector<FlowField>& f_stu,
                      const std::vector<FlowField>& f_tea);

/// Average L1 endpoint error over kept pixels.
MaskedLoss flow_loss(const FlowField& f_stu, const FlowField& f_tea, const Mask& kept);

double image_level_loss(double flow, double photo, double warp_mask, const LossWeights& w);

/// Weighted average over masked feature cells of 1 - cosine(warped F_r, F_s).
/// The flow is sampled at feature-cell centers and divided by the stride.
/// weights may be empty (uniform) or a per-cell raster at feature resolution.
double feature_level_loss(const FeatureMap& F_r, const FeatureMap& F_s, const FlowField& f_stu,
                          const Mask& feature_mask, const Raster<double>& weights = {});

/// Mean distance between the two transformed point sets; the symmetric
/// variant matches each predicted point to its nearest pseudo point.
double point_matching_loss(const Pose& P_pred, const Pose& P_pseudo, std::span<const Vec3> points,
                           bool symmetric);

double total_selfsup_loss(double pose, double img_level, double feat_level, const LossWeights& w);

} // namespace poseflow
