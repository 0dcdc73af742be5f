#pragma once

#include <vector>

#include "poseflow/image.hpp"

namespace poseflow {

// Dense feature grid at a reduced resolution; feature pixel (x,y) describes
// the image block [x*stride, (x+1)*stride) x [y*stride, (y+1)*stride).
struct FeatureMap {
    int width = 0;
    int height = 0;
    int channels = 0;
    int stride = 1;
    std::vector<double> data; // planar, [(c*H + y)*W + x]

    double& at(int c, int x, int y) {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    double at(int c, int x, int y) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
};

/// Fixed deterministic filter bank at stride 4: block-averaged grayscale, two
/// gradient channels, and three oriented difference-of-box channels.
FeatureMap extract_features(const ImageBuffer& img);

/// Downsample a pixel mask to the feature grid (center-pixel rule).
Mask downsample_mask(const Mask& m, int stride);

// Forward declaration; the warp consumes a pixel-resolution flow field.
struct FlowField;

/// Backward-warp a feature map by a pixel-resolution flow: the flow is
/// sampled at each cell's image-space center and divided by the stride. The
/// mask marks cells whose sample stayed inside the grid.
std::pair<FeatureMap, Mask> backward_warp_features(const FeatureMap& F, const FlowField& flow);

} // namespace poseflow
