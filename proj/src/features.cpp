#include "poseflow/features.hpp"

#include "poseflow/flow.hpp"

namespace poseflow {

namespace {

constexpr int kStride = 4;

inline double at_clamped(const Raster<double>& g, int x, int y) {
    x = std::clamp(x, 0, g.width - 1);
    y = std::clamp(y, 0, g.height - 1);
    return g.at(x, y);
}

} // namespace

FeatureMap extract_features(const ImageBuffer& img) {
    const Raster<double> gray = to_grayscale(img);
    const int fw = img.width / kStride;
    const int fh = img.height / kStride;

    // Block-averaged grayscale at the feature grid.
    Raster<double> pooled(fw, fh, 0.0);
    for (int y = 0; y < fh; ++y) {
        for (int x = 0; x < fw; ++x) {
            double s = 0.0;
            for (int dy = 0; dy < kStride; ++dy)
                for (int dx = 0; dx < kStride; ++dx)
                    s += gray.at(x * kStride + dx, y * kStride + dy);
            pooled.at(x, y) = s / (kStride * kStride);
        }
    }

    FeatureMap fm;
    fm.width = fw;
    fm.height = fh;
    fm.channels = 6;
    fm.stride = kStride;
    fm.data.assign(static_cast<std::size_t>(fw) * fh * 6, 0.0);

    #pragma omp parallel for schedule(static)
    for (int y = 0; y < fh; ++y) {
        for (int x = 0; x < fw; ++x) {
            const double gx = 0.5 * (at_clamped(pooled, x + 1, y) - at_clamped(pooled, x - 1, y));
            const double gy = 0.5 * (at_clamped(pooled, x, y + 1) - at_clamped(pooled, x, y - 1));
            // Oriented difference-of-box responses at 45, 135 and 0 degrees.
            const double d45 = at_clamped(pooled, x + 1, y + 1) - at_clamped(pooled, x - 1, y - 1);
            const double d135 = at_clamped(pooled, x + 1, y - 1) - at_clamped(pooled, x - 1, y + 1);
            double right = 0.0, left = 0.0;
            for (int dy = -1; dy <= 1; ++dy) {
                right += at_clamped(pooled, x + 2, y + dy);
                left += at_clamped(pooled, x - 2, y + dy);
            }
            const double d0 = (right - left) / 3.0;

            fm.at(0, x, y) = pooled.at(x, y);
            fm.at(1, x, y) = gx;
            fm.at(2, x, y) = gy;
            fm.at(3, x, y) = d45;
            fm.at(4, x, y) = d135;
            fm.at(5, x, y) = d0;
        }
    }
    return fm;
}

Mask downsample_mask(const Mask& m, int stride) {
    Mask out(m.width / stride, m.height / stride, 0);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            out.at(x, y) = m.at(x * stride + stride / 2, y * stride + stride / 2);
    return out;
}

std::pair<FeatureMap, Mask> backward_warp_features(const FeatureMap& F, const FlowField& flow) {
    FeatureMap out = F;
    std::fill(out.data.begin(), out.data.end(), 0.0);
    Mask valid(F.width, F.height, 0);

    for (int y = 0; y < F.height; ++y) {
        for (int x = 0; x < F.width; ++x) {
            const auto f = sample_flow(flow, (x + 0.5) * F.stride, (y + 0.5) * F.stride);
            if (!f) continue;
            const double gx = x + f->x() / F.stride;
            const double gy = y + f->y() / F.stride;
            if (gx < 0.0 || gy < 0.0 || gx > F.width - 1 || gy > F.height - 1) continue;
            const int x0 = std::min(static_cast<int>(gx), std::max(F.width - 2, 0));
            const int y0 = std::min(static_cast<int>(gy), std::max(F.height - 2, 0));
            const int x1 = std::min(x0 + 1, F.width - 1);
            const int y1 = std::min(y0 + 1, F.height - 1);
            const double fx = gx - x0, fy = gy - y0;
            for (int c = 0; c < F.channels; ++c)
                out.at(c, x, y) = (1 - fx) * (1 - fy) * F.at(c, x0, y0) +
                                  fx * (1 - fy) * F.at(c, x1, y0) +
                                  (1 - fx) * fy * F.at(c, x0, y1) + fx * fy * F.at(c, x1, y1);
            valid.at(x, y) = 1;
        }
    }
    return {std::move(out), std::move(valid)};
}

} // namespace poseflow
