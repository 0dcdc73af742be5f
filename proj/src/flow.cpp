#include "poseflow/flow.hpp"

#include <cmath>

#include <omp.h>

namespace poseflow {

FlowField flow_from_poses(const RenderMaps& src, const Pose& /*src_pose*/, const Pose& tgt_pose,
                          const CameraIntrinsics& K) {
    FlowField f(src.width, src.height);
    #pragma omp parallel for schedule(static)
    for (int y = 0; y < src.height; ++y) {
        for (int x = 0; x < src.width; ++x) {
            if (!src.mask.at(x, y)) continue;
            Vec2 uv;
            double depth;
            if (!project_point(src.objcoord.at(x, y), tgt_pose, K, uv, depth))
                continue; // behind the camera under the target pose
            const std::size_t i = f.idx(x, y);
            f.u[i] = uv.x() - (x + 0.5);
            f.v[i] = uv.y() - (y + 0.5);
            f.valid.data[i] = 1;
        }
    }
    return f;
}

namespace {

// Bilinear fetch in pixel-center space; px,py must satisfy the bounds check
// gx,gy in [0, size-1] done by the caller.
inline double fetch_bilinear(const ImageBuffer& img, int c, double gx, double gy) {
    const int x0 = std::min(static_cast<int>(gx), img.width >= 2 ? img.width - 2 : 0);
    const int y0 = std::min(static_cast<int>(gy), img.height >= 2 ? img.height - 2 : 0);
    const double fx = gx - x0;
    const double fy = gy - y0;
    const int x1 = std::min(x0 + 1, img.width - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    return (1 - fx) * (1 - fy) * img.at(c, x0, y0) + fx * (1 - fy) * img.at(c, x1, y0) +
           (1 - fx) * fy * img.at(c, x0, y1) + fx * fy * img.at(c, x1, y1);
}

} // namespace

std::pair<ImageBuffer, Mask> backward_warp(const ImageBuffer& img, const FlowField& flow) {
    if (img.width != flow.width || img.height != flow.height)
        throw DimensionMismatch("backward_warp: image and flow shapes differ");
    ImageBuffer out(img.width, img.height, img.channels, 0.0);
    Mask valid(img.width, img.height, 0);

    #pragma omp parallel for schedule(static)
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const std::size_t i = flow.idx(x, y);
            if (!flow.valid.data[i]) continue;
            const double gx = x + flow.u[i]; // (x+0.5) + u - 0.5
            const double gy = y + flow.v[i];
            if (gx < 0.0 || gy < 0.0 || gx > img.width - 1 || gy > img.height - 1) continue;
            for (int c = 0; c < img.channels; ++c) out.at(c, x, y) = fetch_bilinear(img, c, gx, gy);
            valid.at(x, y) = 1;
        }
    }
    return {std::move(out), std::move(valid)};
}

SplatAccumulator forward_warp_accumulate(const ImageBuffer& img, const FlowField& flow) {
    if (img.width != flow.width || img.height != flow.height)
        throw DimensionMismatch("forward_warp: image and flow shapes differ");
    const int W = img.width, H = img.height, C = img.channels;
    const std::size_t plane = img.plane_size();

    // Scatter with per-thread accumulators, combined in thread order so the
    // result does not depend on the scheduling of the splat loop.
    const int max_threads = omp_get_max_threads();
    std::vector<std::vector<double>> acc(max_threads);
    std::vector<std::vector<double>> wacc(max_threads);

    #pragma omp parallel num_threads(max_threads)
    {
        const int tid = omp_get_thread_num();
        acc[tid].assign(plane * C, 0.0);
        wacc[tid].assign(plane, 0.0);
        #pragma omp for schedule(static)
        for (int y = 0; y < H; ++y) {
            for (int x = 0; x < W; ++x) {
                const std::size_t i = flow.idx(x, y);
                if (!flow.valid.data[i]) continue;
                const double gx = x + flow.u[i];
                const double gy = y + flow.v[i];
                const int x0 = static_cast<int>(std::floor(gx));
                const int y0 = static_cast<int>(std::floor(gy));
                const double fx = gx - x0;
                const double fy = gy - y0;
                const double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
                const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
                const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
                for (int k = 0; k < 4; ++k) {
                    if (xs[k] < 0 || ys[k] < 0 || xs[k] >= W || ys[k] >= H || w[k] == 0.0)
                        continue;
                    const std::size_t j = static_cast<std::size_t>(ys[k]) * W + xs[k];
                    wacc[tid][j] += w[k];
                    for (int c = 0; c < C; ++c)
                        acc[tid][c * plane + j] += w[k] * img.data[c * plane + i];
                }
            }
        }
    }

    SplatAccumulator out;
    out.sums = ImageBuffer(W, H, C, 0.0);
    out.weights = Raster<double>(W, H, 0.0);
    for (int t = 0; t < max_threads; ++t) {
        if (wacc[t].empty()) continue;
        for (std::size_t j = 0; j < plane; ++j) out.weights.data[j] += wacc[t][j];
        for (std::size_t j = 0; j < plane * C; ++j) out.sums.data[j] += acc[t][j];
    }
    return out;
}

ImageBuffer forward_warp(const ImageBuffer& img, const FlowField& flow) {
    SplatAccumulator acc = forward_warp_accumulate(img, flow);
    const std::size_t plane = img.plane_size();
    ImageBuffer out(img.width, img.height, img.channels, 0.0);
    for (std::size_t j = 0; j < plane; ++j) {
        if (acc.weights.data[j] > 1e-6)
            for (int c = 0; c < img.channels; ++c)
                out.data[c * plane + j] = acc.sums.data[c * plane + j] / acc.weights.data[j];
    }
    return out;
}

std::optional<Vec2> sample_flow(const FlowField& flow, double px, double py) {
    const double gx = px - 0.5;
    const double gy = py - 0.5;
    if (gx < 0.0 || gy < 0.0 || gx > flow.width - 1 || gy > flow.height - 1) return std::nullopt;
    const int x0 = std::min(static_cast<int>(gx), flow.width >= 2 ? flow.width - 2 : 0);
    const int y0 = std::min(static_cast<int>(gy), flow.height >= 2 ? flow.height - 2 : 0);
    const double fx = gx - x0;
    const double fy = gy - y0;
    const int x1 = std::min(x0 + 1, flow.width - 1);
    const int y1 = std::min(y0 + 1, flow.height - 1);

    const int xs[4] = {x0, x1, x0, x1};
    const int ys[4] = {y0, y0, y1, y1};
    const double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
    double wsum = 0.0, u = 0.0, v = 0.0;
    for (int k = 0; k < 4; ++k) {
        const std::size_t i = flow.idx(xs[k], ys[k]);
        if (!flow.valid.data[i]) continue;
        wsum += w[k];
        u += w[k] * flow.u[i];
        v += w[k] * flow.v[i];
    }
    if (wsum <= 1e-6) return std::nullopt;
    return Vec2(u / wsum, v / wsum);
}

std::vector<Mask> consistency_filter(const std::vector<FlowField>& flows,
                                     const std::vector<std::vector<FlowField>>& cross_view,
                                     double eps_px, ConsistencyRule rule) {
    const std::size_t n = flows.size();
    if (n < 2) throw InsufficientViews("consistency_filter: need at least 2 views");
    if (cross_view.size() != n)
        throw DimensionMismatch("consistency_filter: cross_view must be n x n");
    for (const auto& row : cross_view)
        if (row.size() != n) throw DimensionMismatch("consistency_filter: cross_view must be n x n");
    for (std::size_t i = 1; i < n; ++i)
        if (!flows[i].same_shape(flows[0]))
            throw DimensionMismatch("consistency_filter: flow shapes differ");

    const double eps2 = eps_px * eps_px;
    std::vector<Mask> kept(n);
    for (std::size_t i = 0; i < n; ++i) {
        kept[i] = Mask(flows[i].width, flows[i].height, 0);
        const FlowField& fi = flows[i];

        #pragma omp parallel for schedule(static)
        for (int y = 0; y < fi.height; ++y) {
            for (int x = 0; x < fi.width; ++x) {
                const std::size_t p = fi.idx(x, y);
                if (!fi.valid.data[p]) continue;
                const double tx = x + 0.5 + fi.u[p];
                const double ty = y + 0.5 + fi.v[p];

                int votes = 0, voters = 0;
                for (std::size_t j = 0; j < n; ++j) {
                    if (j == i) continue;
                    ++voters;
                    const auto c = sample_flow(cross_view[i][j], x + 0.5, y + 0.5);
                    if (!c) continue;
                    const double jx = x + 0.5 + c->x();
                    const double jy = y + 0.5 + c->y();
                    const auto fj = sample_flow(flows[j], jx, jy);
                    if (!fj) continue;
                    const double dx = jx + fj->x() - tx;
                    const double dy = jy + fj->y() - ty;
                    if (dx * dx + dy * dy <= eps2) ++votes;
                }
                const bool keep = rule == ConsistencyRule::AnyOther ? votes >= 1
                                                                    : votes * 2 > voters;
                if (keep) kept[i].at(x, y) = 1;
            }
        }
    }
    return kept;
}

} // namespace poseflow
