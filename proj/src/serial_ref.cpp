#include "poseflow/serial_ref.hpp"

#include <cmath>

namespace poseflow::ref {

namespace {

// Same coverage convention as the parallel rasterizer (positive-area
// orientation, left/top edges own ties), written as a per-pixel brute force.
struct RefTri {
    double x[3], y[3], z[3];
    Vec3 p[3];
    Vec3 n;
};

inline bool edge_ok(double e, double dx, double dy) {
    if (e > 0.0) return true;
    if (e < 0.0) return false;
    return dy < 0.0 || (dy == 0.0 && dx > 0.0);
}

} // namespace

RenderMaps rasterize(const TriangleMesh& mesh, const Pose& pose, const CameraIntrinsics& K,
                     int width, int height) {
    if (mesh.triangles.empty()) throw EmptyRender("ref::rasterize: empty mesh");

    std::vector<RefTri> tris;
    for (const auto& tri : mesh.triangles) {
        RefTri t;
        bool ok = true;
        double sx[3], sy[3], sz[3];
        Vec3 model[3];
        for (int k = 0; k < 3; ++k) {
            model[k] = mesh.vertices[tri[k]];
            const Vec3 pc = pose.R * model[k] + pose.t;
            if (!(pc.z() > 1e-9)) {
                ok = false;
                break;
            }
            sx[k] = K.fx * pc.x() / pc.z() + K.cx;
            sy[k] = K.fy * pc.y() / pc.z() + K.cy;
            sz[k] = pc.z();
        }
        if (!ok) continue;
        double area2 = (sx[1] - sx[0]) * (sy[2] - sy[0]) - (sy[1] - sy[0]) * (sx[2] - sx[0]);
        if (area2 == 0.0) continue;
        int o[3] = {0, 1, 2};
        if (area2 < 0.0) std::swap(o[1], o[2]);
        for (int k = 0; k < 3; ++k) {
            t.x[k] = sx[o[k]];
            t.y[k] = sy[o[k]];
            t.z[k] = sz[o[k]];
            t.p[k] = model[o[k]];
        }
        const Vec3 nr = (model[1] - model[0]).cross(model[2] - model[0]);
        if (nr.norm() < 1e-18) continue;
        t.n = nr.normalized();
        tris.push_back(t);
    }
    if (tris.empty()) throw EmptyRender("ref::rasterize: no triangle projects into the viewport");

    RenderMaps maps;
    maps.width = width;
    maps.height = height;
    maps.depth = Raster<double>(width, height, 0.0);
    maps.mask = Mask(width, height, 0);
    maps.objcoord = Raster<Vec3>(width, height, Vec3::Zero());
    maps.normal = Raster<Vec3>(width, height, Vec3::Zero());

    bool any = false;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            for (const RefTri& t : tris) {
                const double e0 =
                    (t.x[1] - t.x[0]) * (py - t.y[0]) - (t.y[1] - t.y[0]) * (px - t.x[0]);
                const double e1 =
                    (t.x[2] - t.x[1]) * (py - t.y[1]) - (t.y[2] - t.y[1]) * (px - t.x[1]);
                const double e2 =
                    (t.x[0] - t.x[2]) * (py - t.y[2]) - (t.y[0] - t.y[2]) * (px - t.x[2]);
                if (!edge_ok(e0, t.x[1] - t.x[0], t.y[1] - t.y[0])) continue;
                if (!edge_ok(e1, t.x[2] - t.x[1], t.y[2] - t.y[1])) continue;
                if (!edge_ok(e2, t.x[0] - t.x[2], t.y[0] - t.y[2])) continue;
                const double area2 = e0 + e1 + e2;
                if (area2 <= 0.0) continue;
                const double l0 = e1 / area2, l1 = e2 / area2, l2 = e0 / area2;
                const double inv_z = l0 / t.z[0] + l1 / t.z[1] + l2 / t.z[2];
                if (inv_z <= 0.0) continue;
                const double depth = 1.0 / inv_z;
                double& zb = maps.depth.at(x, y);
                if (zb == 0.0 || depth < zb) {
                    zb = depth;
                    maps.mask.at(x, y) = 1;
                    const double w0 = l0 / t.z[0] * depth;
                    const double w1 = l1 / t.z[1] * depth;
                    const double w2 = l2 / t.z[2] * depth;
                    maps.objcoord.at(x, y) = w0 * t.p[0] + w1 * t.p[1] + w2 * t.p[2];
                    maps.normal.at(x, y) = t.n;
                    any = true;
                }
            }
        }
    }
    if (!any) throw EmptyRender("ref::rasterize: no pixel covered");
    return maps;
}

std::vector<std::complex<double>> dft_2d(const std::vector<std::complex<double>>& in, int width,
                                         int height, bool inverse) {
    const double sign = inverse ? 2.0 : -2.0;
    std::vector<std::complex<double>> out(in.size());
    for (int v = 0; v < height; ++v) {
        for (int u = 0; u < width; ++u) {
            std::complex<double> acc(0.0, 0.0);
            for (int y = 0; y < height; ++y) {
                for (int x = 0; x < width; ++x) {
                    const double ang = sign * M_PI *
                                       (static_cast<double>(u) * x / width +
                                        static_cast<double>(v) * y / height);
                    acc += in[static_cast<std::size_t>(y) * width + x] *
                           std::complex<double>(std::cos(ang), std::sin(ang));
                }
            }
            if (inverse) acc /= static_cast<double>(width) * height;
            out[static_cast<std::size_t>(v) * width + u] = acc;
        }
    }
    return out;
}

std::pair<ImageBuffer, Mask> backward_warp(const ImageBuffer& img, const FlowField& flow) {
    ImageBuffer out(img.width, img.height, img.channels, 0.0);
    Mask valid(img.width, img.height, 0);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const std::size_t i = flow.idx(x, y);
            if (!flow.valid.data[i]) continue;
            const double gx = x + flow.u[i];
            const double gy = y + flow.v[i];
            if (gx < 0.0 || gy < 0.0 || gx > img.width - 1 || gy > img.height - 1) continue;
            const int x0 = std::min(static_cast<int>(gx), img.width >= 2 ? img.width - 2 : 0);
            const int y0 = std::min(static_cast<int>(gy), img.height >= 2 ? img.height - 2 : 0);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const int y1 = std::min(y0 + 1, img.height - 1);
            const double fx = gx - x0, fy = gy - y0;
            for (int c = 0; c < img.channels; ++c)
                out.at(c, x, y) = (1 - fx) * (1 - fy) * img.at(c, x0, y0) +
                                  fx * (1 - fy) * img.at(c, x1, y0) +
                                  (1 - fx) * fy * img.at(c, x0, y1) +
                                  fx * fy * img.at(c, x1, y1);
            valid.at(x, y) = 1;
        }
    }
    return {std::move(out), std::move(valid)};
}

ImageBuffer forward_warp(const ImageBuffer& img, const FlowField& flow) {
    const int W = img.width, H = img.height, C = img.channels;
    const std::size_t plane = img.plane_size();
    std::vector<double> acc(plane * C, 0.0), wacc(plane, 0.0);
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const std::size_t i = flow.idx(x, y);
            if (!flow.valid.data[i]) continue;
            const double gx = x + flow.u[i];
            const double gy = y + flow.v[i];
            const int x0 = static_cast<int>(std::floor(gx));
            const int y0 = static_cast<int>(std::floor(gy));
            const double fx = gx - x0, fy = gy - y0;
            const double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
            const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
            const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
            for (int k = 0; k < 4; ++k) {
                if (xs[k] < 0 || ys[k] < 0 || xs[k] >= W || ys[k] >= H || w[k] == 0.0) continue;
                const std::size_t j = static_cast<std::size_t>(ys[k]) * W + xs[k];
                wacc[j] += w[k];
                for (int c = 0; c < C; ++c) acc[c * plane + j] += w[k] * img.data[c * plane + i];
            }
        }
    }
    ImageBuffer out(W, H, C, 0.0);
    for (std::size_t j = 0; j < plane; ++j)
        if (wacc[j] > 1e-6)
            for (int c = 0; c < C; ++c) out.data[c * plane + j] = acc[c * plane + j] / wacc[j];
    return out;
}

namespace {

inline int sgn(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

} // namespace

double census_loss(const ImageBuffer& a, const ImageBuffer& b, const Mask& mask) {
    const Raster<double> ga = to_grayscale(a);
    const Raster<double> gb = to_grayscale(b);
    const int R = 3;
    double total = 0.0;
    std::size_t count = 0;
    const double floor = std::pow(1e-3, 0.4);
    for (int y = R; y < a.height - R; ++y) {
        for (int x = R; x < a.width - R; ++x) {
            if (!mask.at(x, y)) continue;
            double d = 0.0;
            for (int dy = -R; dy <= R; ++dy) {
                for (int dx = -R; dx <= R; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const double diff = sgn(ga.at(x + dx, y + dy) - ga.at(x, y)) -
                                        sgn(gb.at(x + dx, y + dy) - gb.at(x, y));
                    d += diff * diff / (0.1 + diff * diff);
                }
            }
            total += std::pow(d * d + 1e-3, 0.4) - floor;
            ++count;
        }
    }
    return count > 0 ? total / static_cast<double>(count) : 0.0;
}

double add_error(const Pose& P_pred, const Pose& P_gt, std::span<const Vec3> points) {
    double total = 0.0;
    for (const Vec3& p : points)
        total += ((P_pred.R * p + P_pred.t) - (P_gt.R * p + P_gt.t)).norm();
    return total / static_cast<double>(points.size());
}

double adds_error(const Pose& P_pred, const Pose& P_gt, std::span<const Vec3> points) {
    double total = 0.0;
    for (const Vec3& p : points) {
        const Vec3 a = P_pred.R * p + P_pred.t;
        double best = std::numeric_limits<double>::max();
        for (const Vec3& q : points) {
            const Vec3 b = P_gt.R * q + P_gt.t;
            best = std::min(best, (a - b).norm());
        }
        total += best;
    }
    return total / static_cast<double>(points.size());
}

} // namespace poseflow::ref
