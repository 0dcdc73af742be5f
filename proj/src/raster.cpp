#include "poseflow/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace poseflow {

namespace {

struct ScreenTriangle {
    // Screen-space vertices (pixels) and camera depths, oriented so the
    // doubled signed area is positive (y grows downward).
    double x[3], y[3], z[3];
    Vec3 p[3];       // model-frame vertices after orientation fix
    Vec3 normal;     // model-frame unit normal
    int min_x, max_x, min_y, max_y;
};

// Tie rule for pixels exactly on an edge: with positive-area orientation in
// y-down coordinates, accept left edges (dy < 0) and top edges (dy == 0,
// dx > 0). A shared edge between consistently wound neighbors is then owned
// by exactly one triangle.
inline bool edge_accepts(double e, double dx, double dy) {
    if (e > 0.0) return true;
    if (e < 0.0) return false;
    return dy < 0.0 || (dy == 0.0 && dx > 0.0);
}

bool project_triangle(const TriangleMesh& mesh, std::size_t tri_idx, const Pose& pose,
                      const CameraIntrinsics& K, int width, int height, ScreenTriangle& out) {
    const auto& tri = mesh.triangles[tri_idx];
    Vec3 model[3];
    double sx[3], sy[3], sz[3];
    for (int k = 0; k < 3; ++k) {
        model[k] = mesh.vertices[tri[k]];
        const Vec3 pc = pose.R * model[k] + pose.t;
        if (!(pc.z() > 1e-9)) return false; // no near-plane clipping, drop whole triangle
        sx[k] = K.fx * pc.x() / pc.z() + K.cx;
        sy[k] = K.fy * pc.y() / pc.z() + K.cy;
        sz[k] = pc.z();
    }

    double area2 = (sx[1] - sx[0]) * (sy[2] - sy[0]) - (sy[1] - sy[0]) * (sx[2] - sx[0]);
    int order[3] = {0, 1, 2};
    if (area2 == 0.0) return false;
    if (area2 < 0.0) std::swap(order[1], order[2]); // no culling, flip to positive area

    for (int k = 0; k < 3; ++k) {
        out.x[k] = sx[order[k]];
        out.y[k] = sy[order[k]];
        out.z[k] = sz[order[k]];
        out.p[k] = model[order[k]];
    }
    const Vec3 n = (model[1] - model[0]).cross(model[2] - model[0]);
    const double nlen = n.norm();
    if (nlen < 1e-18) return false;
    out.normal = n / nlen;

    const double fmin_x = std::min({out.x[0], out.x[1], out.x[2]});
    const double fmax_x = std::max({out.x[0], out.x[1], out.x[2]});
    const double fmin_y = std::min({out.y[0], out.y[1], out.y[2]});
    const double fmax_y = std::max({out.y[0], out.y[1], out.y[2]});
    // Pixel centers at (x+0.5, y+0.5): pixel x covers center interval only when
    // fmin <= x+0.5 <= fmax.
    out.min_x = std::max(0, static_cast<int>(std::floor(fmin_x - 0.5)));
    out.max_x = std::min(width - 1, static_cast<int>(std::ceil(fmax_x - 0.5)));
    out.min_y = std::max(0, static_cast<int>(std::floor(fmin_y - 0.5)));
    out.max_y = std::min(height - 1, static_cast<int>(std::ceil(fmax_y - 0.5)));
    return out.min_x <= out.max_x && out.min_y <= out.max_y;
}

// Coverage + perspective-correct depth at a pixel center. Returns depth or 0.
inline double coverage_depth(const ScreenTriangle& t, double px, double py, double& w0,
                             double& w1, double& w2) {
    const double e0 = (t.x[1] - t.x[0]) * (py - t.y[0]) - (t.y[1] - t.y[0]) * (px - t.x[0]);
    const double e1 = (t.x[2] - t.x[1]) * (py - t.y[1]) - (t.y[2] - t.y[1]) * (px - t.x[1]);
    const double e2 = (t.x[0] - t.x[2]) * (py - t.y[2]) - (t.y[0] - t.y[2]) * (px - t.x[2]);
    if (!edge_accepts(e0, t.x[1] - t.x[0], t.y[1] - t.y[0])) return 0.0;
    if (!edge_accepts(e1, t.x[2] - t.x[1], t.y[2] - t.y[1])) return 0.0;
    if (!edge_accepts(e2, t.x[0] - t.x[2], t.y[0] - t.y[2])) return 0.0;
    const double area2 = e0 + e1 + e2;
    if (area2 <= 0.0) return 0.0;
    // Barycentric in screen space; 1/z interpolates linearly there.
    const double l0 = e1 / area2, l1 = e2 / area2, l2 = e0 / area2;
    const double inv_z = l0 / t.z[0] + l1 / t.z[1] + l2 / t.z[2];
    if (inv_z <= 0.0) return 0.0;
    const double depth = 1.0 / inv_z;
    w0 = l0 / t.z[0] * depth;
    w1 = l1 / t.z[1] * depth;
    w2 = l2 / t.z[2] * depth;
    return depth;
}

} // namespace

RenderMaps rasterize(const TriangleMesh& mesh, const Pose& pose, const CameraIntrinsics& K,
                     int width, int height) {
    if (mesh.triangles.empty()) throw EmptyRender("rasterize: empty mesh");

    RenderMaps maps;
    maps.width = width;
    maps.height = height;
    maps.depth = Raster<double>(width, height, 0.0);
    maps.mask = Mask(width, height, 0);
    maps.objcoord = Raster<Vec3>(width, height, Vec3::Zero());
    maps.normal = Raster<Vec3>(width, height, Vec3::Zero());

    std::vector<ScreenTriangle> tris;
    tris.reserve(mesh.triangles.size());
    for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
        ScreenTriangle st;
        if (project_triangle(mesh, i, pose, K, width, height, st)) tris.push_back(st);
    }
    if (tris.empty()) throw EmptyRender("rasterize: no triangle projects into the viewport");

    // Bucket triangle indices by row, in index order, so each row can scan its
    // candidates independently and ties resolve identically to a serial pass.
    std::vector<std::vector<std::uint32_t>> rows(height);
    for (std::uint32_t i = 0; i < tris.size(); ++i)
        for (int y = tris[i].min_y; y <= tris[i].max_y; ++y) rows[y].push_back(i);

    bool any = false;
    #pragma omp parallel for schedule(static) reduction(|| : any)
    for (int y = 0; y < height; ++y) {
        const double py = y + 0.5;
        for (const std::uint32_t ti : rows[y]) {
            const ScreenTriangle& t = tris[ti];
            for (int x = t.min_x; x <= t.max_x; ++x) {
                double w0, w1, w2;
                const double depth = coverage_depth(t, x + 0.5, py, w0, w1, w2);
                if (depth <= 0.0) continue;
                double& zb = maps.depth.at(x, y);
                if (zb == 0.0 || depth < zb) {
                    zb = depth;
                    maps.mask.at(x, y) = 1;
                    maps.objcoord.at(x, y) = w0 * t.p[0] + w1 * t.p[1] + w2 * t.p[2];
                    maps.normal.at(x, y) = t.normal;
                    any = true;
                }
            }
        }
    }
    if (!any) throw EmptyRender("rasterize: no pixel covered");
    return maps;
}

namespace {

// Low-frequency model-frame albedo so distinct surface points get distinct,
// smoothly varying colors (bilinear-friendly for warping tests). Kept
// deliberately soft: warp-transport residuals at silhouettes and occlusion
// bands scale with absolute brightness and face-to-face contrast.
inline double albedo_channel(const Vec3& p, const Vec3& k, double phase) {
    return 0.30 + 0.25 * std::sin(k.dot(p) + phase);
}

const Vec3 kAlbedoFreq[3] = {Vec3(9.2, 3.1, 5.3), Vec3(2.7, 8.8, 4.1), Vec3(4.9, 5.7, 9.6)};
const double kAlbedoPhase[3] = {0.3, 2.1, 4.2};

} // namespace

ImageBuffer shaded_render(const RenderMaps& maps, const ShadingConfig& shading) {
    ImageBuffer img(maps.width, maps.height, 3, 0.0);
    const Vec3 light = shading.light_dir.normalized();
    const double ambient = shading.ambient;

    #pragma omp parallel for schedule(static)
    for (int y = 0; y < maps.height; ++y) {
        for (int x = 0; x < maps.width; ++x) {
            if (!maps.mask.at(x, y)) continue;
            const Vec3& p = maps.objcoord.at(x, y);
            const Vec3& n = maps.normal.at(x, y);
            // Two-sided Lambert: winding is not trusted, use |n . l|.
            const double diffuse = std::abs(n.dot(light));
            const double shade = ambient + (1.0 - ambient) * diffuse;
            for (int c = 0; c < 3; ++c)
                img.at(c, x, y) = std::clamp(
                    albedo_channel(p, kAlbedoFreq[c], kAlbedoPhase[c]) * shade, 0.0, 1.0);
        }
    }
    return img;
}

std::vector<std::pair<Vec2, Vec3>> visible_correspondences(const RenderMaps& maps) {
    std::vector<std::pair<Vec2, Vec3>> out;
    out.reserve(mask_area(maps.mask));
    for (int y = 0; y < maps.height; ++y)
        for (int x = 0; x < maps.width; ++x)
            if (maps.mask.at(x, y))
                out.emplace_back(Vec2(x + 0.5, y + 0.5), maps.objcoord.at(x, y));
    return out;
}

} // namespace poseflow
