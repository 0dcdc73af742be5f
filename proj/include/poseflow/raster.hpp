#pragma once

#include <vector>

#include "poseflow/geometry.hpp"
#include "poseflow/image.hpp"
#include "poseflow/mesh.hpp"

namespace poseflow {

// Per-pixel output of the rasterizer. Invariant: mask(u,v) = 1 iff
// depth(u,v) > 0 iff objcoord(u,v) holds the visible model-frame point.
// normal carries the model-frame geometric normal of the winning triangle.
struct RenderMaps {
    int width = 0;
    int height = 0;
    Raster<double> depth;   // meters, 0 = background
    Mask mask;
    Raster<Vec3> objcoord;  // model frame, meters
    Raster<Vec3> normal;    // model frame, unit length on mask
};

/// Z-buffer rasterization at pixel centers (u+0.5, v+0.5), top-left edge rule,
/// no back-face culling. Triangles with any vertex at depth <= 1e-9 are
/// dropped whole (no near-plane clipping; desk-scale scenes keep the object in
/// front of the camera). Throws EmptyRender when nothing covers the viewport.
RenderMaps rasterize(const TriangleMesh& mesh, const Pose& pose, const CameraIntrinsics& K,
                     int width, int height);

struct ShadingConfig {
    Vec3 light_dir = Vec3(0.35, 0.45, 0.82); // model frame, normalized internally
    double ambient = 0.55;
};

/// Deterministic Lambertian shading with an object-coordinate-derived albedo.
/// Light and albedo live in the model frame, so the appearance of a surface
/// point does not depend on the pose it was rendered under. Background = 0.
ImageBuffer shaded_render(const RenderMaps& maps, const ShadingConfig& shading = {});

/// One (pixel center, model point) pair per mask pixel.
std::vector<std::pair<Vec2, Vec3>> visible_correspondences(const RenderMaps& maps);

} // namespace poseflow
