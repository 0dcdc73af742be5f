#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "poseflow/geometry.hpp"

namespace poseflow {

// Triangle mesh in model frame (meters). diameter is the exact maximum
// pairwise vertex distance, cached at construction; fine for desk-scale meshes.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;
    double diameter = 0.0;

    static TriangleMesh create(std::vector<Vec3> vertices,
                               std::vector<std::array<std::uint32_t, 3>> triangles);
};

/// Axis-aligned box centered at the origin, 12 triangles.
TriangleMesh make_box(double sx, double sy, double sz);

/// Single rectangle in the z=0 model plane (two triangles), spanning
/// [-sx/2, sx/2] x [-sy/2, sy/2].
TriangleMesh make_plane(double sx, double sy);

/// Farthest-point subsample of the vertex set, at most max_points entries,
/// seeded start. Returns all vertices when the mesh is small enough.
std::vector<Vec3> sample_model_points(const TriangleMesh& mesh, std::size_t max_points,
                                      std::uint64_t seed);

} // namespace poseflow
