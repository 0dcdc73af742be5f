#include "poseflow/mesh.hpp"

#include <limits>

#include "poseflow/errors.hpp"

namespace poseflow {

TriangleMesh TriangleMesh::create(std::vector<Vec3> vertices,
                                  std::vector<std::array<std::uint32_t, 3>> triangles) {
    TriangleMesh mesh;
    mesh.vertices = std::move(vertices);
    mesh.triangles = std::move(triangles);
    for (const auto& tri : mesh.triangles)
        for (auto idx : tri)
            if (idx >= mesh.vertices.size())
                throw DegenerateInput("TriangleMesh: vertex index out of range");

    double best = 0.0;
    const std::size_t n = mesh.vertices.size();
    #pragma omp parallel for reduction(max : best) schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = (mesh.vertices[i] - mesh.vertices[j]).norm();
            if (d > best) best = d;
        }
    }
    mesh.diameter = best;
    if (!mesh.triangles.empty() && !(mesh.diameter > 0.0))
        throw DegenerateInput("TriangleMesh: degenerate mesh, zero diameter");
    return mesh;
}

TriangleMesh make_box(double sx, double sy, double sz) {
    const double x = sx / 2, y = sy / 2, z = sz / 2;
    std::vector<Vec3> v = {
        {-x, -y, -z}, {x, -y, -z}, {x, y, -z}, {-x, y, -z},
        {-x, -y, z},  {x, -y, z},  {x, y, z},  {-x, y, z},
    };
    std::vector<std::array<std::uint32_t, 3>> t = {
        {0, 2, 1}, {0, 3, 2}, // z-
        {4, 5, 6}, {4, 6, 7}, // z+
        {0, 1, 5}, {0, 5, 4}, // y-
        {3, 7, 6}, {3, 6, 2}, // y+
        {0, 4, 7}, {0, 7, 3}, // x-
        {1, 2, 6}, {1, 6, 5}, // x+
    };
    return TriangleMesh::create(std::move(v), std::move(t));
}

TriangleMesh make_plane(double sx, double sy) {
    const double x = sx / 2, y = sy / 2;
    std::vector<Vec3> v = {{-x, -y, 0}, {x, -y, 0}, {x, y, 0}, {-x, y, 0}};
    std::vector<std::array<std::uint32_t, 3>> t = {{0, 1, 2}, {0, 2, 3}};
    return TriangleMesh::create(std::move(v), std::move(t));
}

std::vector<Vec3> sample_model_points(const TriangleMesh& mesh, std::size_t max_points,
                                      std::uint64_t seed) {
    const auto& verts = mesh.vertices;
    if (verts.size() <= max_points) return verts;

    std::mt19937_64 rng(seed);
    std::vector<Vec3> picked;
    picked.reserve(max_points);
    std::vector<double> dist(verts.size(), std::numeric_limits<double>::max());

    std::size_t current = rng() % verts.size();
    picked.push_back(verts[current]);
    while (picked.size() < max_points) {
        std::size_t farthest = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < verts.size(); ++i) {
            const double d = (verts[i] - picked.back()).squaredNorm();
            if (d < dist[i]) dist[i] = d;
            if (dist[i] > best) {
                best = dist[i];
                farthest = i;
            }
        }
        picked.push_back(verts[farthest]);
    }
    return picked;
}

} // namespace poseflow
