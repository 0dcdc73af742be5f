#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "poseflow/io.hpp"

namespace poseflow {

namespace {

// Leading integer of an OBJ face token ("7", "7/1", "7//2", "7/1/2").
bool face_index(const std::string& token, long& out) {
    const auto end = token.find('/');
    const std::string head = end == std::string::npos ? token : token.substr(0, end);
    const auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), out);
    return ec == std::errc() && ptr == head.data() + head.size();
}

} // namespace

TriangleMesh load_obj(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw MalformedFile("load_obj: cannot open " + path.string());

    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;
    std::string line;
    long long offset = 0;

    while (std::getline(is, line)) {
        const long long line_offset = offset;
        offset += static_cast<long long>(line.size()) + 1;
        std::istringstream ss(line);
        std::string keyword;
        if (!(ss >> keyword) || keyword[0] == '#') continue;

        if (keyword == "v") {
            double x, y, z;
            if (!(ss >> x >> y >> z))
                throw MalformedFile("load_obj: malformed vertex in " + path.string(), line_offset);
            vertices.emplace_back(x, y, z);
        } else if (keyword == "f") {
            std::vector<long> idx;
            std::string token;
            while (ss >> token) {
                long v;
                if (!face_index(token, v))
                    throw MalformedFile("load_obj: malformed face index in " + path.string(),
                                        line_offset);
                idx.push_back(v);
            }
            if (idx.size() != 3)
                throw MalformedFile("load_obj: only triangular faces are supported", line_offset);
            std::array<std::uint32_t, 3> tri;
            for (int k = 0; k < 3; ++k) {
                if (idx[k] < 1 || idx[k] > static_cast<long>(vertices.size()))
                    throw MalformedFile("load_obj: face index out of range", line_offset);
                tri[k] = static_cast<std::uint32_t>(idx[k] - 1);
            }
            triangles.push_back(tri);
        }
        // vn / vt / o / g / s / usemtl / mtllib are outside the subset; skip.
    }
    if (vertices.empty()) throw MalformedFile("load_obj: no vertices in " + path.string());
    return TriangleMesh::create(std::move(vertices), std::move(triangles));
}

void save_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
    std::ofstream os(path);
    if (!os) throw MalformedFile("save_obj: cannot open " + path.string());
    char buf[128];
    for (const Vec3& v : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
        os << buf;
    }
    for (const auto& t : mesh.triangles)
        os << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
    if (!os) throw MalformedFile("save_obj: write failed for " + path.string());
}

} // namespace poseflow
