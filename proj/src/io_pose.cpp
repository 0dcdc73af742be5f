#include <fstream>

#include <json.hpp>

#include "poseflow/io.hpp"

namespace poseflow {

std::string pose_to_json_line(const Pose& pose) {
    nlohmann::json j;
    j["R"] = {{pose.R(0, 0), pose.R(0, 1), pose.R(0, 2)},
              {pose.R(1, 0), pose.R(1, 1), pose.R(1, 2)},
              {pose.R(2, 0), pose.R(2, 1), pose.R(2, 2)}};
    j["t"] = {pose.t.x(), pose.t.y(), pose.t.z()};
    return j.dump();
}

Pose pose_from_json_line(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedFile("pose JSON: " + std::string(e.what()), static_cast<long long>(e.byte));
    }
    if (!j.contains("R") || !j.contains("t")) throw MalformedFile("pose JSON: missing R or t");
    const auto& R = j["R"];
    const auto& t = j["t"];
    if (!R.is_array() || R.size() != 3 || !t.is_array() || t.size() != 3)
        throw MalformedFile("pose JSON: R must be 3x3 and t a 3-vector");

    Mat3 raw;
    for (int r = 0; r < 3; ++r) {
        if (!R[r].is_array() || R[r].size() != 3)
            throw MalformedFile("pose JSON: R must be 3x3");
        for (int c = 0; c < 3; ++c) raw(r, c) = R[r][c].get<double>();
    }
    Pose pose;
    // Absorb serialization drift by re-orthonormalizing through the 6d map.
    pose.R = rot6d_to_matrix(matrix_to_rot6d(raw));
    pose.t = Vec3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>());
    return pose;
}

std::vector<Pose> load_poses_jsonl(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw MalformedFile("load_poses_jsonl: cannot open " + path.string());
    std::vector<Pose> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        out.push_back(pose_from_json_line(line));
    }
    return out;
}

void save_poses_jsonl(const std::filesystem::path& path, const std::vector<Pose>& poses) {
    std::ofstream os(path);
    if (!os) throw MalformedFile("save_poses_jsonl: cannot open " + path.string());
    for (const Pose& p : poses) os << pose_to_json_line(p) << "\n";
    if (!os) throw MalformedFile("save_poses_jsonl: write failed for " + path.string());
}

} // namespace poseflow
