#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "poseflow/flow.hpp"
#include "poseflow/geometry.hpp"
#include "poseflow/image.hpp"
#include "poseflow/mesh.hpp"

namespace poseflow {

// PNG, 8-bit gray or RGB. Values are quantized with round(v * 255).
ImageBuffer load_png(const std::filesystem::path& path);
void save_png(const std::filesystem::path& path, const ImageBuffer& img);
Mask load_mask_png(const std::filesystem::path& path); // nonzero -> 1
void save_mask_png(const std::filesystem::path& path, const Mask& mask);

// Middlebury .flo: "PIEH", int32 width, int32 height, interleaved float32
// (u,v) row-major, little-endian. Validity is not part of the format and is
// stored as a companion PNG mask by the CLI.
FlowField load_flo(const std::filesystem::path& path);
void save_flo(const std::filesystem::path& path, const FlowField& flow);

// Depth raster: text header "PFH <width> <height>\n" followed by row-major
// little-endian float32 samples.
Raster<double> load_pfh(const std::filesystem::path& path);
void save_pfh(const std::filesystem::path& path, const Raster<double>& raster);

// OBJ subset: "v x y z" and triangular "f i j k" (1-based). Faces with more
// or fewer than three vertices are malformed; normals/texcoords/material
// statements are ignored.
TriangleMesh load_obj(const std::filesystem::path& path);
void save_obj(const std::filesystem::path& path, const TriangleMesh& mesh);

// Pose JSON-lines: one {"R": [[...3x3...]], "t": [x,y,z]} object per line.
// Rotations are re-orthonormalized on load.
std::vector<Pose> load_poses_jsonl(const std::filesystem::path& path);
void save_poses_jsonl(const std::filesystem::path& path, const std::vector<Pose>& poses);
std::string pose_to_json_line(const Pose& pose);
Pose pose_from_json_line(const std::string& line);

} // namespace poseflow
