#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "poseflow/frequency.hpp"
#include "poseflow/metrics.hpp"
#include "poseflow/selfsup.hpp"

namespace poseflow {

// Everything a reproducible desk-scale experiment needs, loaded from JSON.
struct ExperimentConfig {
    std::string mesh = "cube";              // "cube", "plane", or an OBJ path
    double mesh_scale = 0.4;                // edge length for the built-in meshes
    CameraIntrinsics K{280.0, 280.0, 128.0, 128.0};
    int width = 256;
    int height = 256;
    std::uint64_t seed = 0;
    double object_distance = 0.9;           // gt translation z
    double p0_rot_deg = 10.0;               // P0 perturbation around gt
    double p0_trans_frac = 0.05;
    SelfSupConfig selfsup;
    AugmentConfig augment;
    std::string estimator = "toy";          // "analytic", "damped", "toy"
    double damping = 0.5;
    int steps = 200;
    std::optional<int> crop_size;           // crop-and-resize when set

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::filesystem::path& path, bool check_paths = true);

    /// Replace the master seed and every seed derived from it.
    void reseed(std::uint64_t new_seed);
};

TriangleMesh build_mesh(const ExperimentConfig& cfg);
SampleScene build_scene(const ExperimentConfig& cfg);

/// Crop-and-resize around the object's projected bounding square (padding
/// factor applied to the longer side), returning the patch and the adjusted
/// intrinsics of the cropped camera.
std::pair<ImageBuffer, CameraIntrinsics> crop_to_object(const ImageBuffer& img,
                                                        const TriangleMesh& mesh, const Pose& p0,
                                                        const CameraIntrinsics& K, int out_size,
                                                        double padding = 1.5);

nlohmann::json loss_record_to_json(const LossRecord& rec);

/// Run the teacher-student harness for cfg.steps steps; writes losses.jsonl
/// and summary.json into out_dir. Returns the final total loss.
double run_selfsup_sim(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                       std::ostream* log = nullptr);

/// Single teacher/student evaluation without training; returns the LossRecord.
LossRecord run_eval_loss(const ExperimentConfig& cfg);

struct DemoResult {
    double initial_rot_deg = 0.0;
    double initial_trans_m = 0.0;
    double max_final_rot_deg = 0.0;
    double max_final_trans_m = 0.0;
    MetricsSummary metrics;
};

/// Cube scene, perturbed starts, damped-oracle refinement; prints the metrics
/// table to `out` and returns the worst-case final errors.
DemoResult run_demo(std::uint64_t seed, std::ostream& out, int n_starts = 20);

} // namespace poseflow
