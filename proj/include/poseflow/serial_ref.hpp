#pragma once

// Serial reference implementations of the parallel kernels. These stay
// deliberately simple (per-pixel brute force, direct DFT, exact formulas) and
// are used by the tests to validate the OpenMP paths and by the benchmark
// tool for timing comparisons. Keep them independent of the main kernels.

#include <complex>
#include <span>
#include <vector>

#include "poseflow/flow.hpp"
#include "poseflow/geometry.hpp"
#include "poseflow/image.hpp"
#include "poseflow/mesh.hpp"
#include "poseflow/raster.hpp"

namespace poseflow::ref {

/// Brute-force rasterizer: every pixel tests every triangle.
RenderMaps rasterize(const TriangleMesh& mesh, const Pose& pose, const CameraIntrinsics& K,
                     int width, int height);

/// Direct O(n^2) 2D DFT (forward unnormalized, inverse divides by w*h).
std::vector<std::complex<double>> dft_2d(const std::vector<std::complex<double>>& in, int width,
                                         int height, bool inverse);

std::pair<ImageBuffer, Mask> backward_warp(const ImageBuffer& img, const FlowField& flow);

ImageBuffer forward_warp(const ImageBuffer& img, const FlowField& flow);

/// Census loss evaluated with plain nested loops.
double census_loss(const ImageBuffer& a, const ImageBuffer& b, const Mask& mask);

double add_error(const Pose& P_pred, const Pose& P_gt, std::span<const Vec3> points);
double adds_error(const Pose& P_pred, const Pose& P_gt, std::span<const Vec3> points);

} // namespace poseflow::ref
