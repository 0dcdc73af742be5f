#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "poseflow/image.hpp"

namespace poseflow {

// Polar form of the per-channel 2D DFT, raw index order (no centering).
// Forward transform is unnormalized, so a constant image c stores amplitude
// c*W*H at frequency (0,0).
struct Spectrum {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> amplitude; // planar, >= 0
    std::vector<double> phase;     // planar, radians in (-pi, pi]

    std::size_t plane_size() const { return static_cast<std::size_t>(width) * height; }
};

struct AugmentConfig {
    double beta = 1.0;    // amplitude-mix strength upper bound, alpha ~ U(0, beta)
    double delta0 = 0.5;  // dropout threshold, delta ~ U(0,1) < delta0 selects the mix branch
    std::uint64_t seed = 0;
};

Spectrum decompose(const ImageBuffer& x);

/// Inverse DFT of amplitude * e^{j phase}; imaginary residual discarded,
/// result clamped to [0,1].
ImageBuffer recompose(const Spectrum& s);

/// Same inverse transform without the final clamp. Amplitude-spectrum
/// assertions must run on this variant, since clamping is not spectrum-preserving.
ImageBuffer recompose_unclamped(const Spectrum& s);

/// (1-alpha) * src.amplitude + alpha * tgt.amplitude, element-wise.
std::vector<double> mix_amplitude(const Spectrum& src, const Spectrum& tgt, double alpha);

/// Mix branch with a fixed alpha: mixed amplitude + source phase, reconstructed.
ImageBuffer augment_mix(const ImageBuffer& x_s, const ImageBuffer& x_r, double alpha);

/// Dropout branch: amplitude = 1 at every frequency, source phase kept.
ImageBuffer augment_dropout(const ImageBuffer& x_s);

/// Draws delta ~ U(0,1) and alpha ~ U(0, beta) from rng, then applies the mix
/// branch when delta < delta0 and the dropout branch otherwise.
ImageBuffer augment(const ImageBuffer& x_s, const ImageBuffer& x_r, const AugmentConfig& cfg,
                    std::mt19937_64& rng);

} // namespace poseflow
