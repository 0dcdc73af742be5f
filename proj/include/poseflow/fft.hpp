#pragma once

#include <complex>
#include <vector>

namespace poseflow {

using Complex = std::complex<double>;

/// In-place 1D DFT of arbitrary length (radix-2 when n is a power of two,
/// Bluestein otherwise). Forward is unnormalized; inverse divides by n.
void fft_1d(std::vector<Complex>& a, bool inverse);

/// 2D DFT of a row-major w*h buffer, rows transformed in parallel. Same
/// normalization convention as fft_1d (inverse divides by w*h in total).
void fft_2d(std::vector<Complex>& data, int width, int height, bool inverse);

} // namespace poseflow
