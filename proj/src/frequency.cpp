#include "poseflow/frequency.hpp"

#include <cmath>

#include "poseflow/fft.hpp"

namespace poseflow {

namespace {

void require_matching(const Spectrum& a, const Spectrum& b, const char* what) {
    if (a.width != b.width || a.height != b.height || a.channels != b.channels)
        throw DimensionMismatch(std::string(what) + ": spectrum shapes differ");
}

ImageBuffer inverse_transform(const Spectrum& s, bool clamp) {
    ImageBuffer out(s.width, s.height, s.channels);
    const std::size_t plane = s.plane_size();
    std::vector<Complex> buf(plane);
    for (int c = 0; c < s.channels; ++c) {
        const double* amp = s.amplitude.data() + static_cast<std::size_t>(c) * plane;
        const double* ph = s.phase.data() + static_cast<std::size_t>(c) * plane;
        for (std::size_t i = 0; i < plane; ++i)
            buf[i] = Complex(amp[i] * std::cos(ph[i]), amp[i] * std::sin(ph[i]));
        fft_2d(buf, s.width, s.height, true);
        double* dst = out.data.data() + static_cast<std::size_t>(c) * plane;
        for (std::size_t i = 0; i < plane; ++i)
            dst[i] = clamp ? std::clamp(buf[i].real(), 0.0, 1.0) : buf[i].real();
    }
    return out;
}

} // namespace

Spectrum decompose(const ImageBuffer& x) {
    Spectrum s;
    s.width = x.width;
    s.height = x.height;
    s.channels = x.channels;
    const std::size_t plane = s.plane_size();
    s.amplitude.resize(plane * x.channels);
    s.phase.resize(plane * x.channels);

    std::vector<Complex> buf(plane);
    for (int c = 0; c < x.channels; ++c) {
        const double* src = x.data.data() + static_cast<std::size_t>(c) * plane;
        for (std::size_t i = 0; i < plane; ++i) buf[i] = Complex(src[i], 0.0);
        fft_2d(buf, x.width, x.height, false);
        double* amp = s.amplitude.data() + static_cast<std::size_t>(c) * plane;
        double* ph = s.phase.data() + static_cast<std::size_t>(c) * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            amp[i] = std::abs(buf[i]);
            ph[i] = std::atan2(buf[i].imag(), buf[i].real());
        }
    }
    return s;
}

ImageBuffer recompose(const Spectrum& s) { return inverse_transform(s, true); }

ImageBuffer recompose_unclamped(const Spectrum& s) { return inverse_transform(s, false); }

std::vector<double> mix_amplitude(const Spectrum& src, const Spectrum& tgt, double alpha) {
    require_matching(src, tgt, "mix_amplitude");
    std::vector<double> out(src.amplitude.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (1.0 - alpha) * src.amplitude[i] + alpha * tgt.amplitude[i];
    return out;
}

ImageBuffer augment_mix(const ImageBuffer& x_s, const ImageBuffer& x_r, double alpha) {
    require_same_shape(x_s, x_r, "augment_mix");
    Spectrum s = decompose(x_s);
    const Spectrum r = decompose(x_r);
    s.amplitude = mix_amplitude(s, r, alpha);
    return recompose(s);
}

ImageBuffer augment_dropout(const ImageBuffer& x_s) {
    Spectrum s = decompose(x_s);
    std::fill(s.amplitude.begin(), s.amplitude.end(), 1.0);
    return recompose(s);
}

ImageBuffer augment(const ImageBuffer& x_s, const ImageBuffer& x_r, const AugmentConfig& cfg,
                    std::mt19937_64& rng) {
    require_same_shape(x_s, x_r, "augment");
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double delta = u01(rng);
    const double alpha = u01(rng) * cfg.beta;
    if (delta < cfg.delta0) return augment_mix(x_s, x_r, alpha);
    return augment_dropout(x_s);
}

} // namespace poseflow
