#include "poseflow/fft.hpp"

#include <cmath>

namespace poseflow {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey, in place, n a power of two.
void fft_pow2(Complex* a, std::size_t n, bool inverse) {
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
        const Complex wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            Complex w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const Complex u = a[i + k];
                const Complex v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse)
        for (std::size_t i = 0; i < n; ++i) a[i] /= static_cast<double>(n);
}

// Bluestein chirp-z for arbitrary n, expressed through a power-of-two FFT.
void fft_bluestein(std::vector<Complex>& a, bool inverse) {
    const std::size_t n = a.size();
    std::size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;

    std::vector<Complex> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        // angle = pi * k^2 / n, reduced mod 2n to keep the argument small
        const std::size_t k2 = (k * k) % (2 * n);
        const double ang = M_PI * static_cast<double>(k2) / static_cast<double>(n);
        chirp[k] = Complex(std::cos(ang), inverse ? std::sin(ang) : -std::sin(ang));
    }

    std::vector<Complex> fa(m, Complex(0, 0)), fb(m, Complex(0, 0));
    for (std::size_t k = 0; k < n; ++k) fa[k] = a[k] * chirp[k];
    fb[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) fb[k] = fb[m - k] = std::conj(chirp[k]);

    fft_pow2(fa.data(), m, false);
    fft_pow2(fb.data(), m, false);
    for (std::size_t i = 0; i < m; ++i) fa[i] *= fb[i];
    fft_pow2(fa.data(), m, true);

    for (std::size_t k = 0; k < n; ++k) a[k] = fa[k] * chirp[k];
    if (inverse)
        for (std::size_t k = 0; k < n; ++k) a[k] /= static_cast<double>(n);
}

void fft_dispatch(std::vector<Complex>& a, bool inverse) {
    if (a.size() <= 1) return;
    if (is_pow2(a.size()))
        fft_pow2(a.data(), a.size(), inverse);
    else
        fft_bluestein(a, inverse);
}

void transpose(const std::vector<Complex>& in, std::vector<Complex>& out, int w, int h) {
    #pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out[static_cast<std::size_t>(x) * h + y] = in[static_cast<std::size_t>(y) * w + x];
}

void fft_rows(std::vector<Complex>& data, int w, int h, bool inverse) {
    #pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        std::vector<Complex> row(data.begin() + static_cast<std::size_t>(y) * w,
                                 data.begin() + static_cast<std::size_t>(y + 1) * w);
        fft_dispatch(row, inverse);
        std::copy(row.begin(), row.end(), data.begin() + static_cast<std::size_t>(y) * w);
    }
}

} // namespace

void fft_1d(std::vector<Complex>& a, bool inverse) { fft_dispatch(a, inverse); }

void fft_2d(std::vector<Complex>& data, int width, int height, bool inverse) {
    fft_rows(data, width, height, inverse);
    std::vector<Complex> t(data.size());
    transpose(data, t, width, height);
    fft_rows(t, height, width, inverse);
    transpose(t, data, height, width);
}

} // namespace poseflow
