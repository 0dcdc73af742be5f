#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <vector>

#include "poseflow/errors.hpp"

namespace poseflow {

// Generic row-major 2D grid of values.
template <typename T>
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Raster() = default;
    Raster(int w, int h, T init = T{}) : width(w), height(h), data(static_cast<std::size_t>(w) * h, init) {}

    T& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    const T& at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
    std::size_t size() const { return data.size(); }
};

using Mask = Raster<std::uint8_t>;

inline std::size_t mask_area(const Mask& m) {
    std::size_t n = 0;
    for (auto v : m.data) n += (v != 0);
    return n;
}

// Planar image, values nominally in [0,1]. data layout: [(c*H + y)*W + x].
struct ImageBuffer {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> data;

    ImageBuffer() = default;
    ImageBuffer(int w, int h, int c, double init = 0.0)
        : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, init) {}

    double& at(int c, int x, int y) {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    double at(int c, int x, int y) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    std::size_t plane_size() const { return static_cast<std::size_t>(width) * height; }
    bool same_shape(const ImageBuffer& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

inline void require_same_shape(const ImageBuffer& a, const ImageBuffer& b, const char* what) {
    if (!a.same_shape(b)) throw DimensionMismatch(std::string(what) + ": image shapes differ");
}

// Rec.601 luma; pass-through for single-channel images.
Raster<double> to_grayscale(const ImageBuffer& img);

ImageBuffer resize_bilinear(const ImageBuffer& img, int new_w, int new_h);

void clamp01(ImageBuffer& img);

ImageBuffer mask_to_image(const Mask& m);

} // namespace poseflow
