#include "poseflow/image.hpp"

#include <cmath>

namespace poseflow {

Raster<double> to_grayscale(const ImageBuffer& img) {
    Raster<double> gray(img.width, img.height, 0.0);
    if (img.channels == 1) {
        gray.data.assign(img.data.begin(), img.data.end());
        return gray;
    }
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            gray.at(x, y) = 0.299 * img.at(0, x, y) + 0.587 * img.at(1, x, y) +
                            0.114 * img.at(2, x, y);
    return gray;
}

ImageBuffer resize_bilinear(const ImageBuffer& img, int new_w, int new_h) {
    ImageBuffer out(new_w, new_h, img.channels);
    const double sx = static_cast<double>(img.width) / new_w;
    const double sy = static_cast<double>(img.height) / new_h;
    for (int c = 0; c < img.channels; ++c) {
        for (int y = 0; y < new_h; ++y) {
            for (int x = 0; x < new_w; ++x) {
                // Map the output pixel center into source pixel-center space.
                double gx = (x + 0.5) * sx - 0.5;
                double gy = (y + 0.5) * sy - 0.5;
                gx = std::clamp(gx, 0.0, static_cast<double>(img.width - 1));
                gy = std::clamp(gy, 0.0, static_cast<double>(img.height - 1));
                const int x0 = std::min(static_cast<int>(gx), img.width - 2 >= 0 ? img.width - 2 : 0);
                const int y0 = std::min(static_cast<int>(gy), img.height - 2 >= 0 ? img.height - 2 : 0);
                const int x1 = std::min(x0 + 1, img.width - 1);
                const int y1 = std::min(y0 + 1, img.height - 1);
                const double fx = gx - x0;
                const double fy = gy - y0;
                out.at(c, x, y) = (1 - fx) * (1 - fy) * img.at(c, x0, y0) +
                                  fx * (1 - fy) * img.at(c, x1, y0) +
                                  (1 - fx) * fy * img.at(c, x0, y1) +
                                  fx * fy * img.at(c, x1, y1);
            }
        }
    }
    return out;
}

void clamp01(ImageBuffer& img) {
    for (double& v : img.data) v = std::clamp(v, 0.0, 1.0);
}

ImageBuffer mask_to_image(const Mask& m) {
    ImageBuffer out(m.width, m.height, 1);
    for (std::size_t i = 0; i < m.data.size(); ++i) out.data[i] = m.data[i] ? 1.0 : 0.0;
    return out;
}

} // namespace poseflow
