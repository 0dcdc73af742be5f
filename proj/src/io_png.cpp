#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>

#include "poseflow/io.hpp"

namespace poseflow {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

} // namespace

ImageBuffer load_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw MalformedFile("load_png: cannot open " + path.string());

    png_byte header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8))
        throw MalformedFile("load_png: not a PNG file: " + path.string(), 0);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw MalformedFile("load_png: decode error in " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    int channels = static_cast<int>(png_get_channels(png, info));
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw MalformedFile("load_png: unsupported channel count in " + path.string());
    }

    std::vector<png_byte> rowbuf(static_cast<std::size_t>(width) * channels);
    ImageBuffer img(width, height, channels);
    for (int y = 0; y < height; ++y) {
        png_read_row(png, rowbuf.data(), nullptr);
        for (int x = 0; x < width; ++x)
            for (int c = 0; c < channels; ++c)
                img.at(c, x, y) = rowbuf[static_cast<std::size_t>(x) * channels + c] / 255.0;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void save_png(const std::filesystem::path& path, const ImageBuffer& img) {
    if (img.channels != 1 && img.channels != 3)
        throw DimensionMismatch("save_png: only 1- or 3-channel images");

    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw MalformedFile("save_png: cannot open " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw MalformedFile("save_png: encode error for " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.width, img.height, 8,
                 img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_byte> rowbuf(static_cast<std::size_t>(img.width) * img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                const double v = std::clamp(img.at(c, x, y), 0.0, 1.0);
                rowbuf[static_cast<std::size_t>(x) * img.channels + c] =
                    static_cast<png_byte>(std::lround(v * 255.0));
            }
        png_write_row(png, rowbuf.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Mask load_mask_png(const std::filesystem::path& path) {
    const ImageBuffer img = load_png(path);
    Mask m(img.width, img.height, 0);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) m.at(x, y) = img.at(0, x, y) > 0.5 ? 1 : 0;
    return m;
}

void save_mask_png(const std::filesystem::path& path, const Mask& mask) {
    save_png(path, mask_to_image(mask));
}

} // namespace poseflow
