#include <cstring>
#include <fstream>

#include "poseflow/io.hpp"

namespace poseflow {

// Little-endian float32 helpers. The build targets little-endian hosts; the
// byte-level golden test in the suite would catch a mismatch.
namespace {

void write_f32(std::ostream& os, float v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
}

void write_i32(std::ostream& os, std::int32_t v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
}

bool read_f32(std::istream& is, float& v) {
    return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), 4));
}

bool read_i32(std::istream& is, std::int32_t& v) {
    return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), 4));
}

constexpr float kFloTag = 202021.25f; // "PIEH" interpreted as little-endian float

} // namespace

FlowField load_flo(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw MalformedFile("load_flo: cannot open " + path.string());

    float tag = 0.0f;
    std::int32_t w = 0, h = 0;
    if (!read_f32(is, tag)) throw MalformedFile("load_flo: truncated header", 0);
    if (tag != kFloTag) throw MalformedFile("load_flo: bad magic in " + path.string(), 0);
    if (!read_i32(is, w)) throw MalformedFile("load_flo: truncated header", 4);
    if (!read_i32(is, h)) throw MalformedFile("load_flo: truncated header", 8);
    if (w < 1 || h < 1 || w > 99999 || h > 99999)
        throw MalformedFile("load_flo: implausible dimensions", 4);

    FlowField f(w, h);
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(w) * h; ++i) {
        float u, v;
        if (!read_f32(is, u) || !read_f32(is, v))
            throw MalformedFile("load_flo: truncated data", 12 + i * 8);
        f.u[i] = u;
        f.v[i] = v;
        f.valid.data[i] = 1;
    }
    if (is.peek() != EOF) throw MalformedFile("load_flo: trailing bytes", 12 + static_cast<long long>(w) * h * 8);
    return f;
}

void save_flo(const std::filesystem::path& path, const FlowField& flow) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw MalformedFile("save_flo: cannot open " + path.string());
    os.write("PIEH", 4);
    write_i32(os, flow.width);
    write_i32(os, flow.height);
    for (std::size_t i = 0; i < flow.u.size(); ++i) {
        write_f32(os, static_cast<float>(flow.u[i]));
        write_f32(os, static_cast<float>(flow.v[i]));
    }
    if (!os) throw MalformedFile("save_flo: write failed for " + path.string());
}

Raster<double> load_pfh(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw MalformedFile("load_pfh: cannot open " + path.string());

    std::string magic;
    int w = 0, h = 0;
    is >> magic >> w >> h;
    if (magic != "PFH") throw MalformedFile("load_pfh: bad magic in " + path.string(), 0);
    if (w < 1 || h < 1) throw MalformedFile("load_pfh: implausible dimensions");
    is.get(); // newline after the header

    Raster<double> out(w, h, 0.0);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        float v;
        if (!read_f32(is, v))
            throw MalformedFile("load_pfh: truncated data in " + path.string());
        out.data[i] = v;
    }
    return out;
}

void save_pfh(const std::filesystem::path& path, const Raster<double>& raster) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw MalformedFile("save_pfh: cannot open " + path.string());
    os << "PFH " << raster.width << " " << raster.height << "\n";
    for (double d : raster.data) write_f32(os, static_cast<float>(d));
    if (!os) throw MalformedFile("save_pfh: write failed for " + path.string());
}

} // namespace poseflow
