// Timing comparison between the OpenMP kernels and the serial reference
// implementations, on synthetic inputs sized like the real workloads.

#include <chrono>
#include <cstdio>
#include <random>

#include <omp.h>

#include "poseflow/fft.hpp"
#include "poseflow/frequency.hpp"
#include "poseflow/losses.hpp"
#include "poseflow/metrics.hpp"
#include "poseflow/rng.hpp"
#include "poseflow/selfsup.hpp"
#include "poseflow/serial_ref.hpp"

using namespace poseflow;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

template <typename F>
double time_ms(F&& fn, int reps) {
    fn(); // warm up
    const double t0 = now_ms();
    for (int i = 0; i < reps; ++i) fn();
    return (now_ms() - t0) / reps;
}

void report(const char* name, double parallel_ms, double serial_ms) {
    std::printf("%-22s %10.3f ms %10.3f ms   x%.2f\n", name, parallel_ms, serial_ms,
                serial_ms / parallel_ms);
}

ImageBuffer random_image(int w, int h, int c, std::uint64_t seed) {
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    ImageBuffer img(w, h, c);
    for (double& v : img.data) v = u01(rng);
    return img;
}

FlowField random_flow(int w, int h, std::uint64_t seed) {
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> d(-4.0, 4.0);
    FlowField f(w, h);
    for (std::size_t i = 0; i < f.u.size(); ++i) {
        f.u[i] = d(rng);
        f.v[i] = d(rng);
        f.valid.data[i] = 1;
    }
    return f;
}

} // namespace

int main() {
    std::printf("poseflow kernel benchmark, %d OpenMP thread(s)\n", omp_get_max_threads());
    std::printf("%-22s %13s %13s   speedup\n", "kernel", "parallel", "serial");

    {
        const TriangleMesh mesh = make_box(0.4, 0.4, 0.4);
        const CameraIntrinsics K{280, 280, 128, 128};
        Pose pose;
        pose.t = Vec3(0.02, -0.01, 0.9);
        auto rng = make_rng(7);
        pose = perturb_pose(pose, 30.0, 0.0, rng);
        const double par = time_ms([&] { rasterize(mesh, pose, K, 256, 256); }, 20);
        const double ser = time_ms([&] { ref::rasterize(mesh, pose, K, 256, 256); }, 5);
        report("rasterize 256x256", par, ser);
    }

    {
        const ImageBuffer img = random_image(64, 64, 1, 11);
        std::vector<Complex> buf(img.plane_size());
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = Complex(img.data[i], 0.0);
        const double par = time_ms(
            [&] {
                auto b = buf;
                fft_2d(b, 64, 64, false);
            },
            50);
        const double ser = time_ms([&] { ref::dft_2d(buf, 64, 64, false); }, 5);
        report("fft 64x64", par, ser);
    }

    {
        const ImageBuffer img = random_image(256, 256, 3, 13);
        const FlowField flow = random_flow(256, 256, 17);
        const double par = time_ms([&] { backward_warp(img, flow); }, 50);
        const double ser = time_ms([&] { ref::backward_warp(img, flow); }, 20);
        report("backward_warp 256x256", par, ser);
    }

    {
        const ImageBuffer img = random_image(256, 256, 3, 19);
        const FlowField flow = random_flow(256, 256, 23);
        const double par = time_ms([&] { forward_warp(img, flow); }, 50);
        const double ser = time_ms([&] { ref::forward_warp(img, flow); }, 20);
        report("forward_warp 256x256", par, ser);
    }

    {
        const ImageBuffer a = random_image(256, 256, 3, 29);
        const ImageBuffer b = random_image(256, 256, 3, 31);
        const Mask mask(256, 256, 1);
        const double par = time_ms([&] { census_loss(a, b, mask); }, 10);
        const double ser = time_ms([&] { ref::census_loss(a, b, mask); }, 5);
        report("census_loss 256x256", par, ser);
    }

    {
        auto rng = make_rng(37);
        std::uniform_real_distribution<double> d(-0.2, 0.2);
        std::vector<Vec3> points(1024);
        for (auto& p : points) p = Vec3(d(rng), d(rng), d(rng));
        Pose a, b;
        a.t = Vec3(0, 0, 1);
        b = perturb_pose(a, 10.0, 0.05, rng);
        const double par = time_ms([&] { adds_error(a, b, points); }, 20);
        const double ser = time_ms([&] { ref::adds_error(a, b, points); }, 5);
        report("adds 1024 points", par, ser);
    }

    return 0;
}
