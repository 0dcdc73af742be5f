#include "poseflow/losses.hpp"

#include <cmath>

namespace poseflow {

namespace {

constexpr int kCensusRadius = 3; // 7x7 window
constexpr double kCensusSoftEps = 0.1;
constexpr double kCharbEps = 1e-3;
const double kCharbFloor = std::pow(kCharbEps, 0.4);

inline int sign3(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

// Soft Hamming distance between the ternary census descriptors of the two
// grayscale patches centered at (x,y). Saturates per pair, so a single
// strongly flipped neighbor cannot dominate.
inline double census_distance(const Raster<double>& ga, const Raster<double>& gb, int x, int y) {
    const double ca = ga.at(x, y);
    const double cb = gb.at(x, y);
    double d = 0.0;
    for (int dy = -kCensusRadius; dy <= kCensusRadius; ++dy) {
        for (int dx = -kCensusRadius; dx <= kCensusRadius; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const double da = sign3(ga.at(x + dx, y + dy) - ca);
            const double db = sign3(gb.at(x + dx, y + dy) - cb);
            const double diff = da - db;
            const double sq = diff * diff;
            d += sq / (kCensusSoftEps + sq);
        }
    }
    return d;
}

// Generalized Charbonnier, shifted so d = 0 maps to exactly 0.
inline double charbonnier(double d) { return std::pow(d * d + kCharbEps, 0.4) - kCharbFloor; }

} // namespace

MaskedLoss census_loss(const ImageBuffer& a, const ImageBuffer& b, const Mask& mask) {
    require_same_shape(a, b, "census_loss");
    if (mask.width != a.width || mask.height != a.height)
        throw DimensionMismatch("census_loss: mask shape differs");

    const Raster<double> ga = to_grayscale(a);
    const Raster<double> gb = to_grayscale(b);

    // Per-row partial sums, combined in row order: deterministic regardless of
    // the OpenMP schedule.
    std::vector<double> row_sum(a.height, 0.0);
    std::vector<std::size_t> row_count(a.height, 0);

    #pragma omp parallel for schedule(static)
    for (int y = kCensusRadius; y < a.height - kCensusRadius; ++y) {
        double s = 0.0;
        std::size_t n = 0;
        for (int x = kCensusRadius; x < a.width - kCensusRadius; ++x) {
            if (!mask.at(x, y)) continue;
            s += charbonnier(census_distance(ga, gb, x, y));
            ++n;
        }
        row_sum[y] = s;
        row_count[y] = n;
    }

    MaskedLoss out;
    double total = 0.0;
    for (int y = 0; y < a.height; ++y) {
        total += row_sum[y];
        out.count += row_count[y];
    }
    out.value = out.count > 0 ? total / static_cast<double>(out.count) : 0.0;
    return out;
}

MaskedLoss photometric_loss(const ImageBuffer& I_r, const std::vector<FlowField>& f_stu,
                            const std::vector<FlowField>& f_tea, const std::vector<Mask>& masks) {
    if (f_stu.size() != f_tea.size() || f_stu.size() != masks.size())
        throw DimensionMismatch("photometric_loss: view counts differ");

    MaskedLoss total;
    for (std::size_t i = 0; i < f_stu.size(); ++i) {
        auto [warp_s, valid_s] = backward_warp(I_r, f_stu[i]);
        auto [warp_t, valid_t] = backward_warp(I_r, f_tea[i]);
        Mask m(masks[i].width, masks[i].height, 0);
        for (std::size_t j = 0; j < m.data.size(); ++j)
            m.data[j] = masks[i].data[j] && valid_s.data[j] && valid_t.data[j];
        const MaskedLoss part = census_loss(warp_s, warp_t, m);
        total.value += part.value;
        total.count += part.count;
    }
    return total;
}

double warp_mask_loss(const std::vector<Mask>& masks_s, const std::vector<FlowField>& f_stu,
                      const std::vector<FlowField>& f_tea) {
    if (f_stu.size() != f_tea.size() || f_stu.size() != masks_s.size())
        throw DimensionMismatch("warp_mask_loss: view counts differ");

    double total = 0.0;
    for (std::size_t i = 0; i < masks_s.size(); ++i) {
        const std::size_t area = mask_area(masks_s[i]);
        if (area == 0) continue;
        const ImageBuffer m = mask_to_image(masks_s[i]);
        const ImageBuffer a = forward_warp(m, f_stu[i]);
        const ImageBuffer b = forward_warp(m, f_tea[i]);
        double l1 = 0.0;
        for (std::size_t j = 0; j < a.data.size(); ++j) l1 += std::abs(a.data[j] - b.data[j]);
        total += l1 / static_cast<double>(area);
    }
    return total;
}

MaskedLoss flow_loss(const FlowField& f_stu, const FlowField& f_tea, const Mask& kept) {
    if (!f_stu.same_shape(f_tea) || kept.width != f_stu.width || kept.height != f_stu.height)
        throw DimensionMismatch("flow_loss: shapes differ");
    MaskedLoss out;
    double total = 0.0;
    for (std::size_t i = 0; i < kept.data.size(); ++i) {
        if (!kept.data[i]) continue;
        total += std::abs(f_stu.u[i] - f_tea.u[i]) + std::abs(f_stu.v[i] - f_tea.v[i]);
        ++out.count;
    }
    out.value = out.count > 0 ? total / static_cast<double>(out.count) : 0.0;
    return out;
}

double image_level_loss(double flow, double photo, double warp_mask, const LossWeights& w) {
    return w.gamma1 * flow + w.gamma2 * photo + warp_mask;
}

double feature_level_loss(const FeatureMap& F_r, const FeatureMap& F_s, const FlowField& f_stu,
                          const Mask& feature_mask, const Raster<double>& weights) {
    if (F_r.channels != F_s.channels)
        throw ChannelMismatch("feature_level_loss: channel counts differ");
    if (F_r.width != F_s.width || F_r.height != F_s.height)
        throw DimensionMismatch("feature_level_loss: feature map shapes differ");
    if (feature_mask.width != F_s.width || feature_mask.height != F_s.height)
        throw DimensionMismatch("feature_level_loss: mask is not at feature resolution");
    const bool uniform = weights.data.empty();
    if (!uniform && (weights.width != F_s.width || weights.height != F_s.height))
        throw DimensionMismatch("feature_level_loss: weight raster shape differs");

    const auto [warped, warp_valid] = backward_warp_features(F_r, f_stu);
    const int C = F_r.channels;
    double num = 0.0, den = 0.0;
    for (int y = 0; y < F_s.height; ++y) {
        for (int x = 0; x < F_s.width; ++x) {
            if (!feature_mask.at(x, y) || !warp_valid.at(x, y)) continue;
            double na = 0.0, nb = 0.0, dot = 0.0;
            for (int c = 0; c < C; ++c) {
                const double a = warped.at(c, x, y);
                const double b = F_s.at(c, x, y);
                na += a * a;
                nb += b * b;
                dot += a * b;
            }
            double dissim = 0.0;
            if (std::sqrt(na) >= 1e-8 && std::sqrt(nb) >= 1e-8)
                dissim = std::max(0.0, 1.0 - dot / (std::sqrt(na) * std::sqrt(nb)));
            const double w = uniform ? 1.0 : weights.at(x, y);
            num += w * dissim;
            den += w;
        }
    }
    return den > 0.0 ? num / den : 0.0;
}

double point_matching_loss(const Pose& P_pred, const Pose& P_pseudo, std::span<const Vec3> points,
                           bool symmetric) {
    if (points.empty()) throw DegenerateInput("point_matching_loss: no points");
    const std::size_t n = points.size();
    std::vector<Vec3> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = P_pred.R * points[i] + P_pred.t;
        b[i] = P_pseudo.R * points[i] + P_pseudo.t;
    }
    std::vector<double> per_point(n);
    if (!symmetric) {
        #pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            per_point[i] = (a[i] - b[i]).norm();
    } else {
        #pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            double best = (a[i] - b[0]).squaredNorm();
            for (std::size_t j = 1; j < n; ++j)
                best = std::min(best, (a[i] - b[j]).squaredNorm());
            per_point[i] = std::sqrt(best);
        }
    }
    double total = 0.0;
    for (double d : per_point) total += d;
    return total / static_cast<double>(n);
}

double total_selfsup_loss(double pose, double img_level, double feat_level, const LossWeights& w) {
    return w.gamma3 * pose + w.gamma4 * img_level + feat_level;
}

} // namespace poseflow
