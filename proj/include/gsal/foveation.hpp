#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "gsal/convolution.hpp"
#include "gsal/error.hpp"
#include "gsal/grid.hpp"

namespace gsal {

struct FoveationParams {
    int levels = 6;
    int blur_kernel_side = 3;
    /// Fovea radius in px, and the eccentricity step between pyramid levels.
    double resolution = 16.0;

    void validate() const {
        if (levels < 2 || levels > 8) throw ValidationError("foveation levels must be in [2, 8]");
        if (blur_kernel_side < 3 || blur_kernel_side % 2 == 0)
            throw ValidationError("foveation blur kernel side must be odd and >= 3");
        if (!(resolution > 0)) throw ValidationError("foveation resolution must be > 0");
    }
};

struct FoveatedImage {
    RgbImage pixels;
    Point fixation;
    FoveationParams params;
};

/// Pyramid levels, each resampled back to the source size.
struct Pyramid {
    /// levels[i][c] is channel c of level i at source resolution.
    std::vector<std::array<GridD, 3>> levels;
    /// Native (pre-upsampling) size of each level.
    std::vector<std::pair<int, int>> native_sizes;
};

/// Binomial (Pascal row) taps, normalized.
inline std::vector<double> binomial_taps(int side) {
    std::vector<double> t(static_cast<std::size_t>(side), 0.0);
    t[0] = 1.0;
    for (int n = 1; n < side; ++n)
        for (int i = n; i > 0; --i) t[static_cast<std::size_t>(i)] += t[static_cast<std::size_t>(i - 1)];
    double total = 0;
    for (double v : t) total += v;
    for (double& v : t) v /= total;
    return t;
}

/// Blur, then keep every second pixel.
inline GridD blur_and_halve(const GridD& g, const std::vector<double>& taps) {
    const GridD blurred = separable_filter(g, taps);
    GridD out((g.width() + 1) / 2, (g.height() + 1) / 2);
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) out(x, y) = blurred(2 * x, 2 * y);
    return out;
}

inline Pyramid build_pyramid(const RgbImage& image, const FoveationParams& params) {
    params.validate();
    const long long min_side = 1LL << params.levels;
    if (image.width() <= min_side || image.height() <= min_side)
        throw ValidationError("image " + std::to_string(image.width()) + "x" + std::to_string(image.height()) +
                              " too small for " + std::to_string(params.levels) + " pyramid levels");
    const auto taps = binomial_taps(params.blur_kernel_side);
    Pyramid p;
    std::array<GridD, 3> native{image.channel(0), image.channel(1), image.channel(2)};
    for (int level = 0; level < params.levels; ++level) {
        if (level > 0)
            for (auto& ch : native) ch = blur_and_halve(ch, taps);
        p.native_sizes.emplace_back(native[0].width(), native[0].height());
        std::array<GridD, 3> full;
        for (int c = 0; c < 3; ++c)
            full[static_cast<std::size_t>(c)] =
                level == 0 ? native[static_cast<std::size_t>(c)]
                           : resize_bilinear(native[static_cast<std::size_t>(c)], image.width(), image.height());
        p.levels.push_back(std::move(full));
    }
    return p;
}

/// Blend weight per level at a given eccentricity (px).
///
/// Continuous level position t = max(0, e / resolution - 1); each level gets
/// a Gaussian bump in t (sigma 0.5) lowered so it reaches zero one level away.
/// Inside the fovea (t = 0) all weight is on level 0.
inline std::vector<double> blend_weights(double eccentricity, const FoveationParams& params) {
    constexpr double sigma = 0.5;
    const double floor_value = std::exp(-1.0 / (2.0 * sigma * sigma));
    double t = std::max(0.0, eccentricity / params.resolution - 1.0);
    t = std::min(t, static_cast<double>(params.levels - 1));
    std::vector<double> w(static_cast<std::size_t>(params.levels), 0.0);
    double total = 0;
    for (int i = 0; i < params.levels; ++i) {
        const double d = t - i;
        const double v = std::abs(d) >= 1.0 ? 0.0 : std::exp(-d * d / (2.0 * sigma * sigma)) - floor_value;
        w[static_cast<std::size_t>(i)] = std::max(v, 0.0);
        total += w[static_cast<std::size_t>(i)];
    }
    for (double& v : w) v /= total;
    return w;
}

inline FoveatedImage foveate(const RgbImage& image, Point fixation, const FoveationParams& params) {
    params.validate();
    if (fixation.x < 0 || fixation.y < 0 || fixation.x >= image.width() || fixation.y >= image.height())
        throw ValidationError("fixation (" + std::to_string(fixation.x) + ", " + std::to_string(fixation.y) +
                              ") outside image");
    const Pyramid pyramid = build_pyramid(image, params);
    RgbImage out(image.width(), image.height());
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x) {
            const auto w = blend_weights(distance({x, y}, fixation), params);
            if (w[0] == 1.0) {
                for (int c = 0; c < 3; ++c) out.at(x, y, c) = image.at(x, y, c);
                continue;
            }
            for (int c = 0; c < 3; ++c) {
                double acc = 0;
                for (std::size_t i = 0; i < w.size(); ++i)
                    if (w[i] > 0) acc += w[i] * pyramid.levels[i][static_cast<std::size_t>(c)](x, y);
                out.at(x, y, c) = to_byte(acc);
            }
        }
    return {std::move(out), fixation, params};
}

}  // namespace gsal
