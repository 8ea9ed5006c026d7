#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "gsal/color.hpp"
#include "gsal/convolution.hpp"
#include "gsal/error.hpp"
#include "gsal/gamma_kernel.hpp"
#include "gsal/grid.hpp"

namespace gsal {

/// Non-negative map aligned to an image.
struct SaliencyMap {
    GridD values;
    bool post_processed = false;

    int width() const noexcept { return values.width(); }
    int height() const noexcept { return values.height(); }
};

/// Power, center-bias and blur applied after channel fusion.
struct PostProcessParams {
    double alpha = 5.0;
    double center_sigma = 0.0;  ///< px; 0 selects 0.25 * min(width, height)
    double blur_sigma = 0.0;    ///< px; 0 selects 0.5 * min(width, height) / 128

    /// Copy with the size-dependent sigmas filled in.
    PostProcessParams resolved(int width, int height) const {
        PostProcessParams p = *this;
        const double side = std::min(width, height);
        if (p.center_sigma == 0.0) p.center_sigma = 0.25 * side;
        if (p.blur_sigma == 0.0) p.blur_sigma = 0.5 * side / 128.0;
        return p;
    }
};

/// Working-resolution target; zero width/height disables resizing.
struct ResizeTarget {
    int width = 171;
    int height = 128;
    bool enabled() const noexcept { return width > 0 && height > 0; }
};

struct SaliencyParams {
    KernelStack stack = toronto_stack();
    PostProcessParams post;
    ResizeTarget resize;
    int stride = 1;
};

namespace detail {

inline void check_kernel_fits(int kernel_radius, int width, int height) {
    if (kernel_radius >= std::min(width, height))
        throw ValidationError("kernel radius " + std::to_string(kernel_radius) + " does not fit a " +
                              std::to_string(width) + "x" + std::to_string(height) + " image");
}

/// Convolution outputs below this fraction of max|input| * sum|kernel| are
/// round-off and set to 0, so featureless inputs give an exactly zero map.
inline constexpr double kRoundoffFloor = 1e-10;

inline double roundoff_bound(const GridD& channel, const GridD& kernel) {
    double in = 0, k = 0;
    for (double v : channel) in = std::max(in, std::abs(v));
    for (double v : kernel) k += std::abs(v);
    return kRoundoffFloor * in * k;
}

/// |kernel * channel| sampled every `stride` px, bilinearly filled in between.
inline GridD strided_abs_response(const GridD& channel, const GridD& kernel, int stride) {
    const int w = channel.width();
    const int h = channel.height();
    const int nx = (w - 1 + stride - 1) / stride + 1;
    const int ny = (h - 1 + stride - 1) / stride + 1;
    auto node = [stride](int i, int n) { return std::min(i * stride, n - 1); };
    GridD coarse(nx, ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            coarse(i, j) = std::abs(convolve_at(channel, kernel, node(i, w), node(j, h)));
    const double floor = roundoff_bound(channel, kernel);
    for (double& v : coarse)
        if (v < floor) v = 0.0;
    GridD out(w, h);
    for (int y = 0; y < h; ++y) {
        const int j0 = std::min(y / stride, ny - 1);
        const int j1 = std::min(j0 + 1, ny - 1);
        const int y0 = node(j0, h);
        const int y1 = node(j1, h);
        const double fy = y1 == y0 ? 0.0 : static_cast<double>(y - y0) / (y1 - y0);
        for (int x = 0; x < w; ++x) {
            const int i0 = std::min(x / stride, nx - 1);
            const int i1 = std::min(i0 + 1, nx - 1);
            const int x0 = node(i0, w);
            const int x1 = node(i1, w);
            const double fx = x1 == x0 ? 0.0 : static_cast<double>(x - x0) / (x1 - x0);
            const double top = coarse(i0, j0) + fx * (coarse(i1, j0) - coarse(i0, j0));
            const double bottom = coarse(i0, j1) + fx * (coarse(i1, j1) - coarse(i0, j1));
            out(x, y) = top + fy * (bottom - top);
        }
    }
    return out;
}

}  // namespace detail

/// Mean of |g * L|, |g * a|, |g * b| (un-post-processed).
inline SaliencyMap channel_saliency(const LabImage& lab, const KernelStack& stack, int stride = 1,
                                    ConvolutionMethod method = ConvolutionMethod::Auto) {
    if (stride < 1) throw ValidationError("stride must be >= 1");
    detail::check_kernel_fits(stack.radius(), lab.width(), lab.height());
    const GridD& kernel = stack.realized();
    GridD acc(lab.width(), lab.height(), 0.0);
    if (stride == 1) {
        if (method == ConvolutionMethod::Auto)
            method = kernel.width() > kFftKernelSideThreshold ? ConvolutionMethod::Fft : ConvolutionMethod::Direct;
        std::optional<FftConvolver> fft;
        if (method == ConvolutionMethod::Fft) fft.emplace(kernel, lab.width(), lab.height());
        for (int c = 0; c < 3; ++c) {
            const GridD r = fft ? fft->apply(lab.channel(c)) : convolve_direct(lab.channel(c), kernel);
            const double floor = detail::roundoff_bound(lab.channel(c), kernel);
            for (std::size_t i = 0; i < acc.size(); ++i) {
                const double v = std::abs(r.data()[i]);
                if (v >= floor) acc.data()[i] += v;
            }
        }
    } else {
        for (int c = 0; c < 3; ++c) {
            const GridD r = detail::strided_abs_response(lab.channel(c), kernel, stride);
            for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += r.data()[i];
        }
    }
    for (double& v : acc) v /= 3.0;
    return {std::move(acc), false};
}

/// Isotropic Gaussian weight centered on the grid; infinite sigma gives 1.
inline GridD center_weight(int width, int height, double sigma) {
    GridD w(width, height);
    const double cx = (width - 1) / 2.0;
    const double cy = (height - 1) / 2.0;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            w(x, y) = std::exp(-d2 / (2.0 * sigma * sigma));
        }
    return w;
}

/// Divides by the maximum; an all-zero grid stays zero.
inline void normalize_max(GridD& g) {
    const double m = max_value(g);
    if (m > 0)
        for (double& v : g) v /= m;
}

/// blur(raw^alpha * center_weight), normalized to [0, 1] by its maximum.
inline SaliencyMap post_process(const SaliencyMap& raw, const PostProcessParams& params) {
    if (raw.post_processed) throw ValidationError("saliency map is already post-processed");
    const PostProcessParams p = params.resolved(raw.width(), raw.height());
    if (!(p.alpha >= 1.0)) throw ValidationError("alpha must be >= 1, got " + std::to_string(p.alpha));
    if (!(p.center_sigma > 0) || !(p.blur_sigma > 0)) throw ValidationError("sigmas must be > 0");
    const GridD weight = center_weight(raw.width(), raw.height(), p.center_sigma);
    GridD v(raw.width(), raw.height());
    for (std::size_t i = 0; i < v.size(); ++i) v.data()[i] = std::pow(raw.values.data()[i], p.alpha) * weight.data()[i];
    v = gaussian_blur(v, p.blur_sigma);
    for (double& x : v) x = std::max(x, 0.0);
    normalize_max(v);
    return {std::move(v), true};
}

inline RgbImage to_working_resolution(const RgbImage& image, const ResizeTarget& target) {
    if (image.empty()) throw ValidationError("empty image");
    return target.enabled() ? resize(image, target.width, target.height) : image;
}

/// Resize, Lab conversion, multiscale center-surround and post-processing.
inline SaliencyMap compute_saliency(const RgbImage& image, const SaliencyParams& params) {
    const RgbImage working = to_working_resolution(image, params.resize);
    const LabImage lab = rgb_to_lab(working);
    return post_process(channel_saliency(lab, params.stack, params.stride), params.post);
}

}  // namespace gsal
