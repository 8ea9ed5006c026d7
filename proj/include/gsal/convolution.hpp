#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <vector>

#include "gsal/error.hpp"
#include "gsal/grid.hpp"

namespace gsal {

/// Kernels with a side above this use the FFT path in convolve().
inline constexpr int kFftKernelSideThreshold = 15;

enum class ConvolutionMethod { Auto, Direct, Fft };

/// Odd-sided kernel, replicate-edge border, output the same shape as the image.
inline GridD convolve_direct(const GridD& image, const GridD& kernel) {
    const int rx = kernel.width() / 2;
    const int ry = kernel.height() / 2;
    GridD out(image.width(), image.height());
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x) {
            double acc = 0.0;
            for (int j = -ry; j <= ry; ++j) {
                const int sy = std::clamp(y - j, 0, image.height() - 1);
                for (int i = -rx; i <= rx; ++i)
                    acc += kernel(i + rx, j + ry) * image(std::clamp(x - i, 0, image.width() - 1), sy);
            }
            out(x, y) = acc;
        }
    return out;
}

/// Single output sample of convolve_direct.
inline double convolve_at(const GridD& image, const GridD& kernel, int x, int y) {
    const int rx = kernel.width() / 2;
    const int ry = kernel.height() / 2;
    double acc = 0.0;
    for (int j = -ry; j <= ry; ++j) {
        const int sy = std::clamp(y - j, 0, image.height() - 1);
        for (int i = -rx; i <= rx; ++i)
            acc += kernel(i + rx, j + ry) * image(std::clamp(x - i, 0, image.width() - 1), sy);
    }
    return acc;
}

namespace detail {

/// FFTW's planner is not thread-safe; executing an existing plan is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};
struct PlanDestroy {
    void operator()(fftw_plan p) const noexcept {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(p);
    }
};
using PlanPtr = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDestroy>;

inline bool smooth_size(int n) {
    for (int p : {2, 3, 5, 7})
        while (n % p == 0) n /= p;
    return n == 1;
}

inline int next_smooth_size(int n) {
    while (!smooth_size(n)) ++n;
    return n;
}

}  // namespace detail

/// Convolves images of one fixed size with one kernel via real FFTs.
///
/// The image is replicate-padded by the kernel radius, so the circular
/// convolution never wraps into the region that is kept.
class FftConvolver {
public:
    FftConvolver(const GridD& kernel, int width, int height)
        : width_(width), height_(height), rx_(kernel.width() / 2), ry_(kernel.height() / 2) {
        if (kernel.width() % 2 == 0 || kernel.height() % 2 == 0) throw ValidationError("kernel sides must be odd");
        if (width <= 0 || height <= 0) throw ValidationError("image must be non-empty");
        pw_ = detail::next_smooth_size(width + 2 * rx_);
        ph_ = detail::next_smooth_size(height + 2 * ry_);
        const std::size_t nreal = static_cast<std::size_t>(pw_) * static_cast<std::size_t>(ph_);
        const std::size_t ncomplex = static_cast<std::size_t>(ph_) * static_cast<std::size_t>(pw_ / 2 + 1);
        real_.reset(static_cast<double*>(fftw_malloc(sizeof(double) * nreal)));
        spec_.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * ncomplex)));
        {
            std::lock_guard lock(detail::fftw_planner_mutex());
            forward_.reset(fftw_plan_dft_r2c_2d(ph_, pw_, real_.get(), spec_.get(), FFTW_ESTIMATE));
            inverse_.reset(fftw_plan_dft_c2r_2d(ph_, pw_, spec_.get(), real_.get(), FFTW_ESTIMATE));
        }
        // Kernel spectrum, origin at (0, 0) with negative offsets wrapped.
        std::fill(real_.get(), real_.get() + nreal, 0.0);
        for (int j = -ry_; j <= ry_; ++j)
            for (int i = -rx_; i <= rx_; ++i) {
                const int wx = (i + pw_) % pw_;
                const int wy = (j + ph_) % ph_;
                real_.get()[static_cast<std::size_t>(wy) * pw_ + wx] = kernel(i + rx_, j + ry_);
            }
        fftw_execute(forward_.get());
        kernel_spectrum_.assign(reinterpret_cast<std::complex<double>*>(spec_.get()),
                                reinterpret_cast<std::complex<double>*>(spec_.get()) + ncomplex);
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    GridD apply(const GridD& image) {
        if (image.width() != width_ || image.height() != height_)
            throw ValidationError("image size does not match the convolver");
        double* buf = real_.get();
        for (int y = 0; y < ph_; ++y)
            for (int x = 0; x < pw_; ++x)
                buf[static_cast<std::size_t>(y) * pw_ + x] = image.clamped(x - rx_, y - ry_);
        fftw_execute(forward_.get());
        auto* spec = reinterpret_cast<std::complex<double>*>(spec_.get());
        for (std::size_t i = 0; i < kernel_spectrum_.size(); ++i) spec[i] *= kernel_spectrum_[i];
        fftw_execute(inverse_.get());
        const double scale = 1.0 / (static_cast<double>(pw_) * ph_);
        GridD out(width_, height_);
        for (int y = 0; y < height_; ++y)
            for (int x = 0; x < width_; ++x)
                out(x, y) = buf[static_cast<std::size_t>(y + ry_) * pw_ + (x + rx_)] * scale;
        return out;
    }

private:
    int width_, height_, rx_, ry_;
    int pw_ = 0, ph_ = 0;
    std::unique_ptr<double, detail::FftwFree> real_;
    std::unique_ptr<fftw_complex, detail::FftwFree> spec_;
    detail::PlanPtr forward_;
    detail::PlanPtr inverse_;
    std::vector<std::complex<double>> kernel_spectrum_;
};

inline GridD convolve_fft(const GridD& image, const GridD& kernel) {
    FftConvolver conv(kernel, image.width(), image.height());
    return conv.apply(image);
}

inline GridD convolve(const GridD& image, const GridD& kernel, ConvolutionMethod method = ConvolutionMethod::Auto) {
    if (method == ConvolutionMethod::Auto)
        method = kernel.width() > kFftKernelSideThreshold ? ConvolutionMethod::Fft : ConvolutionMethod::Direct;
    return method == ConvolutionMethod::Fft ? convolve_fft(image, kernel) : convolve_direct(image, kernel);
}

/// Normalized 1D Gaussian taps with radius ceil(3 sigma) (at least 1).
inline std::vector<double> gaussian_taps(double sigma) {
    const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> taps(static_cast<std::size_t>(2 * r + 1));
    double total = 0;
    for (int i = -r; i <= r; ++i) {
        taps[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        total += taps[static_cast<std::size_t>(i + r)];
    }
    for (double& t : taps) t /= total;
    return taps;
}

/// Separable symmetric filter with replicate edges.
inline GridD separable_filter(const GridD& image, const std::vector<double>& taps) {
    const int r = static_cast<int>(taps.size() / 2);
    GridD tmp(image.width(), image.height());
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x) {
            double acc = 0;
            for (int i = -r; i <= r; ++i) acc += taps[static_cast<std::size_t>(i + r)] * image.clamped(x + i, y);
            tmp(x, y) = acc;
        }
    GridD out(image.width(), image.height());
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x) {
            double acc = 0;
            for (int i = -r; i <= r; ++i) acc += taps[static_cast<std::size_t>(i + r)] * tmp.clamped(x, y + i);
            out(x, y) = acc;
        }
    return out;
}

inline GridD gaussian_blur(const GridD& image, double sigma) {
    if (!(sigma > 0)) throw ValidationError("blur sigma must be > 0");
    return separable_filter(image, gaussian_taps(sigma));
}

}  // namespace gsal
