#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gsal/error.hpp"

namespace gsal {

/// Row-major 2D field. (x, y) = (column, row).
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int width, int height, T fill = T{})
        : width_(width), height_(height),
          data_(static_cast<std::size_t>(checked(width)) * static_cast<std::size_t>(checked(height)), fill) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(int x, int y) { return data_[index(x, y)]; }
    const T& operator()(int x, int y) const { return data_[index(x, y)]; }

    /// Replicate-edge access.
    const T& clamped(int x, int y) const {
        return (*this)(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
    }

    bool contains(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    std::vector<T>& data() noexcept { return data_; }
    const std::vector<T>& data() const noexcept { return data_; }

    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    bool operator==(const Grid&) const = default;

private:
    static int checked(int n) {
        if (n < 0) throw ValidationError("grid dimensions must be non-negative");
        return n;
    }
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using GridD = Grid<double>;
using Mask = Grid<std::uint8_t>;

struct Point {
    int x = 0;
    int y = 0;
    bool operator==(const Point&) const = default;
};

inline double distance(Point a, Point b) {
    return std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
}

/// Half-open pixel box [x0, x1) x [y0, y1).
struct Box {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    int width() const noexcept { return x1 - x0; }
    int height() const noexcept { return y1 - y0; }
    long long area() const noexcept {
        return empty() ? 0 : static_cast<long long>(width()) * height();
    }
    bool empty() const noexcept { return x1 <= x0 || y1 <= y0; }
    bool contains(Point p) const noexcept { return p.x >= x0 && p.x < x1 && p.y >= y0 && p.y < y1; }
    bool inside(int w, int h) const noexcept { return x0 >= 0 && y0 >= 0 && x1 <= w && y1 <= h; }

    Box clipped(int w, int h) const noexcept {
        return {std::clamp(x0, 0, w), std::clamp(y0, 0, h), std::clamp(x1, 0, w), std::clamp(y1, 0, h)};
    }

    static Box around(Point c, int half_width) {
        return {c.x - half_width, c.y - half_width, c.x + half_width + 1, c.y + half_width + 1};
    }

    bool operator==(const Box&) const = default;
};

/// 8-bit interleaved RGB raster.
class RgbImage {
public:
    RgbImage() = default;
    RgbImage(int width, int height, std::uint8_t fill = 0)
        : width_(width), height_(height),
          pixels_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3, fill) {
        if (width < 0 || height < 0) throw ValidationError("image dimensions must be non-negative");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return pixels_.empty(); }

    std::uint8_t& at(int x, int y, int c) { return pixels_[offset(x, y) + static_cast<std::size_t>(c)]; }
    std::uint8_t at(int x, int y, int c) const { return pixels_[offset(x, y) + static_cast<std::size_t>(c)]; }

    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        auto o = offset(x, y);
        pixels_[o] = r;
        pixels_[o + 1] = g;
        pixels_[o + 2] = b;
    }

    std::vector<std::uint8_t>& pixels() noexcept { return pixels_; }
    const std::vector<std::uint8_t>& pixels() const noexcept { return pixels_; }

    GridD channel(int c) const {
        GridD g(width_, height_);
        for (int y = 0; y < height_; ++y)
            for (int x = 0; x < width_; ++x) g(x, y) = at(x, y, c);
        return g;
    }

    bool operator==(const RgbImage&) const = default;

private:
    std::size_t offset(int x, int y) const noexcept {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

inline std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

inline RgbImage from_channels(const GridD& r, const GridD& g, const GridD& b) {
    RgbImage out(r.width(), r.height());
    for (int y = 0; y < r.height(); ++y)
        for (int x = 0; x < r.width(); ++x) out.set(x, y, to_byte(r(x, y)), to_byte(g(x, y)), to_byte(b(x, y)));
    return out;
}

template <typename T>
Grid<T> crop(const Grid<T>& src, const Box& box) {
    const Box b = box.clipped(src.width(), src.height());
    Grid<T> out(b.width(), b.height());
    for (int y = b.y0; y < b.y1; ++y)
        for (int x = b.x0; x < b.x1; ++x) out(x - b.x0, y - b.y0) = src(x, y);
    return out;
}

inline RgbImage crop(const RgbImage& src, const Box& box) {
    const Box b = box.clipped(src.width(), src.height());
    RgbImage out(b.width(), b.height());
    for (int y = b.y0; y < b.y1; ++y)
        for (int x = b.x0; x < b.x1; ++x)
            for (int c = 0; c < 3; ++c) out.at(x - b.x0, y - b.y0, c) = src.at(x, y, c);
    return out;
}

/// Bilinear sample at continuous source coordinates with replicate edges.
inline double sample_bilinear(const GridD& src, double sx, double sy) {
    sx = std::clamp(sx, 0.0, static_cast<double>(src.width() - 1));
    sy = std::clamp(sy, 0.0, static_cast<double>(src.height() - 1));
    const int x0 = static_cast<int>(std::floor(sx));
    const int y0 = static_cast<int>(std::floor(sy));
    const int x1 = std::min(x0 + 1, src.width() - 1);
    const int y1 = std::min(y0 + 1, src.height() - 1);
    const double fx = sx - x0;
    const double fy = sy - y0;
    const double top = src(x0, y0) + fx * (src(x1, y0) - src(x0, y0));
    const double bottom = src(x0, y1) + fx * (src(x1, y1) - src(x0, y1));
    return top + fy * (bottom - top);
}

/// Pixel-center aligned bilinear resampling.
inline GridD resize_bilinear(const GridD& src, int width, int height) {
    if (src.empty() || width <= 0 || height <= 0) throw ValidationError("resize needs non-empty source and target");
    GridD out(width, height);
    const double sx = static_cast<double>(src.width()) / width;
    const double sy = static_cast<double>(src.height()) / height;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            out(x, y) = sample_bilinear(src, (x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5);
    return out;
}

/// Area-averaging resampling; each output pixel integrates its source footprint.
inline GridD resize_area(const GridD& src, int width, int height) {
    if (src.empty() || width <= 0 || height <= 0) throw ValidationError("resize needs non-empty source and target");
    const double sx = static_cast<double>(src.width()) / width;
    const double sy = static_cast<double>(src.height()) / height;
    // Horizontal pass then vertical pass; both are 1D box integrals.
    auto weights = [](int n_out, int n_src, double scale) {
        std::vector<std::vector<std::pair<int, double>>> w(static_cast<std::size_t>(n_out));
        for (int o = 0; o < n_out; ++o) {
            const double a = o * scale;
            const double b = (o + 1) * scale;
            for (int s = static_cast<int>(std::floor(a)); s < std::min(n_src, static_cast<int>(std::ceil(b))); ++s) {
                const double overlap = std::min(b, s + 1.0) - std::max(a, static_cast<double>(s));
                if (overlap > 0) w[static_cast<std::size_t>(o)].emplace_back(s, overlap / scale);
            }
        }
        return w;
    };
    const auto wx = weights(width, src.width(), sx);
    const auto wy = weights(height, src.height(), sy);
    GridD tmp(width, src.height());
    for (int y = 0; y < src.height(); ++y)
        for (int x = 0; x < width; ++x) {
            double acc = 0;
            for (auto [s, w] : wx[static_cast<std::size_t>(x)]) acc += w * src(s, y);
            tmp(x, y) = acc;
        }
    GridD out(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double acc = 0;
            for (auto [s, w] : wy[static_cast<std::size_t>(y)]) acc += w * tmp(x, s);
            out(x, y) = acc;
        }
    return out;
}

/// Area averaging when shrinking, bilinear when enlarging (per axis decision on total size).
inline GridD resize(const GridD& src, int width, int height) {
    if (src.width() == width && src.height() == height) return src;
    if (width <= src.width() && height <= src.height()) return resize_area(src, width, height);
    return resize_bilinear(src, width, height);
}

inline RgbImage resize(const RgbImage& src, int width, int height) {
    if (src.width() == width && src.height() == height) return src;
    return from_channels(resize(src.channel(0), width, height), resize(src.channel(1), width, height),
                         resize(src.channel(2), width, height));
}

inline double max_value(const GridD& g) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : g) m = std::max(m, v);
    return m;
}

inline double min_value(const GridD& g) {
    double m = std::numeric_limits<double>::infinity();
    for (double v : g) m = std::min(m, v);
    return m;
}

inline double sum(const GridD& g) {
    double s = 0;
    for (double v : g) s += v;
    return s;
}

/// First maximum in row-major order.
inline Point argmax(const GridD& g) {
    Point best{0, 0};
    double bv = -std::numeric_limits<double>::infinity();
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x)
            if (g(x, y) > bv) {
                bv = g(x, y);
                best = {x, y};
            }
    return best;
}

}  // namespace gsal
