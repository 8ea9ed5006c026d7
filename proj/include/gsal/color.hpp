#pragma once

#include <array>
#include <cmath>

#include "gsal/error.hpp"
#include "gsal/grid.hpp"

namespace gsal {

/// CIELab planes: L in [0, 100], a and b roughly in [-128, 127].
struct LabImage {
    GridD L, a, b;

    int width() const noexcept { return L.width(); }
    int height() const noexcept { return L.height(); }
    const GridD& channel(int c) const { return c == 0 ? L : (c == 1 ? a : b); }
    GridD& channel(int c) { return c == 0 ? L : (c == 1 ? a : b); }
};

namespace detail {

inline double srgb_to_linear(double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

// sRGB primaries, D65. The white point is taken as the row sums so that
// neutral inputs land exactly on a = b = 0.
inline constexpr std::array<std::array<double, 3>, 3> kRgbToXyz{{
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
}};

inline constexpr double kWhiteX = 0.4124564 + 0.3575761 + 0.1804375;
inline constexpr double kWhiteY = 0.2126729 + 0.7151522 + 0.0721750;
inline constexpr double kWhiteZ = 0.0193339 + 0.1191920 + 0.9503041;

inline double lab_f(double t) {
    constexpr double delta = 6.0 / 29.0;
    return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

}  // namespace detail

inline std::array<double, 3> srgb_to_lab(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
    static const auto linear = [] {
        std::array<double, 256> t{};
        for (int i = 0; i < 256; ++i) t[static_cast<std::size_t>(i)] = detail::srgb_to_linear(i / 255.0);
        return t;
    }();
    const double r = linear[r8];
    const double g = linear[g8];
    const double b = linear[b8];
    const auto& m = detail::kRgbToXyz;
    const double fx = detail::lab_f((m[0][0] * r + m[0][1] * g + m[0][2] * b) / detail::kWhiteX);
    const double fy = detail::lab_f((m[1][0] * r + m[1][1] * g + m[1][2] * b) / detail::kWhiteY);
    const double fz = detail::lab_f((m[2][0] * r + m[2][1] * g + m[2][2] * b) / detail::kWhiteZ);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

inline LabImage rgb_to_lab(const RgbImage& image) {
    if (image.empty()) throw ValidationError("cannot convert an empty image to Lab");
    LabImage lab{GridD(image.width(), image.height()), GridD(image.width(), image.height()),
                 GridD(image.width(), image.height())};
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x) {
            const auto v = srgb_to_lab(image.at(x, y, 0), image.at(x, y, 1), image.at(x, y, 2));
            lab.L(x, y) = v[0];
            lab.a(x, y) = v[1];
            lab.b(x, y) = v[2];
        }
    return lab;
}

inline RgbImage gray_to_rgb(const Grid<std::uint8_t>& gray) {
    RgbImage out(gray.width(), gray.height());
    for (int y = 0; y < gray.height(); ++y)
        for (int x = 0; x < gray.width(); ++x) out.set(x, y, gray(x, y), gray(x, y), gray(x, y));
    return out;
}

}  // namespace gsal
