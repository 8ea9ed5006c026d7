#pragma once

#include <optional>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "gsal/error.hpp"
#include "gsal/fixation_engine.hpp"
#include "gsal/grid.hpp"
#include "gsal/image_io.hpp"

namespace gsal {

/// Viridis color for a value in [0, 1] (clamped).
inline std::array<std::uint8_t, 3> viridis(double v) {
    static const cv::Mat lut = [] {
        cv::Mat ramp(1, 256, CV_8UC1);
        for (int i = 0; i < 256; ++i) ramp.at<std::uint8_t>(0, i) = static_cast<std::uint8_t>(i);
        cv::Mat colored;
        cv::applyColorMap(ramp, colored, cv::COLORMAP_VIRIDIS);
        return colored;
    }();
    const auto& bgr = lut.at<cv::Vec3b>(0, to_byte(std::clamp(v, 0.0, 1.0) * 255.0));
    return {bgr[2], bgr[1], bgr[0]};
}

/// Colormapped map, optionally blended over `underlay` with weight `alpha` on the heatmap.
inline RgbImage render_heatmap(const GridD& map, const std::optional<RgbImage>& underlay = std::nullopt,
                               double alpha = 0.5) {
    if (alpha < 0 || alpha > 1) throw ValidationError("blend alpha must be in [0, 1]");
    if (underlay && (underlay->width() != map.width() || underlay->height() != map.height()))
        throw ValidationError("underlay does not match the map size");
    RgbImage out(map.width(), map.height());
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x) {
            const auto c = viridis(map(x, y));
            for (int ch = 0; ch < 3; ++ch) {
                if (!underlay) {
                    out.at(x, y, ch) = c[static_cast<std::size_t>(ch)];
                } else if (alpha == 0.0) {
                    out.at(x, y, ch) = underlay->at(x, y, ch);
                } else {
                    out.at(x, y, ch) = to_byte((1.0 - alpha) * underlay->at(x, y, ch) + alpha * c[static_cast<std::size_t>(ch)]);
                }
            }
        }
    return out;
}

inline constexpr std::array<std::uint8_t, 3> kMarkerColor{255, 40, 40};
inline constexpr std::array<std::uint8_t, 3> kLineColor{255, 220, 0};
inline constexpr std::array<std::uint8_t, 3> kBoxColor{0, 200, 255};

/// Saccade lines, extent boxes, then numbered markers on top. The forced
/// center start is not drawn.
inline RgbImage render_trace(const RgbImage& image, const FixationTrace& trace) {
    if (trace.fixations.empty()) return image;
    cv::Mat m = to_mat(image);
    auto bgr = [](const std::array<std::uint8_t, 3>& c) { return cv::Scalar(c[2], c[1], c[0]); };
    const int marker = std::max(2, std::min(image.width(), image.height()) / 60);
    const auto& fx = trace.fixations;
    for (std::size_t i = 0; i < fx.size(); ++i) {
        const auto& b = fx[i].extent;
        cv::rectangle(m, cv::Point(b.x0, b.y0), cv::Point(b.x1 - 1, b.y1 - 1), bgr(kBoxColor), 1);
    }
    for (std::size_t i = 1; i < fx.size(); ++i)
        cv::line(m, cv::Point(fx[i - 1].point.x, fx[i - 1].point.y), cv::Point(fx[i].point.x, fx[i].point.y),
                 bgr(kLineColor), 1, cv::LINE_8);
    for (std::size_t i = 0; i < fx.size(); ++i) {
        const cv::Point p(fx[i].point.x, fx[i].point.y);
        cv::circle(m, p, marker, bgr(kMarkerColor), cv::FILLED, cv::LINE_8);
        cv::putText(m, std::to_string(i + 1), p + cv::Point(marker + 1, -marker - 1), cv::FONT_HERSHEY_SIMPLEX,
                    0.3, bgr(kMarkerColor), 1, cv::LINE_8);
    }
    // Re-stamp the exact fixation pixels so they are never covered by labels.
    for (const auto& f : fx) m.at<cv::Vec3b>(f.point.y, f.point.x) = cv::Vec3b(kMarkerColor[2], kMarkerColor[1], kMarkerColor[0]);
    return from_mat(m);
}

}  // namespace gsal
