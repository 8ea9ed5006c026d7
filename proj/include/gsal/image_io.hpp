#pragma once

#include <filesystem>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "gsal/error.hpp"
#include "gsal/grid.hpp"

namespace gsal {

/// 8-bit BGR or gray Mat to RgbImage.
inline RgbImage from_mat(const cv::Mat& mat) {
    if (mat.empty()) throw ValidationError("empty image");
    cv::Mat m8;
    if (mat.depth() == CV_8U) {
        m8 = mat;
    } else if (mat.depth() == CV_16U) {
        mat.convertTo(m8, CV_8U, 1.0 / 257.0);
    } else {
        throw FormatError("unsupported pixel depth");
    }
    RgbImage out(m8.cols, m8.rows);
    const int ch = m8.channels();
    for (int y = 0; y < m8.rows; ++y) {
        const auto* row = m8.ptr<std::uint8_t>(y);
        for (int x = 0; x < m8.cols; ++x) {
            if (ch == 1) {
                out.set(x, y, row[x], row[x], row[x]);
            } else {
                const auto* px = row + static_cast<std::ptrdiff_t>(x) * ch;
                out.set(x, y, px[2], px[1], px[0]);
            }
        }
    }
    return out;
}

/// RgbImage to an 8-bit BGR Mat.
inline cv::Mat to_mat(const RgbImage& image) {
    cv::Mat m(image.height(), image.width(), CV_8UC3);
    for (int y = 0; y < image.height(); ++y) {
        auto* row = m.ptr<std::uint8_t>(y);
        for (int x = 0; x < image.width(); ++x) {
            row[3 * x] = image.at(x, y, 2);
            row[3 * x + 1] = image.at(x, y, 1);
            row[3 * x + 2] = image.at(x, y, 0);
        }
    }
    return m;
}

/// PNG, JPEG or BMP to 8-bit sRGB; gray and alpha inputs become 3-channel.
inline RgbImage load_image(const std::string& path) {
    if (!std::filesystem::exists(path)) throw IoError("image not found: " + path, path);
    const cv::Mat m = cv::imread(path, cv::IMREAD_ANYDEPTH | cv::IMREAD_COLOR);
    if (m.empty()) throw FormatError("cannot decode image: " + path);
    return from_mat(m);
}

inline void save_image(const std::string& path, const RgbImage& image) {
    bool ok = false;
    try {
        ok = cv::imwrite(path, to_mat(image));
    } catch (const cv::Exception& e) {
        throw IoError("cannot write image " + path + ": " + e.what(), path);
    }
    if (!ok) throw IoError("cannot write image: " + path, path);
}

}  // namespace gsal
