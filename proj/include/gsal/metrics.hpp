#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gsal/convolution.hpp"
#include "gsal/error.hpp"
#include "gsal/grid.hpp"

namespace gsal {

/// Human fixations for one image, in image pixels.
struct FixationSet {
    std::vector<Point> points;
    std::string image_id;
    int width = 0;
    int height = 0;

    void validate() const {
        if (points.empty()) throw ValidationError("fixation set for '" + image_id + "' is empty");
        for (const auto& p : points)
            if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height)
                throw ValidationError("fixation (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                                      ") outside " + std::to_string(width) + "x" + std::to_string(height));
    }
};

struct MetricValue {
    double value = 0.0;
    bool degenerate = false;  ///< constant map; value is the chance convention
};

enum class RocMode { Judd, Borji };

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

inline constexpr int kDefaultBorjiSplits = 100;

/// Gaussian-blurred fixation histogram that sums to 1.
inline GridD density_map(const FixationSet& fix, double sigma) {
    fix.validate();
    GridD h(fix.width, fix.height, 0.0);
    for (const auto& p : fix.points) h(p.x, p.y) += 1.0;
    if (sigma > 0) h = gaussian_blur(h, sigma);
    const double total = sum(h);
    for (double& v : h) v /= total;
    return h;
}

/// Blur sigma for density maps: one degree of visual angle, given px per degree
/// at the original resolution and the scale of the grid actually scored.
inline double density_sigma(double px_per_degree, double grid_width, double original_width) {
    return px_per_degree * grid_width / original_width;
}

namespace detail {

inline void check_same_shape(const GridD& a, const GridD& b) {
    if (a.width() != b.width() || a.height() != b.height()) throw ValidationError("maps differ in shape");
}

inline bool is_constant(const GridD& m) { return max_value(m) == min_value(m); }

/// Fixated pixel mask, each pixel counted once.
inline Mask fixation_mask(const GridD& map, const FixationSet& fix) {
    fix.validate();
    if (fix.width != map.width() || fix.height != map.height())
        throw ValidationError("fixation dimensions do not match the map");
    Mask m(map.width(), map.height(), 0);
    for (const auto& p : fix.points) m(p.x, p.y) = 1;
    return m;
}

inline double trapezoid(const std::vector<RocPoint>& curve) {
    double area = 0;
    for (std::size_t i = 1; i < curve.size(); ++i)
        area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
    return area;
}

/// ROC over positives/negatives, thresholds at every distinct score
/// (descending), counting score >= threshold as predicted positive.
inline std::vector<RocPoint> roc_from_scores(std::vector<double> pos, std::vector<double> neg) {
    std::sort(pos.begin(), pos.end(), std::greater<>());
    std::sort(neg.begin(), neg.end(), std::greater<>());
    std::vector<double> thresholds = pos;
    thresholds.insert(thresholds.end(), neg.begin(), neg.end());
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    std::vector<RocPoint> curve{{0.0, 0.0}};
    std::size_t ip = 0, in = 0;
    for (double t : thresholds) {
        while (ip < pos.size() && pos[ip] >= t) ++ip;
        while (in < neg.size() && neg[in] >= t) ++in;
        curve.push_back({neg.empty() ? 0.0 : static_cast<double>(in) / neg.size(),
                         pos.empty() ? 0.0 : static_cast<double>(ip) / pos.size()});
    }
    if (curve.back().fpr != 1.0 || curve.back().tpr != 1.0) curve.push_back({1.0, 1.0});
    return curve;
}

/// Judd curve: thresholds at the map values of fixated pixels; negatives are
/// all non-fixated pixels.
inline std::vector<RocPoint> judd_curve(const GridD& map, const Mask& fixated) {
    std::vector<double> pos, all;
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (fixated.data()[i]) pos.push_back(map.data()[i]);
        all.push_back(map.data()[i]);
    }
    std::sort(pos.begin(), pos.end(), std::greater<>());
    std::sort(all.begin(), all.end(), std::greater<>());
    std::vector<double> thresholds = pos;
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    const double n_pos = static_cast<double>(pos.size());
    const double n_neg = static_cast<double>(all.size()) - n_pos;
    std::vector<RocPoint> curve{{0.0, 0.0}};
    std::size_t ip = 0, ia = 0;
    for (double t : thresholds) {
        while (ip < pos.size() && pos[ip] >= t) ++ip;
        while (ia < all.size() && all[ia] >= t) ++ia;
        const double fp = static_cast<double>(ia - ip);
        curve.push_back({n_neg > 0 ? fp / n_neg : 0.0, ip / n_pos});
    }
    curve.push_back({1.0, 1.0});
    return curve;
}

inline std::vector<double> borji_negatives(const GridD& map, std::size_t count, int splits, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, map.size() - 1);
    std::vector<double> neg;
    neg.reserve(count * static_cast<std::size_t>(splits));
    for (int s = 0; s < splits; ++s)
        for (std::size_t i = 0; i < count; ++i) neg.push_back(map.data()[pick(rng)]);
    return neg;
}

}  // namespace detail

inline MetricValue auc_judd(const GridD& map, const FixationSet& fix) {
    const Mask fixated = detail::fixation_mask(map, fix);
    if (detail::is_constant(map)) return {0.5, true};
    return {detail::trapezoid(detail::judd_curve(map, fixated)), false};
}

/// Negatives drawn uniformly over the image, as many as fixated pixels per
/// split; the AUC of each split is exact over all thresholds and the splits
/// are averaged.
inline MetricValue auc_borji(const GridD& map, const FixationSet& fix, int n_splits = kDefaultBorjiSplits,
                             std::uint64_t seed = 0) {
    if (n_splits < 1) throw ValidationError("n_splits must be >= 1");
    const Mask fixated = detail::fixation_mask(map, fix);
    if (detail::is_constant(map)) return {0.5, true};
    std::vector<double> pos;
    for (std::size_t i = 0; i < map.size(); ++i)
        if (fixated.data()[i]) pos.push_back(map.data()[i]);
    const auto neg = detail::borji_negatives(map, pos.size(), n_splits, seed);
    double total = 0;
    for (int s = 0; s < n_splits; ++s) {
        const auto first = neg.begin() + static_cast<std::ptrdiff_t>(s * pos.size());
        total += detail::trapezoid(
            detail::roc_from_scores(pos, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(pos.size()))));
    }
    return {total / n_splits, false};
}

inline std::vector<RocPoint> roc_curve(const GridD& map, const FixationSet& fix, RocMode mode,
                                       int n_splits = kDefaultBorjiSplits, std::uint64_t seed = 0) {
    const Mask fixated = detail::fixation_mask(map, fix);
    if (mode == RocMode::Judd) {
        if (detail::is_constant(map)) return {{0.0, 0.0}, {1.0, 1.0}};
        return detail::judd_curve(map, fixated);
    }
    std::vector<double> pos;
    for (std::size_t i = 0; i < map.size(); ++i)
        if (fixated.data()[i]) pos.push_back(map.data()[i]);
    return detail::roc_from_scores(pos, detail::borji_negatives(map, pos.size(), n_splits, seed));
}

inline double roc_area(const std::vector<RocPoint>& curve) { return detail::trapezoid(curve); }

/// Histogram intersection after normalizing each map to sum 1.
inline double similarity(const GridD& a, const GridD& b) {
    detail::check_same_shape(a, b);
    const double sa = sum(a);
    const double sb = sum(b);
    if (!(sa > 0) || !(sb > 0)) throw ValidationError("similarity needs maps with positive mass");
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::min(a.data()[i] / sa, b.data()[i] / sb);
    return std::clamp(s, 0.0, 1.0);
}

/// Pearson correlation; 0 with the degenerate flag when either map is constant.
inline MetricValue correlation(const GridD& a, const GridD& b) {
    detail::check_same_shape(a, b);
    const double n = static_cast<double>(a.size());
    const double ma = sum(a) / n;
    const double mb = sum(b) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a.data()[i] - ma;
        const double db = b.data()[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0 || sbb == 0) return {0.0, true};
    return {std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0), false};
}

/// Mean z-scored map value over fixated pixels (population standard deviation).
inline MetricValue nss(const GridD& map, const FixationSet& fix) {
    const Mask fixated = detail::fixation_mask(map, fix);
    const double n = static_cast<double>(map.size());
    const double mean = sum(map) / n;
    double var = 0;
    for (double v : map) var += (v - mean) * (v - mean);
    var /= n;
    if (var == 0) return {0.0, true};
    const double sd = std::sqrt(var);
    double total = 0;
    int count = 0;
    for (std::size_t i = 0; i < map.size(); ++i)
        if (fixated.data()[i]) {
            total += (map.data()[i] - mean) / sd;
            ++count;
        }
    return {total / count, false};
}

inline double iou(const Box& a, const Box& b) {
    const Box inter{std::max(a.x0, b.x0), std::max(a.y0, b.y0), std::min(a.x1, b.x1), std::min(a.y1, b.y1)};
    const long long i = inter.area();
    const long long u = a.area() + b.area() - i;
    return u > 0 ? static_cast<double>(i) / static_cast<double>(u) : 0.0;
}

}  // namespace gsal
