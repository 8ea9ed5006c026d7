#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "gsal/color.hpp"
#include "gsal/convolution.hpp"
#include "gsal/error.hpp"
#include "gsal/foveation.hpp"
#include "gsal/gamma_kernel.hpp"
#include "gsal/grid.hpp"
#include "gsal/saliency.hpp"

namespace gsal {

struct Fixation {
    Point point;
    double saliency_value = 0.0;
    Box extent;
    int scale_index = 0;
};

enum class StopReason { Featureless, MaxFixations };

inline const char* to_string(StopReason r) { return r == StopReason::Featureless ? "featureless" : "max_fixations"; }

struct FixationTrace {
    std::vector<Fixation> fixations;
    /// Multiplicative suppression in [0, 1], same shape as the working map.
    GridD inhibition;
    StopReason stop_reason = StopReason::Featureless;
    /// Forced initial fixation at the image center; not part of `fixations`.
    Point start;
};

enum class PathKind { Circular, Zigzag };

inline const char* to_string(PathKind k) { return k == PathKind::Circular ? "circular" : "zigzag"; }

inline PathKind parse_path_kind(const std::string& s) {
    if (s == "circular") return PathKind::Circular;
    if (s == "zigzag") return PathKind::Zigzag;
    throw ValidationError("unknown scan path '" + s + "' (expected circular or zigzag)");
}

struct ScanSequence {
    std::vector<RgbImage> frames;
    PathKind path_kind = PathKind::Zigzag;
    int frame_count = 0;
    /// Frame centers in patch coordinates, in scan order.
    std::vector<Point> centers;
};

struct Segmentation {
    Box box;  ///< tight box in image coordinates
    RgbImage patch;
    Mask mask;  ///< same shape as patch
    bool fallback = false;
};

struct ExtentEstimate {
    Box box;
    int scale_index = 0;
    std::vector<double> responses;  ///< per-scale center-surround response at the point
};

struct EngineConfig {
    SaliencyParams saliency;
    double theta = 0.2;
    int max_fixations = 30;
    PathKind path_kind = PathKind::Zigzag;
    int frame_count = 5;
    int frame_size = 16;
    bool foveate = false;
    FoveationParams foveation;

    void validate() const {
        if (!(theta > 0) || theta > 1) throw ValidationError("featureless threshold must be in (0, 1]");
        if (max_fixations < 1) throw ValidationError("max_fixations must be >= 1");
        if (frame_count < 1) throw ValidationError("frame_count must be >= 1");
        if (frame_size < 1) throw ValidationError("frame_size must be >= 1");
        if (foveate) foveation.validate();
    }
};

struct CycleResult {
    FixationTrace trace;
    std::vector<Segmentation> segments;
    std::vector<ScanSequence> scans;
};

/// Smallest scale whose response reaches this fraction of the strongest one
/// sets the object extent.
inline constexpr double kExtentResponseFraction = 0.5;

/// Argmax of map * inhibition, or nothing when it falls below theta.
/// Ties resolve to the first pixel in row-major order.
inline std::optional<Fixation> next_fixation(const SaliencyMap& map, const GridD& inhibition, double theta) {
    if (inhibition.width() != map.width() || inhibition.height() != map.height())
        throw ValidationError("inhibition grid does not match the saliency map");
    Point best{0, 0};
    double bv = -1.0;
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x) {
            const double v = map.values(x, y) * inhibition(x, y);
            if (v > bv) {
                bv = v;
                best = {x, y};
            }
        }
    if (bv < theta) return std::nullopt;
    Fixation f;
    f.point = best;
    f.saliency_value = std::clamp(bv, 0.0, 1.0);
    return f;
}

/// Compares the per-scale center-surround responses at `point`.
inline ExtentEstimate estimate_extent(const LabImage& lab, Point point, const KernelStack& stack) {
    if (point.x < 0 || point.y < 0 || point.x >= lab.width() || point.y >= lab.height())
        throw ValidationError("extent point outside image");
    ExtentEstimate e;
    double strongest = 0;
    for (std::size_t s = 0; s < stack.scales(); ++s) {
        double r = 0;
        for (int c = 0; c < 3; ++c) r += std::abs(convolve_at(lab.channel(c), stack.scale_kernel(s), point.x, point.y));
        e.responses.push_back(r / 3.0);
        strongest = std::max(strongest, r / 3.0);
    }
    e.scale_index = 0;
    for (std::size_t s = 0; s < e.responses.size(); ++s)
        if (e.responses[s] >= kExtentResponseFraction * strongest) {
            e.scale_index = static_cast<int>(s);
            break;
        }
    const int half = static_cast<int>(std::lround(stack.scale_radius(static_cast<std::size_t>(e.scale_index))));
    e.box = Box::around(point, half).clipped(lab.width(), lab.height());
    return e;
}

/// Otsu threshold of values in [0, 1] over 256 bins; nullopt if all values are equal.
inline std::optional<double> otsu_threshold(const std::vector<double>& values) {
    if (values.empty()) return std::nullopt;
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (!(hi > lo)) return std::nullopt;
    constexpr int bins = 256;
    std::array<double, bins> hist{};
    for (double v : values) {
        const int b = std::min(bins - 1, static_cast<int>((v - lo) / (hi - lo) * bins));
        hist[static_cast<std::size_t>(b)] += 1;
    }
    const double total = static_cast<double>(values.size());
    double sum_all = 0;
    for (int i = 0; i < bins; ++i) sum_all += i * hist[static_cast<std::size_t>(i)];
    double w0 = 0, sum0 = 0, best = -1;
    int best_bin = 0;
    for (int t = 0; t < bins - 1; ++t) {
        w0 += hist[static_cast<std::size_t>(t)];
        sum0 += t * hist[static_cast<std::size_t>(t)];
        const double w1 = total - w0;
        if (w0 == 0 || w1 == 0) continue;
        const double m0 = sum0 / w0;
        const double m1 = (sum_all - sum0) / w1;
        const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if (between > best) {
            best = between;
            best_bin = t;
        }
    }
    return lo + (best_bin + 1) * (hi - lo) / bins;
}

/// 8-connected component labels (0 = background, 1.. = components).
inline Grid<int> label_components(const Mask& mask, int& count) {
    Grid<int> labels(mask.width(), mask.height(), 0);
    count = 0;
    std::vector<Point> stack;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask(x, y) || labels(x, y)) continue;
            ++count;
            labels(x, y) = count;
            stack.push_back({x, y});
            while (!stack.empty()) {
                const Point p = stack.back();
                stack.pop_back();
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = p.x + dx;
                        const int ny = p.y + dy;
                        if (mask.contains(nx, ny) && mask(nx, ny) && !labels(nx, ny)) {
                            labels(nx, ny) = count;
                            stack.push_back({nx, ny});
                        }
                    }
            }
        }
    return labels;
}

/// Recomputes saliency around the extent with the largest scale dropped,
/// thresholds it (Otsu) and keeps the connected component at the fixation.
inline Segmentation refine_and_segment(const RgbImage& image, const LabImage& lab, Point point, const Box& extent,
                                       const KernelStack& stack) {
    const Box ext = extent.clipped(image.width(), image.height());
    if (ext.empty() || !ext.contains(point)) throw ValidationError("extent must be non-empty and contain the point");
    auto fallback = [&] {
        Segmentation s;
        s.box = ext;
        s.patch = crop(image, ext);
        s.mask = Mask(ext.width(), ext.height(), 1);
        s.fallback = true;
        return s;
    };

    const int margin = std::max(ext.width(), ext.height()) / 2;
    const Box context =
        Box{ext.x0 - margin, ext.y0 - margin, ext.x1 + margin, ext.y1 + margin}.clipped(image.width(), image.height());
    const KernelStack local = stack.without_largest_scale();
    GridD local_map(context.width(), context.height(), 0.0);
    for (int c = 0; c < 3; ++c) {
        const GridD r = convolve(crop(lab.channel(c), context), local.realized());
        for (std::size_t i = 0; i < r.size(); ++i) local_map.data()[i] += std::abs(r.data()[i]) / 3.0;
    }

    std::vector<double> inside;
    for (int y = ext.y0; y < ext.y1; ++y)
        for (int x = ext.x0; x < ext.x1; ++x) inside.push_back(local_map(x - context.x0, y - context.y0));
    const auto threshold = otsu_threshold(inside);
    if (!threshold) return fallback();

    Mask mask(ext.width(), ext.height(), 0);
    for (int y = ext.y0; y < ext.y1; ++y)
        for (int x = ext.x0; x < ext.x1; ++x)
            mask(x - ext.x0, y - ext.y0) = local_map(x - context.x0, y - context.y0) >= *threshold ? 1 : 0;
    int count = 0;
    const Grid<int> labels = label_components(mask, count);
    if (count == 0) return fallback();

    int keep = labels(point.x - ext.x0, point.y - ext.y0);
    if (keep == 0) {
        std::vector<int> sizes(static_cast<std::size_t>(count) + 1, 0);
        for (int v : labels) ++sizes[static_cast<std::size_t>(v)];
        keep = 1;
        for (int l = 2; l <= count; ++l)
            if (sizes[static_cast<std::size_t>(l)] > sizes[static_cast<std::size_t>(keep)]) keep = l;
    }
    Box tight{ext.x1, ext.y1, ext.x0, ext.y0};
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (labels(x, y) == keep) {
                tight.x0 = std::min(tight.x0, x + ext.x0);
                tight.y0 = std::min(tight.y0, y + ext.y0);
                tight.x1 = std::max(tight.x1, x + ext.x0 + 1);
                tight.y1 = std::max(tight.y1, y + ext.y0 + 1);
            }
    Segmentation s;
    s.box = tight;
    s.patch = crop(image, tight);
    s.mask = Mask(tight.width(), tight.height(), 0);
    for (int y = tight.y0; y < tight.y1; ++y)
        for (int x = tight.x0; x < tight.x1; ++x)
            s.mask(x - tight.x0, y - tight.y0) = labels(x - ext.x0, y - ext.y0) == keep ? 1 : 0;
    return s;
}

/// inhibition *= 1 - A * G(sigma = half_width / 2), A = saliency value clamped to [0, 1].
inline void inhibit(GridD& inhibition, const Fixation& fixation, int half_width) {
    const double amplitude = std::clamp(fixation.saliency_value, 0.0, 1.0);
    const double sigma = std::max(half_width, 1) / 2.0;
    for (int y = 0; y < inhibition.height(); ++y)
        for (int x = 0; x < inhibition.width(); ++x) {
            const double dx = x - fixation.point.x;
            const double dy = y - fixation.point.y;
            const double g = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            inhibition(x, y) = std::clamp(inhibition(x, y) * (1.0 - amplitude * g), 0.0, 1.0);
        }
}

/// Fixed-size crops along a circular or zig-zag path over the patch.
inline ScanSequence make_scan(const RgbImage& patch, PathKind kind, int frame_count, int frame_width,
                              int frame_height) {
    if (frame_count < 1) throw ValidationError("frame_count must be >= 1");
    if (frame_width < 1 || frame_height < 1) throw ValidationError("frame size must be positive");
    if (frame_width > patch.width() || frame_height > patch.height())
        throw ValidationError("frame " + std::to_string(frame_width) + "x" + std::to_string(frame_height) +
                              " larger than patch " + std::to_string(patch.width()) + "x" +
                              std::to_string(patch.height()));
    const int span_x = patch.width() - frame_width;
    const int span_y = patch.height() - frame_height;
    ScanSequence seq;
    seq.path_kind = kind;
    seq.frame_count = frame_count;
    for (int i = 0; i < frame_count; ++i) {
        int x0 = 0, y0 = 0;
        if (kind == PathKind::Zigzag) {
            const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(frame_count))));
            const int rows = (frame_count + cols - 1) / cols;
            const int r = i / cols;
            const int c = i % cols;
            x0 = cols == 1 ? span_x / 2 : static_cast<int>(std::lround(static_cast<double>(c) * span_x / (cols - 1)));
            y0 = rows == 1 ? span_y / 2 : static_cast<int>(std::lround(static_cast<double>(r) * span_y / (rows - 1)));
        } else {
            const double angle = 2.0 * std::numbers::pi * i / frame_count;
            x0 = static_cast<int>(std::lround(span_x / 2.0 + span_x / 2.0 * std::cos(angle)));
            y0 = static_cast<int>(std::lround(span_y / 2.0 + span_y / 2.0 * std::sin(angle)));
        }
        seq.frames.push_back(crop(patch, Box{x0, y0, x0 + frame_width, y0 + frame_height}));
        seq.centers.push_back({x0 + frame_width / 2, y0 + frame_height / 2});
    }
    return seq;
}

namespace detail {

/// Scales the patch up uniformly so both sides reach `frame`.
inline RgbImage fit_patch_to_frame(const RgbImage& patch, int frame) {
    if (patch.width() >= frame && patch.height() >= frame) return patch;
    const double s = std::max(static_cast<double>(frame) / patch.width(), static_cast<double>(frame) / patch.height());
    const int w = std::max(frame, static_cast<int>(std::ceil(patch.width() * s)));
    const int h = std::max(frame, static_cast<int>(std::ceil(patch.height() * s)));
    return resize(patch, w, h);
}

inline void clear_disk(GridD& g, Point c, double radius) {
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x)
            if (distance({x, y}, c) <= radius) g(x, y) = 0.0;
}

/// Shared loop; `saliency_at` returns the map and the image it was computed on
/// given the current fixation.
inline CycleResult run_cycle_impl(
    const RgbImage& working, const EngineConfig& config,
    const std::function<std::pair<SaliencyMap, RgbImage>(Point)>& saliency_at) {
    config.validate();
    CycleResult result;
    FixationTrace& trace = result.trace;
    trace.start = {working.width() / 2, working.height() / 2};
    trace.inhibition = GridD(working.width(), working.height(), 1.0);
    Point current = trace.start;
    std::optional<std::pair<SaliencyMap, RgbImage>> cached;
    std::optional<LabImage> lab;
    while (true) {
        if (static_cast<int>(trace.fixations.size()) >= config.max_fixations) {
            trace.stop_reason = StopReason::MaxFixations;
            break;
        }
        if (!cached || config.foveate) {
            cached = saliency_at(current);
            lab = rgb_to_lab(cached->second);
        }
        const SaliencyMap& map = cached->first;
        auto fix = next_fixation(map, trace.inhibition, config.theta);
        if (!fix) {
            trace.stop_reason = StopReason::Featureless;
            break;
        }
        const ExtentEstimate extent = estimate_extent(*lab, fix->point, config.saliency.stack);
        fix->extent = extent.box;
        fix->scale_index = extent.scale_index;
        const int half = static_cast<int>(
            std::lround(config.saliency.stack.scale_radius(static_cast<std::size_t>(extent.scale_index))));

        Segmentation seg = refine_and_segment(cached->second, *lab, fix->point, extent.box, config.saliency.stack);
        const RgbImage scan_patch = fit_patch_to_frame(seg.patch, config.frame_size);
        result.scans.push_back(
            make_scan(scan_patch, config.path_kind, config.frame_count, config.frame_size, config.frame_size));
        result.segments.push_back(std::move(seg));

        inhibit(trace.inhibition, *fix, half);
        // No-revisit: the foveal disk of a visited point is fully suppressed.
        clear_disk(trace.inhibition, fix->point, half);
        trace.fixations.push_back(*fix);
        current = fix->point;
    }
    return result;
}

}  // namespace detail

/// Acquire-process cycle starting from a forced fixation at the image center.
/// Coordinates are in the working (resized) frame.
inline CycleResult run_cycle(const RgbImage& image, const EngineConfig& config) {
    const RgbImage working = to_working_resolution(image, config.saliency.resize);
    return detail::run_cycle_impl(working, config, [&](Point at) {
        const RgbImage seen = config.foveate ? foveate(working, at, config.foveation).pixels : working;
        SaliencyMap map = post_process(channel_saliency(rgb_to_lab(seen), config.saliency.stack, config.saliency.stride),
                                       config.saliency.post);
        return std::make_pair(std::move(map), seen);
    });
}

/// Same cycle driven by a precomputed map on an already working-resolution image.
inline CycleResult run_cycle_on_map(const RgbImage& working, const SaliencyMap& map, const EngineConfig& config) {
    if (map.width() != working.width() || map.height() != working.height())
        throw ValidationError("saliency map does not match the image");
    EngineConfig c = config;
    c.foveate = false;
    return detail::run_cycle_impl(working, c, [&](Point) { return std::make_pair(map, working); });
}

}  // namespace gsal
