#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gsal/convolution.hpp"
#include "gsal/error.hpp"
#include "gsal/fixation_engine.hpp"
#include "gsal/gamma_kernel.hpp"
#include "gsal/grid.hpp"
#include "gsal/metrics.hpp"
#include "gsal/saliency.hpp"

namespace gsal {

/// N same-shaped feature maps for one image.
struct FeatureMapStack {
    std::vector<GridD> maps;
    std::string source_tag;
    /// Image pixels per feature-grid pixel.
    double spatial_scale = 1.0;

    int width() const { return maps.empty() ? 0 : maps.front().width(); }
    int height() const { return maps.empty() ? 0 : maps.front().height(); }
    std::size_t count() const noexcept { return maps.size(); }

    void validate() const {
        if (maps.empty()) throw ValidationError("feature map stack is empty");
        if (!(spatial_scale > 0)) throw ValidationError("spatial_scale must be > 0");
        for (const auto& m : maps) {
            if (m.width() != width() || m.height() != height())
                throw ValidationError("feature maps differ in shape");
            for (double v : m)
                if (!std::isfinite(v)) throw ValidationError("feature map holds a non-finite value");
        }
    }
};

/// Per-class feature weights w_n^i plus the kernel and exponent used with them.
struct TopDownModel {
    std::vector<std::string> classes;
    std::vector<std::vector<double>> weights;  ///< [class][map]
    double alpha = 5.0;
    std::vector<GammaKernelSpec> kernel_specs;

    std::size_t class_index(const std::string& id) const {
        const auto it = std::find(classes.begin(), classes.end(), id);
        if (it == classes.end()) throw ValidationError("unknown class '" + id + "'");
        return static_cast<std::size_t>(it - classes.begin());
    }

    void validate() const {
        if (classes.size() != weights.size()) throw ValidationError("model class/weight rows mismatch");
        for (std::size_t i = 0; i < weights.size(); ++i) {
            bool positive = false;
            for (double w : weights[i]) {
                if (!std::isfinite(w) || w < 0) throw ValidationError("model weights must be finite and >= 0");
                positive = positive || w > 0;
            }
            if (!positive) throw ValidationError("class '" + classes[i] + "' has no positive weight");
            if (weights[i].size() != weights.front().size()) throw ValidationError("ragged weight matrix");
        }
        if (!(alpha >= 1)) throw ValidationError("alpha must be >= 1");
    }
};

struct LabeledBox {
    std::string image_id;
    std::string class_id;
    Box box;  ///< feature-grid coordinates
};

struct TrainingExample {
    FeatureMapStack features;
    LabeledBox label;
};

/// Terms whose outside saliency had to be floored.
struct FlooredTerm {
    std::string image_id;
    std::size_t map_index = 0;
};

struct TrainingResult {
    TopDownModel model;
    std::vector<FlooredTerm> floored;
};

/// Relative floor on the outside mean, as a fraction of the map maximum.
inline constexpr double kOutsideFloor = 1e-6;

/// |g * C^n|^alpha for each map.
inline std::vector<GridD> raw_map_saliency(const FeatureMapStack& stack, const KernelStack& kernel, double alpha) {
    stack.validate();
    if (!(alpha >= 1)) throw ValidationError("alpha must be >= 1");
    detail::check_kernel_fits(kernel.radius(), stack.width(), stack.height());
    std::vector<GridD> out;
    out.reserve(stack.count());
    const bool use_fft = kernel.realized().width() > kFftKernelSideThreshold;
    std::optional<FftConvolver> fft;
    if (use_fft) fft.emplace(kernel.realized(), stack.width(), stack.height());
    for (const auto& m : stack.maps) {
        GridD r = fft ? fft->apply(m) : convolve_direct(m, kernel.realized());
        const double floor = detail::roundoff_bound(m, kernel.realized());
        for (double& v : r) v = std::abs(v) < floor ? 0.0 : std::pow(std::abs(v), alpha);
        out.push_back(std::move(r));
    }
    return out;
}

/// Mean inside the box over mean outside it, with the outside floored at
/// kOutsideFloor * map max. `floored` reports whether the floor applied.
inline double inside_outside_ratio(const GridD& saliency, const Box& box, bool& floored) {
    const Box b = box.clipped(saliency.width(), saliency.height());
    double in_sum = 0, out_sum = 0;
    long long in_n = 0, out_n = 0;
    for (int y = 0; y < saliency.height(); ++y)
        for (int x = 0; x < saliency.width(); ++x) {
            if (b.contains({x, y})) {
                in_sum += saliency(x, y);
                ++in_n;
            } else {
                out_sum += saliency(x, y);
                ++out_n;
            }
        }
    if (in_n == 0 || out_n == 0) throw ValidationError("training box must leave both an inside and an outside region");
    const double inside = in_sum / static_cast<double>(in_n);
    double outside = out_sum / static_cast<double>(out_n);
    const double eps = kOutsideFloor * max_value(saliency);
    floored = outside <= eps;
    if (floored) outside = eps > 0 ? eps : std::numeric_limits<double>::min();
    return inside / outside;
}

/// Class weights from precomputed per-map saliencies: per class, the mean over its
/// images of the per-map inside/outside ratio.
inline TrainingResult weights_from_saliency(const std::vector<std::vector<GridD>>& per_image_saliency,
                                            const std::vector<LabeledBox>& labels) {
    if (per_image_saliency.size() != labels.size()) throw ValidationError("saliency/label count mismatch");
    if (labels.empty()) throw ValidationError("no training examples");
    const std::size_t n_maps = per_image_saliency.front().size();
    TrainingResult result;
    std::map<std::string, std::size_t> row_of;
    std::vector<int> counts;
    for (std::size_t m = 0; m < labels.size(); ++m) {
        const auto& sal = per_image_saliency[m];
        if (sal.size() != n_maps) throw ValidationError("training stacks differ in map count");
        const auto& label = labels[m];
        if (label.box.empty()) throw ValidationError("degenerate training box for '" + label.image_id + "'");
        auto [it, added] = row_of.try_emplace(label.class_id, result.model.classes.size());
        if (added) {
            result.model.classes.push_back(label.class_id);
            result.model.weights.emplace_back(n_maps, 0.0);
            counts.push_back(0);
        }
        auto& row = result.model.weights[it->second];
        ++counts[it->second];
        for (std::size_t n = 0; n < n_maps; ++n) {
            bool floored = false;
            row[n] += inside_outside_ratio(sal[n], label.box, floored);
            if (floored) result.floored.push_back({label.image_id, n});
        }
    }
    for (std::size_t i = 0; i < result.model.weights.size(); ++i)
        for (double& w : result.model.weights[i]) w /= counts[i];
    return result;
}

inline TrainingResult learn_weights(const std::vector<TrainingExample>& training,
                                    const std::vector<GammaKernelSpec>& kernel_specs, double alpha) {
    const KernelStack kernel(kernel_specs);
    std::vector<std::vector<GridD>> sal;
    std::vector<LabeledBox> labels;
    for (const auto& ex : training) {
        if (!ex.label.box.inside(ex.features.width(), ex.features.height()))
            throw ValidationError("training box for '" + ex.label.image_id + "' lies outside the feature grid");
        sal.push_back(raw_map_saliency(ex.features, kernel, alpha));
        labels.push_back(ex.label);
    }
    TrainingResult r = weights_from_saliency(sal, labels);
    r.model.alpha = alpha;
    r.model.kernel_specs = kernel_specs;
    r.model.validate();
    return r;
}

/// Weighted mean of per-map saliencies (before post-processing), feature-grid resolution.
inline GridD weighted_map_saliency(const std::vector<GridD>& per_map, const std::vector<double>& weights) {
    if (per_map.size() != weights.size())
        throw ValidationError("model expects " + std::to_string(weights.size()) + " feature maps, got " +
                              std::to_string(per_map.size()));
    GridD acc(per_map.front().width(), per_map.front().height(), 0.0);
    for (std::size_t n = 0; n < per_map.size(); ++n)
        for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += weights[n] * per_map[n].data()[i];
    for (double& v : acc) v /= static_cast<double>(per_map.size());
    return acc;
}

/// Class-conditioned map at image resolution (out_width x out_height), in [0, 1].
///
/// The enhancement exponent is already inside each per-map term, so the
/// post-processing chain runs with alpha = 1 (center weight, blur, normalize).
inline SaliencyMap topdown_map(const FeatureMapStack& stack, const TopDownModel& model, const std::string& class_id,
                               int out_width, int out_height, PostProcessParams post = {}) {
    model.validate();
    const std::size_t row = model.class_index(class_id);
    const KernelStack kernel(model.kernel_specs);
    const GridD combined = weighted_map_saliency(raw_map_saliency(stack, kernel, model.alpha), model.weights[row]);
    post.alpha = 1.0;
    const SaliencyMap grid_map = post_process({combined, false}, post);
    GridD out(out_width, out_height);
    for (int y = 0; y < out_height; ++y)
        for (int x = 0; x < out_width; ++x)
            out(x, y) = std::max(0.0, sample_bilinear(grid_map.values, (x + 0.5) / stack.spatial_scale - 0.5,
                                                      (y + 0.5) / stack.spatial_scale - 0.5));
    normalize_max(out);
    return {std::move(out), true};
}

/// Elementwise product, renormalized to [0, 1].
inline SaliencyMap fuse(const SaliencyMap& bottom_up, const SaliencyMap& top_down) {
    if (bottom_up.width() != top_down.width() || bottom_up.height() != top_down.height())
        throw ValidationError("cannot fuse maps of different shapes");
    GridD v(bottom_up.width(), bottom_up.height());
    for (std::size_t i = 0; i < v.size(); ++i) v.data()[i] = bottom_up.values.data()[i] * top_down.values.data()[i];
    normalize_max(v);
    return {std::move(v), true};
}

struct SearchResult {
    CycleResult cycle;
    int saccades = 0;   ///< 1-based index of the first fixation on target
    bool found = false;  ///< false: saccades == max_fixations, flagged
};

/// IoU threshold for counting a fixation patch as on target.
inline constexpr double kTargetIou = 0.5;

/// Saccades until the first segmented patch overlaps `target` with IoU > 0.5.
inline SearchResult count_saccades(CycleResult cycle, const Box& target, int max_fixations) {
    SearchResult r;
    r.saccades = max_fixations;
    for (std::size_t i = 0; i < cycle.segments.size(); ++i)
        if (iou(cycle.segments[i].box, target) > kTargetIou) {
            r.saccades = static_cast<int>(i) + 1;
            r.found = true;
            break;
        }
    r.cycle = std::move(cycle);
    return r;
}

/// Bottom-up search on the working image.
inline SearchResult search_bottom_up(const RgbImage& working, const Box& target, const EngineConfig& config) {
    const SaliencyMap bu = post_process(
        channel_saliency(rgb_to_lab(working), config.saliency.stack, config.saliency.stride), config.saliency.post);
    return count_saccades(run_cycle_on_map(working, bu, config), target, config.max_fixations);
}

/// Fused bottom-up x top-down search on the working image.
inline SearchResult search(const RgbImage& working, const FeatureMapStack& features, const TopDownModel& model,
                           const std::string& class_id, const Box& target, const EngineConfig& config) {
    const SaliencyMap bu = post_process(
        channel_saliency(rgb_to_lab(working), config.saliency.stack, config.saliency.stride), config.saliency.post);
    const SaliencyMap td = topdown_map(features, model, class_id, working.width(), working.height(), config.saliency.post);
    return count_saccades(run_cycle_on_map(working, fuse(bu, td), config), target, config.max_fixations);
}

}  // namespace gsal
