#pragma once

#include <chrono>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "gsal/color.hpp"
#include "gsal/error.hpp"
#include "gsal/records.hpp"
#include "gsal/saliency.hpp"

namespace gsal {

struct StageTiming {
    std::string stage;
    double mean_s = 0.0;
    double stddev_s = 0.0;
    int repetitions = 0;
};

struct BenchReport {
    std::vector<StageTiming> stages;  ///< colorspace, convolution, postprocess
    double total_mean_s = 0.0;
    int width = 0;
    int height = 0;
};

namespace detail {

inline StageTiming summarize(const std::string& name, const std::vector<double>& samples) {
    StageTiming t{name, 0.0, 0.0, static_cast<int>(samples.size())};
    for (double s : samples) t.mean_s += s;
    t.mean_s /= static_cast<double>(samples.size());
    double var = 0;
    for (double s : samples) var += (s - t.mean_s) * (s - t.mean_s);
    t.stddev_s = samples.size() > 1 ? std::sqrt(var / static_cast<double>(samples.size() - 1)) : 0.0;
    return t;
}

}  // namespace detail

/// Per-stage wall clock over `repetitions` timed runs per image, after one
/// untimed warmup run per image.
inline BenchReport bench_saliency(const std::vector<RgbImage>& images, const SaliencyParams& params, int repetitions) {
    if (repetitions < 1) throw ValidationError("repetitions must be >= 1");
    if (images.empty()) throw ValidationError("benchmark needs at least one image");
    using clock = std::chrono::steady_clock;
    auto secs = [](clock::duration d) { return std::chrono::duration<double>(d).count(); };
    std::vector<double> color, conv, post, total;
    BenchReport report;
    for (const auto& image : images) {
        const RgbImage working = to_working_resolution(image, params.resize);
        report.width = working.width();
        report.height = working.height();
        for (int rep = 0; rep <= repetitions; ++rep) {
            const auto t0 = clock::now();
            const LabImage lab = rgb_to_lab(working);
            const auto t1 = clock::now();
            const SaliencyMap raw = channel_saliency(lab, params.stack, params.stride);
            const auto t2 = clock::now();
            const SaliencyMap out = post_process(raw, params.post);
            const auto t3 = clock::now();
            if (out.values.empty()) throw std::logic_error("empty saliency output");
            if (rep == 0) continue;
            color.push_back(secs(t1 - t0));
            conv.push_back(secs(t2 - t1));
            post.push_back(secs(t3 - t2));
            total.push_back(secs(t3 - t0));
        }
    }
    report.stages = {detail::summarize("colorspace", color), detail::summarize("convolution", conv),
                     detail::summarize("postprocess", post)};
    report.total_mean_s = detail::summarize("total", total).mean_s;
    return report;
}

inline std::string format_bench_csv(const BenchReport& r) {
    std::ostringstream s;
    s << "# width=" << r.width << "\n# height=" << r.height << "\n";
    s << "stage,mean_s,stddev_s,repetitions\n";
    for (const auto& t : r.stages)
        s << t.stage << ',' << format_double(t.mean_s) << ',' << format_double(t.stddev_s) << ',' << t.repetitions << '\n';
    s << "total," << format_double(r.total_mean_s) << ",," << (r.stages.empty() ? 0 : r.stages.front().repetitions) << '\n';
    return s.str();
}

}  // namespace gsal
