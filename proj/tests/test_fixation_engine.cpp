#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "gsal/fixation_engine.hpp"
#include "support/scenes.hpp"

using namespace gsal;
namespace t = gsal::testing;

namespace {

SaliencyMap peaks_map(int w, int h, const std::vector<std::pair<Point, double>>& peaks) {
    GridD g(w, h, 0.0);
    for (auto [p, v] : peaks) g(p.x, p.y) = v;
    return {g, true};
}

RgbImage square_image(const std::vector<Point>& centers, int half, std::uint8_t gray = 230) {
    RgbImage img = t::blank();
    for (Point c : centers) t::paint(img, {c, half, t::Shape::Square, 1.0, gray}, gray, gray, gray);
    return img;
}

}  // namespace

TEST(NextFixation, SinglePeak) {
    const SaliencyMap m = peaks_map(50, 40, {{{10, 20}, 0.9}});
    const auto f = next_fixation(m, GridD(50, 40, 1.0), 0.2);
    ASSERT_TRUE(f);
    EXPECT_EQ(f->point, (Point{10, 20}));
    EXPECT_DOUBLE_EQ(f->saliency_value, 0.9);
}

TEST(NextFixation, BelowThresholdIsNone) {
    const SaliencyMap m{GridD(30, 30, 0.19), true};
    EXPECT_FALSE(next_fixation(m, GridD(30, 30, 1.0), 0.2));
    EXPECT_THROW(next_fixation(m, GridD(29, 30, 1.0), 0.2), ValidationError);
}

TEST(NextFixation, TiesResolveRowMajor) {
    const SaliencyMap m = peaks_map(30, 30, {{{20, 3}, 0.5}, {{4, 3}, 0.5}, {{1, 9}, 0.5}});
    EXPECT_EQ(next_fixation(m, GridD(30, 30, 1.0), 0.2)->point, (Point{4, 3}));
}

TEST(NextFixation, SecondPeakAfterInhibition) {
    const Point a{20, 20}, b{24, 22};
    const SaliencyMap m = peaks_map(60, 50, {{a, 0.9}, {b, 0.7}});
    GridD inh(60, 50, 1.0);
    const auto first = next_fixation(m, inh, 0.2);
    ASSERT_TRUE(first);
    EXPECT_EQ(first->point, a);
    inhibit(inh, *first, 13);
    // Oracle: suppression of each peak by the inverted Gaussian, sigma 6.5.
    auto suppressed = [&](Point p, double v) {
        const double d2 = std::pow(p.x - a.x, 2) + std::pow(p.y - a.y, 2);
        return v * (1 - 0.9 * std::exp(-d2 / (2 * 6.5 * 6.5)));
    };
    ASSERT_GT(suppressed(b, 0.7), suppressed(a, 0.9));
    ASSERT_GT(suppressed(b, 0.7), 0.2);
    const auto second = next_fixation(m, inh, 0.2);
    ASSERT_TRUE(second);
    EXPECT_EQ(second->point, b);
    EXPECT_NEAR(second->saliency_value, suppressed(b, 0.7), 1e-12);
}

TEST(Inhibit, AmplitudeLaw) {
    GridD inh(80, 80, 1.0);
    inhibit(inh, {{40, 40}, 1.0, {}, 0}, 10);
    EXPECT_EQ(inh(40, 40), 0.0);
    GridD half(80, 80, 1.0);
    inhibit(half, {{40, 40}, 0.5, {}, 0}, 10);
    EXPECT_DOUBLE_EQ(half(40, 40), 0.5);
    // sigma 5: beyond 4 sigma the change is tiny.
    EXPECT_LT(1.0 - half(40 + 21, 40), 1e-4);
    EXPECT_LT(1.0 - inh(0, 0), 1e-4);
}

TEST(InhibitProperty, MonotoneAndBounded) {
    GridD inh(64, 48, 1.0);
    GridD prev = inh;
    for (int i = 0; i < 12; ++i) {
        inhibit(inh, {{(i * 17) % 64, (i * 11) % 48}, 0.1 * i, {}, 0}, 5 + i);
        for (std::size_t k = 0; k < inh.size(); ++k) {
            ASSERT_LE(inh.data()[k], prev.data()[k]);
            ASSERT_GE(inh.data()[k], 0.0);
        }
        prev = inh;
    }
}

TEST(EstimateExtent, DiskRadiusTwelvePicksSmallestScale) {
    const LabImage lab = rgb_to_lab(t::disk_image(12, {100, 100}));
    const ExtentEstimate e = estimate_extent(lab, {100, 100}, toronto_stack());
    EXPECT_EQ(e.scale_index, 0);
    EXPECT_EQ(e.responses.size(), 3u);
    EXPECT_NEAR(e.box.width() / 2, 13, 2);
    EXPECT_TRUE(e.box.contains({100, 100}));
}

TEST(EstimateExtent, DiskRadiusThirtySixPicksLargestScale) {
    const LabImage lab = rgb_to_lab(t::disk_image(36, {100, 100}));
    const ExtentEstimate e = estimate_extent(lab, {100, 100}, toronto_stack());
    EXPECT_EQ(e.scale_index, 2);
    EXPECT_EQ(e.box, (Box{62, 62, 139, 139}));
}

TEST(EstimateExtent, PointFeaturePicksSmallestScale) {
    RgbImage img = t::blank(200, 200);
    img.set(100, 100, 255, 255, 255);
    const ExtentEstimate e = estimate_extent(rgb_to_lab(img), {100, 100}, toronto_stack());
    EXPECT_EQ(e.scale_index, 0);
    EXPECT_THROW(estimate_extent(rgb_to_lab(img), {200, 0}, toronto_stack()), ValidationError);
}

TEST(EstimateExtent, BoxClippedAtBorder) {
    const LabImage lab = rgb_to_lab(t::disk_image(6, {5, 5}));
    const ExtentEstimate e = estimate_extent(lab, {5, 5}, toronto_stack());
    EXPECT_EQ(e.box.x0, 0);
    EXPECT_EQ(e.box.y0, 0);
}

TEST(Otsu, SplitsBimodalValues) {
    std::vector<double> v(100, 0.1);
    v.insert(v.end(), 50, 0.9);
    const auto th = otsu_threshold(v);
    ASSERT_TRUE(th);
    EXPECT_GT(*th, 0.1);
    EXPECT_LE(*th, 0.9);
    EXPECT_FALSE(otsu_threshold(std::vector<double>(10, 0.4)));
    EXPECT_FALSE(otsu_threshold({}));
}

TEST(LabelComponents, EightConnectivity) {
    Mask m(5, 5, 0);
    m(0, 0) = m(1, 1) = m(2, 2) = 1;
    m(4, 0) = 1;
    int count = 0;
    const Grid<int> l = label_components(m, count);
    EXPECT_EQ(count, 2);
    EXPECT_EQ(l(0, 0), l(2, 2));
    EXPECT_NE(l(0, 0), l(4, 0));
}

TEST(RefineAndSegment, IsolatedSquareTightBox) {
    const Point c{80, 60};
    const RgbImage img = square_image({c}, 8);
    const LabImage lab = rgb_to_lab(img);
    const Segmentation s = refine_and_segment(img, lab, c, Box::around(c, 13), toronto_stack());
    const Box truth = Box::around(c, 8);
    EXPECT_FALSE(s.fallback);
    EXPECT_LE(std::abs(s.box.x0 - truth.x0), 2);
    EXPECT_LE(std::abs(s.box.y0 - truth.y0), 2);
    EXPECT_LE(std::abs(s.box.x1 - truth.x1), 2);
    EXPECT_LE(std::abs(s.box.y1 - truth.y1), 2);
    EXPECT_EQ(s.patch.width(), s.box.width());
    EXPECT_EQ(s.mask.width(), s.box.width());
    EXPECT_EQ(s.mask(c.x - s.box.x0, c.y - s.box.y0), 1);
}

TEST(RefineAndSegment, ExcludesSecondObject) {
    const Point a{70, 60}, b{96, 60};
    const RgbImage img = square_image({a, b}, 6);
    const Segmentation s = refine_and_segment(img, rgb_to_lab(img), a, Box::around(a, 38), toronto_stack());
    EXPECT_FALSE(s.box.contains(b));
    EXPECT_TRUE(s.box.contains(a));
    EXPECT_LT(s.box.x1, b.x - 6);
}

TEST(RefineAndSegment, UniformPatchFallsBack) {
    const RgbImage img = t::blank();
    const Box ext = Box::around({80, 60}, 13);
    const Segmentation s = refine_and_segment(img, rgb_to_lab(img), {80, 60}, ext, toronto_stack());
    EXPECT_TRUE(s.fallback);
    EXPECT_EQ(s.box, ext);
    EXPECT_TRUE(std::all_of(s.mask.begin(), s.mask.end(), [](auto v) { return v == 1; }));
    EXPECT_THROW(refine_and_segment(img, rgb_to_lab(img), {0, 0}, ext, toronto_stack()), ValidationError);
}

TEST(MakeScan, ZigzagRasterOrder) {
    const RgbImage patch = t::disk_image(10, {20, 20}, 40, 40);
    const ScanSequence s = make_scan(patch, PathKind::Zigzag, 5, 16, 16);
    ASSERT_EQ(s.frames.size(), 5u);
    ASSERT_EQ(s.centers.size(), 5u);
    for (std::size_t i = 1; i < s.centers.size(); ++i) {
        const Point p = s.centers[i - 1], q = s.centers[i];
        EXPECT_TRUE(q.y > p.y || (q.y == p.y && q.x > p.x)) << i;
    }
    EXPECT_EQ(s.centers.front(), (Point{8, 8}));
    for (const auto& f : s.frames) {
        EXPECT_EQ(f.width(), 16);
        EXPECT_EQ(f.height(), 16);
    }
}

TEST(MakeScan, CircularClosure) {
    const RgbImage patch(48, 48, 0);
    const ScanSequence s = make_scan(patch, PathKind::Circular, 7, 16, 16);
    const Point mid{24, 24};
    EXPECT_NEAR(distance(s.centers.front(), mid), distance(s.centers.back(), mid), 1.0);
}

TEST(MakeScan, FrameCropsMatchPatch) {
    RgbImage patch(30, 20);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 30; ++x) patch.set(x, y, static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y), 0);
    const ScanSequence s = make_scan(patch, PathKind::Zigzag, 4, 10, 10);
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
        const Point c = s.centers[i];
        EXPECT_EQ(s.frames[i].at(0, 0, 0), c.x - 5);
        EXPECT_EQ(s.frames[i].at(0, 0, 1), c.y - 5);
    }
}

TEST(MakeScan, DeterministicAndErrors) {
    const RgbImage patch = t::disk_image(10, {20, 20}, 40, 40);
    const ScanSequence a = make_scan(patch, PathKind::Circular, 5, 16, 16);
    const ScanSequence b = make_scan(patch, PathKind::Circular, 5, 16, 16);
    for (std::size_t i = 0; i < a.frames.size(); ++i) EXPECT_EQ(a.frames[i].pixels(), b.frames[i].pixels());
    EXPECT_THROW(make_scan(patch, PathKind::Zigzag, 5, 41, 16), ValidationError);
    EXPECT_THROW(make_scan(patch, PathKind::Zigzag, 0, 16, 16), ValidationError);
    EXPECT_EQ(parse_path_kind("circular"), PathKind::Circular);
    EXPECT_THROW(parse_path_kind("spiral"), ValidationError);
}

TEST(RunCycle, OneDiskOneFixation) {
    const RgbImage img = t::disk_image(9, {50, 40}, 171, 128);
    const CycleResult r = run_cycle(img, {});
    ASSERT_EQ(r.trace.fixations.size(), 1u);
    EXPECT_EQ(r.trace.stop_reason, StopReason::Featureless);
    EXPECT_LE(distance(r.trace.fixations[0].point, {50, 40}), 3.0);
    EXPECT_EQ(r.trace.start, (Point{85, 64}));
    EXPECT_EQ(r.segments.size(), 1u);
    EXPECT_EQ(r.scans.size(), 1u);
    EXPECT_EQ(r.scans[0].frames.size(), 5u);
}

TEST(RunCycle, DescendingBrightnessOrder) {
    RgbImage img = t::blank();
    const std::vector<std::pair<Point, std::uint8_t>> disks{{{40, 40}, 190}, {{130, 45}, 240}, {{85, 100}, 215}};
    for (auto [c, g] : disks) t::paint(img, {c, 8, t::Shape::Disk, 1.0, g}, g, g, g);
    // Oracle: rank by the post-processed peak inside each disk.
    const SaliencyMap m = compute_saliency(img, {});
    std::vector<double> peak;
    for (auto [c, g] : disks) {
        double best = 0;
        for (int y = c.y - 8; y <= c.y + 8; ++y)
            for (int x = c.x - 8; x <= c.x + 8; ++x) best = std::max(best, m.values(x, y));
        peak.push_back(best);
    }
    std::vector<int> expected(3);
    std::iota(expected.begin(), expected.end(), 0);
    std::sort(expected.begin(), expected.end(), [&](int i, int j) { return peak[static_cast<std::size_t>(i)] > peak[static_cast<std::size_t>(j)]; });
    EXPECT_EQ(expected, (std::vector<int>{1, 2, 0}));

    const CycleResult r = run_cycle(img, {});
    ASSERT_EQ(r.trace.fixations.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i)
        EXPECT_LE(distance(r.trace.fixations[i].point, disks[static_cast<std::size_t>(expected[i])].first), 8.0) << i;
}

TEST(RunCycle, BlankImageHasNoFixations) {
    const CycleResult r = run_cycle(t::blank(), {});
    EXPECT_TRUE(r.trace.fixations.empty());
    EXPECT_EQ(r.trace.stop_reason, StopReason::Featureless);
}

TEST(RunCycle, MaxFixationsStop) {
    EngineConfig c;
    c.max_fixations = 2;
    c.theta = 0.01;
    std::uint64_t seed = 11;
    while (t::make_contrast_scene(seed).objects.size() < 3) ++seed;
    const CycleResult r = run_cycle(t::make_contrast_scene(seed).image, c);
    EXPECT_EQ(r.trace.fixations.size(), 2u);
    EXPECT_EQ(r.trace.stop_reason, StopReason::MaxFixations);
}

TEST(RunCycle, ConfigValidation) {
    EngineConfig c;
    c.theta = 0;
    EXPECT_THROW(run_cycle(t::blank(), c), ValidationError);
    c = {};
    c.max_fixations = 0;
    EXPECT_THROW(run_cycle(t::blank(), c), ValidationError);
}

TEST(RunCycle, FoveatedCycleRuns) {
    EngineConfig c;
    c.foveate = true;
    c.foveation.levels = 5;
    const CycleResult r = run_cycle(t::disk_image(9, {50, 40}, 171, 128), c);
    ASSERT_GE(r.trace.fixations.size(), 1u);
    EXPECT_LE(distance(r.trace.fixations[0].point, {50, 40}), 4.0);
}

TEST(RunCycleProperty, NoRevisitAndDeterminism) {
    EngineConfig c;
    c.theta = 0.02;
    c.max_fixations = 12;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const RgbImage img = t::make_contrast_scene(seed).image;
        const CycleResult a = run_cycle(img, c);
        const CycleResult b = run_cycle(img, c);
        ASSERT_EQ(a.trace.fixations.size(), b.trace.fixations.size());
        for (std::size_t i = 0; i < a.trace.fixations.size(); ++i) {
            EXPECT_EQ(a.trace.fixations[i].point, b.trace.fixations[i].point);
            EXPECT_EQ(a.trace.fixations[i].saliency_value, b.trace.fixations[i].saliency_value);
            for (std::size_t j = 0; j < i; ++j) {
                const auto& fj = a.trace.fixations[j];
                const double fovea = c.saliency.stack.scale_radius(static_cast<std::size_t>(fj.scale_index));
                EXPECT_GT(distance(a.trace.fixations[i].point, fj.point), fovea) << seed << " " << i << " " << j;
            }
        }
        EXPECT_EQ(a.trace.inhibition, b.trace.inhibition);
        for (double v : a.trace.inhibition) {
            ASSERT_GE(v, 0.0);
            ASSERT_LE(v, 1.0);
        }
    }
}

TEST(RunCycleProperty, SaliencyValuesNonIncreasingWithoutOverlap) {
    // Objects far apart do not inhibit each other, so peak values come out in order.
    for (std::uint64_t seed = 20; seed < 26; ++seed) {
        const CycleResult r = run_cycle(t::make_contrast_scene(seed).image, {});
        for (std::size_t i = 1; i < r.trace.fixations.size(); ++i)
            EXPECT_LE(r.trace.fixations[i].saliency_value, r.trace.fixations[i - 1].saliency_value + 1e-12);
    }
}
