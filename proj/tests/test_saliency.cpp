#include <gtest/gtest.h>

#include <random>

#include "gsal/saliency.hpp"
#include "support/scenes.hpp"

using namespace gsal;
using gsal::testing::disk_image;

namespace {

// Oracle: per-pixel direct convolution of each Lab channel, no FFT.
GridD direct_raw(const LabImage& lab, const KernelStack& s) {
    GridD out(lab.width(), lab.height(), 0.0);
    for (int c = 0; c < 3; ++c) {
        const GridD r = convolve_direct(lab.channel(c), s.realized());
        for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += std::abs(r.data()[i]) / 3.0;
    }
    return out;
}

PostProcessParams identity_post() {
    PostProcessParams p;
    p.alpha = 1.0;
    p.center_sigma = 1e12;
    p.blur_sigma = 1e-3;
    return p;
}

RgbImage noise_image(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> u(0, 255);
    RgbImage img(w, h);
    for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(u(rng));
    return img;
}

}  // namespace

TEST(ChannelSaliency, UniformGrayIsZero) {
    for (auto [w, h] : std::vector<std::pair<int, int>>{{171, 128}, {140, 200}}) {
        const SaliencyMap m = channel_saliency(rgb_to_lab(RgbImage(w, h, 119)), toronto_stack());
        EXPECT_LT(max_value(m.values), 1e-6);
        EXPECT_FALSE(m.post_processed);
    }
}

TEST(ChannelSaliency, DiskPeakMatchesDirectOracle) {
    const RgbImage img = disk_image(10, {40, 60}, 171, 128);
    const LabImage lab = rgb_to_lab(img);
    const KernelStack s = toronto_stack();
    const SaliencyMap fast = channel_saliency(lab, s);
    const GridD oracle = direct_raw(lab, s);
    const Point p = argmax(fast.values);
    const Point q = argmax(oracle);
    EXPECT_LE(distance(p, {40, 60}), 3.0);
    EXPECT_LE(distance(q, {40, 60}), 3.0);
    for (std::size_t i = 0; i < oracle.size(); ++i) ASSERT_NEAR(fast.values.data()[i], oracle.data()[i], 1e-6);
}

TEST(ChannelSaliency, DeltaGivesAbsoluteKernel) {
    // White pixel on black: Lab is (100, ~0, ~0) at the pixel and 0 elsewhere.
    RgbImage img(161, 161, 0);
    img.set(80, 80, 255, 255, 255);
    const KernelStack s = toronto_stack();
    const SaliencyMap m = channel_saliency(rgb_to_lab(img), s, 1, ConvolutionMethod::Direct);
    const auto white = srgb_to_lab(255, 255, 255);
    const double amp = (std::abs(white[0]) + std::abs(white[1]) + std::abs(white[2])) / 3.0;
    const int r = s.radius();
    for (int dy = -r; dy <= r; dy += 7)
        for (int dx = -r; dx <= r; dx += 7)
            EXPECT_NEAR(m.values(80 + dx, 80 + dy), amp * std::abs(s.realized()(r + dx, r + dy)), 1e-9);
}

TEST(ChannelSaliency, KernelLargerThanImageRejected) {
    EXPECT_THROW(channel_saliency(rgb_to_lab(RgbImage(100, 60, 10)), toronto_stack()), ValidationError);
    EXPECT_THROW(channel_saliency(rgb_to_lab(RgbImage(171, 128, 10)), toronto_stack(), 0), ValidationError);
}

TEST(ChannelSaliency, StrideApproximatesFullResolution) {
    const LabImage lab = rgb_to_lab(disk_image(10, {80, 64}, 171, 128));
    const SaliencyMap full = channel_saliency(lab, toronto_stack());
    const SaliencyMap coarse = channel_saliency(lab, toronto_stack(), 4);
    EXPECT_EQ(coarse.width(), 171);
    EXPECT_LE(distance(argmax(coarse.values), argmax(full.values)), 4.0);
    for (int y = 0; y < 128; y += 4)
        for (int x = 0; x < 171; x += 4) EXPECT_NEAR(coarse.values(x, y), full.values(x, y), 1e-9);
}

TEST(PostProcess, ConstantRawFollowsCenterWeight) {
    const SaliencyMap raw{GridD(171, 128, 0.3), false};
    const SaliencyMap out = post_process(raw, {});
    EXPECT_TRUE(out.post_processed);
    EXPECT_EQ(argmax(out.values), (Point{85, 63}));
    EXPECT_DOUBLE_EQ(max_value(out.values), 1.0);
    // Ratio to the center weight is flat away from the border.
    const GridD w = center_weight(171, 128, 0.25 * 128);
    const double ref = out.values(85, 63) / w(85, 63);
    for (int y = 20; y < 108; y += 9)
        for (int x = 20; x < 151; x += 9) EXPECT_NEAR(out.values(x, y) / w(x, y), ref, 1e-3 * ref);
}

TEST(PostProcess, IdentityLimits) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 2);
    GridD g(40, 30);
    for (double& v : g) v = u(rng);
    const SaliencyMap out = post_process({g, false}, identity_post());
    const double m = max_value(g);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(out.values.data()[i], g.data()[i] / m, 1e-12);
}

TEST(PostProcess, CentralPeakBeatsCornerPeak) {
    GridD g(171, 128, 0.0);
    g(85, 63) = 1.0;
    g(10, 10) = 1.0;
    const SaliencyMap out = post_process({g, false}, {});
    EXPECT_GT(out.values(85, 63), out.values(10, 10));
    EXPECT_EQ(argmax(out.values), (Point{85, 63}));
}

TEST(PostProcess, Errors) {
    const SaliencyMap raw{GridD(20, 20, 1.0), false};
    PostProcessParams p;
    p.alpha = 0.5;
    EXPECT_THROW(post_process(raw, p), ValidationError);
    const SaliencyMap done = post_process(raw, {});
    EXPECT_THROW(post_process(done, {}), ValidationError);
}

TEST(PostProcess, ZeroMapStaysZero) {
    const SaliencyMap out = post_process({GridD(50, 40, 0.0), false}, {});
    EXPECT_EQ(max_value(out.values), 0.0);
}

TEST(ComputeSaliency, DefaultsGiveWorkingResolution) {
    const SaliencyMap m = compute_saliency(noise_image(681, 511, 1), {});
    EXPECT_EQ(m.width(), 171);
    EXPECT_EQ(m.height(), 128);
    EXPECT_TRUE(m.post_processed);
    EXPECT_DOUBLE_EQ(max_value(m.values), 1.0);
    EXPECT_GE(min_value(m.values), 0.0);
}

TEST(ComputeSaliency, DiskArgmaxInsideDisk) {
    const SaliencyMap m = compute_saliency(disk_image(20, {130, 90}, 342, 256), {});
    // Disk center in the 171x128 frame is (65, 45), radius 10.
    EXPECT_LE(distance(argmax(m.values), {65, 45}), 10.0);
}

TEST(ComputeSaliency, OneColorImageHasNoFeatures) {
    const SaliencyMap m = compute_saliency(RgbImage(300, 200, 90), {});
    EXPECT_EQ(max_value(m.values), 0.0);
}

TEST(ChannelSaliencyProperty, TranslationEquivariance) {
    const KernelStack s = toronto_stack();
    const SaliencyMap a = channel_saliency(rgb_to_lab(disk_image(8, {80, 64}, 171, 128)), s);
    const SaliencyMap b = channel_saliency(rgb_to_lab(disk_image(8, {90, 60}, 171, 128)), s);
    // Compare away from borders where the replicate padding differs.
    for (int y = 30; y < 90; ++y)
        for (int x = 40; x < 120; ++x) ASSERT_NEAR(a.values(x, y), b.values(x + 10, y - 4), 1e-6);
}

TEST(ChannelSaliencyProperty, NonNegativeAndMirrorSymmetric) {
    const KernelStack s = toronto_stack();
    const RgbImage img = noise_image(140, 140, 9);
    RgbImage flipped(140, 140);
    for (int y = 0; y < 140; ++y)
        for (int x = 0; x < 140; ++x)
            for (int c = 0; c < 3; ++c) flipped.at(139 - x, y, c) = img.at(x, y, c);
    const SaliencyMap a = channel_saliency(rgb_to_lab(img), s);
    const SaliencyMap b = channel_saliency(rgb_to_lab(flipped), s);
    for (int y = 0; y < 140; ++y)
        for (int x = 0; x < 140; ++x) {
            ASSERT_GE(a.values(x, y), 0.0);
            ASSERT_NEAR(a.values(x, y), b.values(139 - x, y), 1e-8);
        }
}

TEST(PostProcessProperty, OutputInUnitRangeWithMaxOne) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0, 5);
        GridD g(60 + static_cast<int>(seed), 45);
        for (double& v : g) v = u(rng);
        const SaliencyMap out = post_process({g, false}, {});
        EXPECT_DOUBLE_EQ(max_value(out.values), 1.0);
        EXPECT_GE(min_value(out.values), 0.0);
    }
}

TEST(PostProcessProperty, ScaleInvariance) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 1);
    GridD g(64, 48), h(64, 48);
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.data()[i] = u(rng);
        h.data()[i] = 7.5 * g.data()[i];
    }
    const SaliencyMap a = post_process({g, false}, {});
    const SaliencyMap b = post_process({h, false}, {});
    for (std::size_t i = 0; i < g.size(); ++i) ASSERT_NEAR(a.values.data()[i], b.values.data()[i], 1e-12);
}
