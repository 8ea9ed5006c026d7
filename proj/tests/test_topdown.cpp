#include <gtest/gtest.h>

#include <random>

#include "gsal/topdown.hpp"
#include "support/scenes.hpp"

using namespace gsal;
namespace t = gsal::testing;

namespace {

GridD random_map(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    GridD g(w, h);
    for (double& v : g) v = u(rng);
    return g;
}

FeatureMapStack stack_of(std::vector<GridD> maps) {
    FeatureMapStack s;
    s.maps = std::move(maps);
    return s;
}

KernelStack small_stack() { return KernelStack(make_specs(std::vector<int>{1, 5}, std::vector<double>{1, 1})); }

TopDownModel model_with(std::vector<double> weights, double alpha = 2.0) {
    TopDownModel m;
    m.classes = {"a"};
    m.weights = {std::move(weights)};
    m.alpha = alpha;
    m.kernel_specs = small_stack().specs();
    return m;
}

PostProcessParams plain_post() {
    PostProcessParams p;
    p.center_sigma = 1e12;
    p.blur_sigma = 1e-3;
    return p;
}

}  // namespace

TEST(RawMapSaliency, ConstantMapIsNearZero) {
    const auto r = raw_map_saliency(stack_of({GridD(60, 50, 3.0)}), toronto_stack().without_largest_scale(), 1.0);
    EXPECT_LT(max_value(r[0]), 1e-9);
}

TEST(RawMapSaliency, DeltaGivesPoweredKernel) {
    GridD m(41, 41, 0.0);
    m(20, 20) = 1.0;
    const KernelStack k = small_stack();
    const auto r = raw_map_saliency(stack_of({m}), k, 2.0);
    const int rad = k.radius();
    for (int dy = -rad; dy <= rad; ++dy)
        for (int dx = -rad; dx <= rad; ++dx)
            EXPECT_NEAR(r[0](20 + dx, 20 + dy), std::pow(std::abs(k.realized()(rad + dx, rad + dy)), 2.0), 1e-15);
}

TEST(RawMapSaliency, SquareRelationExact) {
    const FeatureMapStack s = stack_of({random_map(50, 40, 1), random_map(50, 40, 2)});
    const auto one = raw_map_saliency(s, small_stack(), 1.0);
    const auto two = raw_map_saliency(s, small_stack(), 2.0);
    for (std::size_t n = 0; n < 2; ++n)
        for (std::size_t i = 0; i < one[n].size(); ++i) ASSERT_DOUBLE_EQ(two[n].data()[i], one[n].data()[i] * one[n].data()[i]);
}

TEST(RawMapSaliency, Errors) {
    EXPECT_THROW(raw_map_saliency(stack_of({GridD(30, 30, 0), GridD(31, 30, 0)}), small_stack(), 1), ValidationError);
    EXPECT_THROW(raw_map_saliency(stack_of({}), small_stack(), 1), ValidationError);
    EXPECT_THROW(raw_map_saliency(stack_of({GridD(30, 30, 0)}), small_stack(), 0.5), ValidationError);
    GridD bad(30, 30, 0);
    bad(1, 1) = std::nan("");
    EXPECT_THROW(raw_map_saliency(stack_of({bad}), small_stack(), 1), ValidationError);
}

TEST(WeightsFromSaliency, UniformMapGivesOne) {
    const auto r = weights_from_saliency({{GridD(20, 20, 0.7)}}, {{"img", "a", {5, 5, 10, 10}}});
    EXPECT_NEAR(r.model.weights[0][0], 1.0, 1e-12);
    EXPECT_TRUE(r.floored.empty());
}

TEST(WeightsFromSaliency, InsideOnlyIsFlooredAndLargest) {
    GridD inside(20, 20, 0.0);
    for (int y = 5; y < 10; ++y)
        for (int x = 5; x < 10; ++x) inside(x, y) = 2.0;
    const auto r = weights_from_saliency({{inside, GridD(20, 20, 0.7)}}, {{"img", "a", {5, 5, 10, 10}}});
    EXPECT_DOUBLE_EQ(r.model.weights[0][0], 2.0 / (kOutsideFloor * 2.0));
    EXPECT_GT(r.model.weights[0][0], r.model.weights[0][1]);
    ASSERT_EQ(r.floored.size(), 1u);
    EXPECT_EQ(r.floored[0].image_id, "img");
    EXPECT_EQ(r.floored[0].map_index, 0u);
}

TEST(WeightsFromSaliency, MeanOverImages) {
    auto with_ratio = [](double ratio) {
        GridD g(10, 10, 1.0);
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 5; ++x) g(x, y) = ratio;
        return g;
    };
    const auto r = weights_from_saliency({{with_ratio(2)}, {with_ratio(4)}, {with_ratio(9)}},
                                         {{"i1", "a", {0, 0, 5, 5}}, {"i2", "a", {0, 0, 5, 5}}, {"i3", "b", {0, 0, 5, 5}}});
    ASSERT_EQ(r.model.classes, (std::vector<std::string>{"a", "b"}));
    EXPECT_DOUBLE_EQ(r.model.weights[0][0], 3.0);
    EXPECT_DOUBLE_EQ(r.model.weights[1][0], 9.0);
}

TEST(WeightsFromSaliency, Errors) {
    EXPECT_THROW(weights_from_saliency({}, {}), ValidationError);
    EXPECT_THROW(weights_from_saliency({{GridD(10, 10, 1)}}, {{"i", "a", {0, 0, 10, 10}}}), ValidationError);
    EXPECT_THROW(weights_from_saliency({{GridD(10, 10, 1)}}, {{"i", "a", {3, 3, 3, 8}}}), ValidationError);
}

TEST(LearnWeights, BoxOutsideGridRejected) {
    TrainingExample ex{stack_of({random_map(40, 40, 3)}), {"i", "a", {30, 30, 45, 45}}};
    EXPECT_THROW(learn_weights({ex}, small_stack().specs(), 2.0), ValidationError);
}

TEST(LearnWeights, DisjointSupportsSeparateClasses) {
    const TrainingResult r = learn_weights(t::search_training_set(11, 6), toronto_stack().specs(), 5.0);
    ASSERT_EQ(r.model.classes.size(), 2u);
    const auto& target = r.model.weights[r.model.class_index("target")];
    const auto& distractor = r.model.weights[r.model.class_index("distractor")];
    EXPECT_GT(std::min(target[0], target[1]), 100 * std::max(target[2], target[3]));
    EXPECT_GT(std::min(distractor[2], distractor[3]), 10 * std::max(distractor[0], distractor[1]));
    EXPECT_EQ(r.model.alpha, 5.0);
    EXPECT_EQ(r.model.kernel_specs.size(), 6u);
}

TEST(TopDownMap, EqualWeightsGiveMeanMap) {
    const FeatureMapStack s = stack_of({random_map(48, 40, 4), random_map(48, 40, 5), random_map(48, 40, 6)});
    const SaliencyMap m = topdown_map(s, model_with({2, 2, 2}), "a", 48, 40, plain_post());
    const auto per = raw_map_saliency(s, small_stack(), 2.0);
    GridD mean(48, 40, 0.0);
    for (const auto& g : per)
        for (std::size_t i = 0; i < mean.size(); ++i) mean.data()[i] += g.data()[i] / 3.0;
    normalize_max(mean);
    for (std::size_t i = 0; i < mean.size(); ++i) ASSERT_NEAR(m.values.data()[i], mean.data()[i], 1e-9);
}

TEST(TopDownMap, OneHotSelectsMap) {
    const FeatureMapStack s = stack_of({random_map(48, 40, 7), random_map(48, 40, 8)});
    const SaliencyMap m = topdown_map(s, model_with({0, 1}), "a", 48, 40);
    const FeatureMapStack only = stack_of({s.maps[1]});
    const SaliencyMap ref = topdown_map(only, model_with({1}), "a", 48, 40);
    for (std::size_t i = 0; i < ref.values.size(); ++i) ASSERT_NEAR(m.values.data()[i], ref.values.data()[i], 1e-12);
}

TEST(TopDownMap, ClassArgmaxInsideItsRegion) {
    const t::SearchScene sc = t::make_search_scene(42);
    TopDownModel model;
    model.classes = {"A", "B"};
    model.weights = {{1, 1, 0, 0}, {0, 0, 1, 1}};
    model.kernel_specs = toronto_stack().specs();
    const SaliencyMap a = topdown_map(sc.features, model, "A", t::kSceneWidth, t::kSceneHeight);
    EXPECT_TRUE(sc.target.box().contains(argmax(a.values)));
    const SaliencyMap b = topdown_map(sc.features, model, "B", t::kSceneWidth, t::kSceneHeight);
    bool in_distractor = false;
    for (const auto& d : sc.distractors) in_distractor = in_distractor || d.box().contains(argmax(b.values));
    EXPECT_TRUE(in_distractor);
    EXPECT_THROW(topdown_map(sc.features, model, "C", t::kSceneWidth, t::kSceneHeight), ValidationError);
}

TEST(TopDownMap, UpsamplesCoarseGrid) {
    FeatureMapStack s = stack_of({random_map(40, 32, 9)});
    s.spatial_scale = 4.0;
    const SaliencyMap m = topdown_map(s, model_with({1}), "a", 160, 128);
    EXPECT_EQ(m.width(), 160);
    EXPECT_DOUBLE_EQ(max_value(m.values), 1.0);
}

TEST(TopDownModel, Validation) {
    TopDownModel m = model_with({0, 0});
    EXPECT_THROW(m.validate(), ValidationError);
    m = model_with({-1, 2});
    EXPECT_THROW(m.validate(), ValidationError);
    m = model_with({1}, 0.5);
    EXPECT_THROW(m.validate(), ValidationError);
    EXPECT_NO_THROW(model_with({0, 1}).validate());
}

TEST(Fuse, ConstantTopDownKeepsArgmax) {
    const SaliencyMap bu{random_map(30, 20, 10), true};
    const SaliencyMap f = fuse(bu, {GridD(30, 20, 1.0), true});
    EXPECT_EQ(argmax(f.values), argmax(bu.values));
    EXPECT_DOUBLE_EQ(max_value(f.values), 1.0);
}

TEST(Fuse, ZeroOutsideRegionConfinesMass) {
    const SaliencyMap bu{random_map(30, 20, 11), true};
    GridD td(30, 20, 0.0);
    const Box region{5, 5, 12, 10};
    for (int y = region.y0; y < region.y1; ++y)
        for (int x = region.x0; x < region.x1; ++x) td(x, y) = 0.5;
    const SaliencyMap f = fuse(bu, {td, true});
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 30; ++x)
            if (!region.contains({x, y})) {
                ASSERT_EQ(f.values(x, y), 0.0);
            }
    EXPECT_GT(sum(f.values), 0.0);
    EXPECT_THROW(fuse(bu, {GridD(31, 20, 1.0), true}), ValidationError);
}

TEST(Fuse, TopDownRatioOvercomesBottomUpGap) {
    GridD bu(20, 20, 0.0), td(20, 20, 0.0);
    const Point target{4, 4}, distractor{15, 15};
    bu(target.x, target.y) = 0.6;
    bu(distractor.x, distractor.y) = 0.9;
    td(target.x, target.y) = 1.0;
    td(distractor.x, distractor.y) = 0.5;  // 2x ratio beats the 1.5x gap
    EXPECT_EQ(argmax(fuse({bu, true}, {td, true}).values), target);
}

TEST(Search, TopDownBeatsBottomUpInClutter) {
    const TrainingResult tr = learn_weights(t::search_training_set(11, 6), toronto_stack().specs(), 5.0);
    const EngineConfig cfg;
    for (std::uint64_t seed : {5000u, 5001u, 5002u}) {
        const t::SearchScene sc = t::make_search_scene(seed);
        const SearchResult bu = search_bottom_up(sc.image, sc.target.box(), cfg);
        const SearchResult td = search(sc.image, sc.features, tr.model, "target", sc.target.box(), cfg);
        EXPECT_TRUE(td.found);
        EXPECT_LT(td.saccades, bu.saccades) << seed;
    }
}

TEST(Search, SalientTargetFoundByBoth) {
    t::SearchScene sc = t::make_search_scene(77, 0);
    TopDownModel model;
    model.classes = {"target"};
    model.weights = {{1, 1, 0, 0}};
    model.kernel_specs = toronto_stack().specs();
    const EngineConfig cfg;
    const SearchResult bu = search_bottom_up(sc.image, sc.target.box(), cfg);
    const SearchResult td = search(sc.image, sc.features, model, "target", sc.target.box(), cfg);
    EXPECT_EQ(bu.saccades, 1);
    EXPECT_EQ(td.saccades, 1);
}

TEST(Search, OneHotOnTargetMapFindsItFirst) {
    const t::SearchScene sc = t::make_search_scene(78);
    TopDownModel model;
    model.classes = {"target"};
    model.weights = {{1, 0, 0, 0}};
    model.kernel_specs = toronto_stack().specs();
    const SearchResult td = search(sc.image, sc.features, model, "target", sc.target.box(), {});
    EXPECT_TRUE(td.found);
    EXPECT_EQ(td.saccades, 1);
}

TEST(Search, NotFoundReportsMaxFixations) {
    CycleResult empty;
    const SearchResult r = count_saccades(empty, {0, 0, 5, 5}, 30);
    EXPECT_FALSE(r.found);
    EXPECT_EQ(r.saccades, 30);
}
