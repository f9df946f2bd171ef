#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "helpers.hpp"
#include "tarseg/errors.hpp"
#include "tarseg/ops.hpp"
#include "tarseg/pyramid.hpp"
#include "tarseg/rng.hpp"
#include "tarseg/tensor_io.hpp"

using namespace tarseg;
using testutil::bit_equal;
using testutil::max_abs_diff;
using testutil::normal_tensor;
using testutil::to_vec;
using testutil::uniform_tensor;

TEST_CASE("pyramid levels have the documented shapes") {
    Rng rng(101);
    const int c = 8;
    const BackboneWeights w = BackboneWeights::seeded(3, c, 5);
    const Tensor img = uniform_tensor({3, 48, 160}, rng);

    const FeaturePyramid pyr = extract_pyramid(img, w);
    CHECK(pyr.f1.shape() == std::vector<int>{c, 24, 80});
    CHECK(pyr.f2.shape() == std::vector<int>{c, 12, 40});
    CHECK(pyr.f3.shape() == std::vector<int>{c, 6, 40});  // height-only stride at the top

    // Activations are post-relu, hence nonnegative.
    for (const Tensor* t : {&pyr.f1, &pyr.f2, &pyr.f3})
        for (const float v : t->vec()) CHECK(v >= 0.0f);

    CHECK_THROWS_AS(extract_pyramid(uniform_tensor({3, 50, 160}, rng), w), ConfigError);
    CHECK_THROWS_AS(extract_pyramid(uniform_tensor({3, 48, 161}, rng), w), ConfigError);
    CHECK_THROWS_AS(extract_pyramid(uniform_tensor({1, 48, 160}, rng), w), ShapeError);
    CHECK_THROWS_AS(extract_pyramid(uniform_tensor({3, 48}, rng), w), ShapeError);
}

TEST_CASE("first backbone stage equals a strided conv plus relu") {
    Rng rng(102);
    const BackboneWeights w = BackboneWeights::seeded(3, 4, 6);
    const Tensor img = uniform_tensor({3, 16, 16}, rng);

    const FeaturePyramid pyr = extract_pyramid(img, w);
    auto ref = refimpl::conv2d_ref(to_vec(img), 3, 16, 16, to_vec(w.stage1_w), 4, 3, 3,
                                   to_vec(w.stage1_b), 2, 2, 1, 1);
    for (auto& v : ref) v = std::max(0.0, v);
    CHECK(max_abs_diff(pyr.f1, ref) < 1e-5);
}

TEST_CASE("fusion mixes resized levels with per-level scalars") {
    Rng rng(103);
    const BackboneWeights bw = BackboneWeights::seeded(3, 4, 6);
    const Tensor img = uniform_tensor({3, 16, 16}, rng);
    const FeaturePyramid pyr = extract_pyramid(img, bw);

    // Weights that keep only the level-1 contribution: at level 1 the resize
    // is an identity, so fused level 1 must be exactly 2 * f1.
    FusionWeights only1;
    for (int l = 0; l < 3; ++l) {
        only1.alpha[l] = 2.0f;
        only1.beta[l] = 0.0f;
        only1.gamma[l] = 0.0f;
    }
    const FeaturePyramid fused = fuse(pyr, only1);
    REQUIRE(fused.fused.size() == 3);
    CHECK(fused.fused[0].shape() == pyr.f1.shape());
    CHECK(fused.fused[1].shape() == pyr.f2.shape());
    CHECK(fused.fused[2].shape() == pyr.f3.shape());
    for (std::size_t i = 0; i < pyr.f1.size(); ++i)
        CHECK(fused.fused[0][i] == doctest::Approx(2.0 * pyr.f1[i]).epsilon(1e-6));

    // General weights against a reference combination at level 2.
    const FusionWeights fw = FusionWeights::seeded(9);
    const FeaturePyramid fused2 = fuse(pyr, fw);
    const int th = pyr.f2.dim(1), tw = pyr.f2.dim(2);
    const auto r1 = refimpl::bilinear_ref(to_vec(pyr.f1), 4, pyr.f1.dim(1), pyr.f1.dim(2), th, tw);
    const auto r2 = refimpl::bilinear_ref(to_vec(pyr.f2), 4, pyr.f2.dim(1), pyr.f2.dim(2), th, tw);
    const auto r3 = refimpl::bilinear_ref(to_vec(pyr.f3), 4, pyr.f3.dim(1), pyr.f3.dim(2), th, tw);
    double worst = 0.0;
    for (std::size_t i = 0; i < fused2.fused[1].size(); ++i) {
        const double want = fw.beta[1] * r2[i] + fw.alpha[1] * r1[i] + fw.gamma[1] * r3[i];
        worst = std::max(worst, std::abs(want - fused2.fused[1][i]));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("seeded weights are reproducible and distinct across seeds") {
    const BackboneWeights a = BackboneWeights::seeded(3, 6, 7);
    const BackboneWeights b = BackboneWeights::seeded(3, 6, 7);
    CHECK(bit_equal(a.stage1_w, b.stage1_w));
    CHECK(bit_equal(a.stage3_w, b.stage3_w));

    const BackboneWeights c = BackboneWeights::seeded(3, 6, 8);
    CHECK_FALSE(bit_equal(a.stage1_w, c.stage1_w));

    CHECK_THROWS_AS(BackboneWeights::seeded(0, 6, 7), ConfigError);
    CHECK_THROWS_AS(BackboneWeights::seeded(3, 0, 7), ConfigError);
}

TEST_CASE("backbone and fusion archive round trip preserves outputs") {
    Rng rng(104);
    const BackboneWeights bw = BackboneWeights::seeded(3, 4, 11);
    const FusionWeights fw = FusionWeights::seeded(11);
    TensorArchive ar;
    bw.to_archive(ar);
    fw.to_archive(ar);

    const BackboneWeights bw2 = BackboneWeights::from_archive(ar);
    const FusionWeights fw2 = FusionWeights::from_archive(ar);

    const Tensor img = uniform_tensor({3, 16, 16}, rng);
    const FeaturePyramid p1 = fuse(extract_pyramid(img, bw), fw);
    const FeaturePyramid p2 = fuse(extract_pyramid(img, bw2), fw2);
    for (int l = 0; l < 3; ++l) CHECK(bit_equal(p1.fused[static_cast<std::size_t>(l)],
                                                p2.fused[static_cast<std::size_t>(l)]));

    TensorArchive missing;
    CHECK_THROWS_AS(BackboneWeights::from_archive(missing), IoError);
}

TEST_CASE("pyramid level accessor validates its argument") {
    FeaturePyramid pyr;
    CHECK_THROWS_AS(pyr.level(0), ConfigError);
    CHECK_THROWS_AS(pyr.level(4), ConfigError);
}
