#include "tarseg/pyramid.hpp"

#include <cmath>

#include "tarseg/errors.hpp"
#include "tarseg/ops.hpp"
#include "tarseg/rng.hpp"

namespace tarseg {

namespace {

Tensor he_conv(int cout, int cin, int k, Rng& rng) {
    Tensor w({cout, cin, k, k});
    const float scale = std::sqrt(2.0f / (static_cast<float>(cin) * k * k));
    for (auto& v : w.vec()) v = static_cast<float>(rng.normal()) * scale;
    return w;
}

}  // namespace

BackboneWeights BackboneWeights::seeded(int c_img, int channels, std::uint64_t seed) {
    if (c_img < 1 || channels < 1) throw ConfigError("backbone channel counts must be positive");
    Rng r1 = Rng::stream(seed, 11), r2 = Rng::stream(seed, 12), r3 = Rng::stream(seed, 13);
    BackboneWeights w;
    w.stage1_w = he_conv(channels, c_img, 3, r1);
    w.stage1_b = Tensor({channels});
    w.stage2_w = he_conv(channels, channels, 3, r2);
    w.stage2_b = Tensor({channels});
    w.stage3_w = he_conv(channels, channels, 3, r3);
    w.stage3_b = Tensor({channels});
    return w;
}

BackboneWeights BackboneWeights::from_archive(const TensorArchive& ar) {
    BackboneWeights w;
    w.stage1_w = ar.get("backbone.stage1.weight");
    w.stage1_b = ar.get("backbone.stage1.bias");
    w.stage2_w = ar.get("backbone.stage2.weight");
    w.stage2_b = ar.get("backbone.stage2.bias");
    w.stage3_w = ar.get("backbone.stage3.weight");
    w.stage3_b = ar.get("backbone.stage3.bias");
    return w;
}

void BackboneWeights::to_archive(TensorArchive& ar) const {
    ar.put("backbone.stage1.weight", stage1_w);
    ar.put("backbone.stage1.bias", stage1_b);
    ar.put("backbone.stage2.weight", stage2_w);
    ar.put("backbone.stage2.bias", stage2_b);
    ar.put("backbone.stage3.weight", stage3_w);
    ar.put("backbone.stage3.bias", stage3_b);
}

FusionWeights FusionWeights::seeded(std::uint64_t seed) {
    Rng rng = Rng::stream(seed, 14);
    FusionWeights w;
    for (int l = 0; l < 3; ++l) {
        w.alpha[l] = static_cast<float>(rng.uniform(0.25, 1.0));
        w.beta[l] = static_cast<float>(rng.uniform(0.25, 1.0));
        w.gamma[l] = static_cast<float>(rng.uniform(0.25, 1.0));
    }
    return w;
}

FusionWeights FusionWeights::from_archive(const TensorArchive& ar) {
    FusionWeights w;
    for (int l = 0; l < 3; ++l) {
        const std::string p = "fusion.l" + std::to_string(l + 1) + ".";
        w.alpha[l] = ar.get(p + "alpha")[0];
        w.beta[l] = ar.get(p + "beta")[0];
        w.gamma[l] = ar.get(p + "gamma")[0];
    }
    return w;
}

void FusionWeights::to_archive(TensorArchive& ar) const {
    for (int l = 0; l < 3; ++l) {
        const std::string p = "fusion.l" + std::to_string(l + 1) + ".";
        ar.put(p + "alpha", Tensor({1}, {alpha[l]}));
        ar.put(p + "beta", Tensor({1}, {beta[l]}));
        ar.put(p + "gamma", Tensor({1}, {gamma[l]}));
    }
}

const Tensor& FeaturePyramid::level(int l) const {
    switch (l) {
        case 1: return f1;
        case 2: return f2;
        case 3: return f3;
        default: throw ConfigError("pyramid level must be 1, 2, or 3");
    }
}

FeaturePyramid extract_pyramid(const Tensor& image, const BackboneWeights& w) {
    if (image.rank() != 3) throw ShapeError("extract_pyramid: expected [C,H,W] image");
    const int h = image.dim(1), wd = image.dim(2);
    if (h % 8 != 0) throw ConfigError("input height must be divisible by 8, got " + std::to_string(h));
    if (wd % 4 != 0) throw ConfigError("input width must be divisible by 4, got " + std::to_string(wd));
    if (image.dim(0) != w.in_channels())
        throw ShapeError("extract_pyramid: image has " + std::to_string(image.dim(0)) +
                         " channels, backbone expects " + std::to_string(w.in_channels()));

    FeaturePyramid pyr;
    pyr.f1 = relu_map(conv2d(image, w.stage1_w, w.stage1_b, 2, 2, 1, 1));
    pyr.f2 = relu_map(conv2d(pyr.f1, w.stage2_w, w.stage2_b, 2, 2, 1, 1));
    pyr.f3 = relu_map(conv2d(pyr.f2, w.stage3_w, w.stage3_b, 2, 1, 1, 1));  // height-only stride
    return pyr;
}

FeaturePyramid fuse(const FeaturePyramid& pyr, const FusionWeights& w) {
    FeaturePyramid out = pyr;
    out.fused.clear();
    for (int l = 0; l < 3; ++l) {
        const Tensor& target = out.level(l + 1);
        const int th = target.dim(1), tw = target.dim(2);
        const Tensor r1 = resize_bilinear(pyr.f1, th, tw);
        const Tensor r2 = resize_bilinear(pyr.f2, th, tw);
        const Tensor r3 = resize_bilinear(pyr.f3, th, tw);
        Tensor f(target.shape());
        for (std::size_t i = 0; i < f.size(); ++i)
            f[i] = w.alpha[l] * r1[i] + w.beta[l] * r2[i] + w.gamma[l] * r3[i];
        out.fused.push_back(std::move(f));
    }
    return out;
}

}  // namespace tarseg
