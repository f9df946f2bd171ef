#pragma once

#include "tarseg/tensor.hpp"
#include "tarseg/tensor_io.hpp"

namespace tarseg {

// Three-stage strided-conv backbone: /2, /4, then a height-only stride for the
// asymmetric coarsest level (H/8 x W/4).
struct BackboneWeights {
    Tensor stage1_w, stage1_b;  // [C, C_img, 3, 3], [C]
    Tensor stage2_w, stage2_b;  // [C, C, 3, 3], [C]
    Tensor stage3_w, stage3_b;  // [C, C, 3, 3], [C]

    static BackboneWeights seeded(int c_img, int channels, std::uint64_t seed);
    static BackboneWeights from_archive(const TensorArchive& ar);
    void to_archive(TensorArchive& ar) const;

    int in_channels() const { return stage1_w.dim(1); }
    int out_channels() const { return stage1_w.dim(0); }
};

// Per-level scalar mixing weights: fused_l = alpha_l*r(f1) + beta_l*r(f2) + gamma_l*r(f3).
struct FusionWeights {
    float alpha[3] = {1.0f, 1.0f, 1.0f};
    float beta[3] = {1.0f, 1.0f, 1.0f};
    float gamma[3] = {1.0f, 1.0f, 1.0f};

    static FusionWeights seeded(std::uint64_t seed);
    static FusionWeights from_archive(const TensorArchive& ar);
    void to_archive(TensorArchive& ar) const;
};

struct FeaturePyramid {
    Tensor f1;  // [C, H/2, W/2]
    Tensor f2;  // [C, H/4, W/4]
    Tensor f3;  // [C, H/8, W/4]
    std::vector<Tensor> fused;  // empty until fuse(); then one per level

    const Tensor& level(int l) const;  // 1-based
};

FeaturePyramid extract_pyramid(const Tensor& image, const BackboneWeights& w);
FeaturePyramid fuse(const FeaturePyramid& pyr, const FusionWeights& w);

}  // namespace tarseg
