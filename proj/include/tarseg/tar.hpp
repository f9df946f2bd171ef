#pragma once

#include "tarseg/tensor.hpp"

namespace tarseg {

// Per-pixel foreground belief in [0,1].
struct SoftLabel {
    Tensor values;  // [H,W]
};

// The visual feature V that controls refinement: backbone features in stage
// one, RGB in stage two. Same spatial shape as the label it guides.
struct Guidance {
    Tensor values;  // [Cg,H,W]
};

struct RefineConfig {
    int kernel_radius = 1;        // window = (2r+1)^2
    int iters_stage1 = 2;         // feature-guided iterations
    int iters_stage2 = 8;         // RGB-guided iterations
    double sigma_floor = 1e-4;    // lower clamp for the per-pixel deviation
    bool include_center = false;  // averaging set excludes the center pixel by default
    bool sigma_global = false;    // per-image instead of per-window deviation
    double binarize_threshold = 0.5;

    void validate() const;
};

// Channel-mean affinity: mean over channels of -|vx_c - vy_c| / sigma_c^2.
// sigma entries must already be clamped to the floor.
double kernel_affinity(const float* vx, const float* vy, const double* sigma_sq, int channels);

// One refinement pass: every pixel becomes the softmax-affinity-weighted
// convex combination of its window neighbors' previous values. The deviation
// window always includes the center pixel; the averaging set excludes it
// unless cfg.include_center. Windows are clipped at borders and the softmax
// runs over the neighbors actually present.
SoftLabel tar_step(const SoftLabel& label, const Guidance& guidance, const RefineConfig& cfg);

// tar_step composed `iters` times; 0 iterations is the bit-exact identity.
SoftLabel refine(const SoftLabel& label, const Guidance& guidance, int iters,
                 const RefineConfig& cfg);

// Feature-guided stage then RGB-guided stage, iteration counts from cfg.
// Both guidance tensors must already be at the seed's resolution.
SoftLabel two_stage_refine(const SoftLabel& seed, const Guidance& backbone_feat,
                           const Guidance& rgb, const RefineConfig& cfg);

// Upsamples a feature map to the label resolution and rescales it. The
// affinity kernel divides differences by squared per-window deviations, so
// the guidance magnitude directly sets how permeable edges are; untrained
// features carry an arbitrary magnitude, and the gain pins it.
Guidance prepare_stage1_guidance(const Tensor& feat, int height, int width, double gain);

// Min-max normalize (a constant map becomes all zeros), then >= threshold.
Tensor binarize(const SoftLabel& label, double threshold);

}  // namespace tarseg
