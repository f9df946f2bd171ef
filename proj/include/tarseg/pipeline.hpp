#pragma once

#include "tarseg/tar.hpp"
#include "tarseg/weights.hpp"

namespace tarseg {

struct PipelineOptions {
    int max_steps = 25;
    RefineConfig refine;
    double guide_gain = 1.0;  // stage-1 feature magnitude for label refinement
    int threads = 1;
};

struct InstanceOutput {
    int step = 0;    // decode-step index on the finest level
    int symbol = 0;  // predicted class id
    Tensor final_mask;   // [H,W] {0,1}, level ensemble at image resolution
    Tensor pseudo;       // [H,W] {0,1}, binarized refined label
    SoftLabel pseudo_soft;
};

struct PipelineResult {
    std::vector<AttentionTrace> traces;  // one per pyramid level
    std::vector<InstanceOutput> instances;
};

// Full forward pass: pyramid, fusion, per-level decoding, per-instance
// coarse masks with level voting, and refined pseudo labels. The finest
// level's trace defines the instances; coarser levels contribute their
// step-t attention when they have one (falling back to their last
// pre-end step) and drop out of the vote when their trace decoded nothing.
PipelineResult run_pipeline(const Tensor& image, const PipelineWeights& w,
                            const PipelineOptions& opt);

// Shannon entropy of an attention map (natural log).
double attention_entropy(const Tensor& attention);

}  // namespace tarseg
