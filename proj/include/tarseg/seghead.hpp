#pragma once

#include <vector>

#include "tarseg/tensor.hpp"
#include "tarseg/tensor_io.hpp"

namespace tarseg {

// Per-instance two-channel mask scores after the sigmoid: channel 0 is
// foreground, channel 1 background.
struct CoarseMask {
    Tensor channels;      // [2,H',W'], values in (0,1)
    int instance_id = 0;  // decode-step index

    const Tensor fg() const;  // [H',W'] copy of channel 0
    const Tensor bg() const;  // [H',W'] copy of channel 1
};

struct SegHeadWeights {
    Tensor combine_w, combine_b;          // [C, C+1+E, 1, 1], [C]
    Tensor up_w[3], up_b[3];              // [C, C, 2, 2] transposed-conv taps, [C]
    Tensor skip_w[3], skip_b[3];          // [C, C, 1, 1] skip projections, [C]
    Tensor out_w, out_b;                  // [2, C, 1, 1], [2]

    int channels() const { return combine_w.dim(0); }
    int embed_dim() const { return combine_w.dim(1) - combine_w.dim(0) - 1; }

    static SegHeadWeights seeded(int channels, int embed_dim, std::uint64_t seed);
    static SegHeadWeights from_archive(const TensorArchive& ar);
    void to_archive(TensorArchive& ar) const;
};

// Concatenate [features ‖ attention map ‖ spatially broadcast symbol
// embedding] along channels and project back to C with a 1x1 conv.
Tensor combine(const Tensor& fused, const Tensor& attention, const Tensor& symbol_embedding,
               const SegHeadWeights& w);

// Three upsampling stages (x2 transposed conv + 1x1-projected skip addition
// + ReLU), then a 1x1 conv to two channels and a sigmoid. skip_features[s]
// must spatially match stage s's output (2^(s+1) times the input size).
CoarseMask coarse_mask(const Tensor& fc, const std::vector<Tensor>& skip_features,
                       const SegHeadWeights& w);

// Sum over instances of the mean-over-pixels binary cross entropy between a
// predicted map and its {0,1} target, predictions clamped to [1e-7, 1-1e-7].
double seg_loss(const std::vector<Tensor>& masks, const std::vector<Tensor>& pseudo);

// Majority vote of the three levels: threshold each foreground channel at
// 0.5, resize the binary maps to (outH,outW), re-threshold at 0.5, and keep
// pixels where at least two levels agree. mean_then_threshold instead
// averages the soft resized foregrounds and thresholds once.
Tensor ensemble(const CoarseMask& m1, const CoarseMask& m2, const CoarseMask& m3, int outH,
                int outW, bool mean_then_threshold = false);

}  // namespace tarseg
