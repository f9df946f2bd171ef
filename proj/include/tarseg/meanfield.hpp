#pragma once

#include "tarseg/tar.hpp"
#include "tarseg/tensor.hpp"

namespace tarseg {

// Naive dense mean-field smoothing with a Gaussian appearance kernel over
// RGB and position. Kept deliberately simple — it exists as a runtime and
// quality comparator, simplified, not a faithful fully-connected CRF.
struct MeanFieldConfig {
    double pos_sigma = 20.0;
    double rgb_sigma = 0.1;
    int area_cap = 16384;  // dense pairwise is O(N^2); refuse above this

    void validate() const;
};

// Each iteration replaces every pixel with the softmax-weighted mean of all
// other pixels, scored by -(d_pos^2/(2*pos_sigma^2) + d_rgb^2/(2*rgb_sigma^2)).
SoftLabel baseline_meanfield(const SoftLabel& label, const Tensor& rgb, int iters,
                             const MeanFieldConfig& cfg);

}  // namespace tarseg
