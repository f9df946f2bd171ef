#pragma once

#include <vector>

#include "tarseg/tensor.hpp"

namespace tarseg {

// Primitive tensor ops. All are pure functions; reductions accumulate in
// double and store float.

// Cross-correlation of input [Cin,H,W] with weights [Cout,Cin,kH,kW] plus
// bias [Cout]. Zero padding. Output [Cout,H',W'] with
// H' = (H + 2*padH - kH)/strideH + 1.
Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias, int strideH,
              int strideW, int padH, int padW);
Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias, int stride,
              int padding);

// Gradient-of-conv (scatter-add) upsampling. input [Cin,H,W], weights
// [Cin,Cout,kH,kW], bias [Cout]. Output spatial size = stride*(H-1) + kH.
Tensor transposed_conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
                         int stride);

// Bilinear resize of [C,H,W] to [C,outH,outW] (a rank-2 [H,W] map resizes to
// [outH,outW]). Half-pixel-center sampling (align-corners=false):
// src = (dst + 0.5) * in/out - 0.5, clamped to the valid range. Resizing to
// the identical size returns a bit-exact copy.
Tensor resize_bilinear(const Tensor& input, int outH, int outW);

// Numerically stabilized softmax along an axis (max subtraction; the
// result sums to 1 along the axis within 1e-5).
Tensor softmax(const Tensor& input, int axis);

Tensor tanh_map(const Tensor& input);
Tensor sigmoid_map(const Tensor& input);
Tensor relu_map(const Tensor& input);

// [m,k] x [k,n] -> [m,n]
Tensor matmul(const Tensor& a, const Tensor& b);
// [m,k] x [k] -> [m]
Tensor matvec(const Tensor& a, const Tensor& x);

// Concatenate along an axis; all other dims must agree.
Tensor concat(const std::vector<Tensor>& parts, int axis);

// Max pooling over [C,H,W] windows. Output dims floor((H-kH)/strideH)+1.
Tensor max_pool(const Tensor& input, int kH, int kW, int strideH, int strideW);

}  // namespace tarseg
