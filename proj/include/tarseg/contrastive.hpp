#pragma once

#include <vector>

#include "tarseg/pyramid.hpp"
#include "tarseg/tensor.hpp"
#include "tarseg/tensor_io.hpp"

namespace tarseg {

// Image embedding: backbone, global average pool over the coarsest level,
// one linear layer to Dp.
struct ProjectionWeights {
    Tensor weight;  // [Dp, C]
    Tensor bias;    // [Dp]

    int out_dim() const { return weight.dim(0); }

    static ProjectionWeights seeded(int channels, int proj_dim, std::uint64_t seed);
    static ProjectionWeights from_archive(const TensorArchive& ar);
    void to_archive(TensorArchive& ar) const;
};

Tensor project(const Tensor& image, const BackboneWeights& backbone, const ProjectionWeights& w);

// The pairing loss runs in f64 end to end so central finite differences can
// resolve its gradients.
using VecD = std::vector<double>;

struct BatchD {
    std::vector<VecD> pi;  // raw-image projections
    std::vector<VecD> pp;  // masked-image projections, index-aligned with pi
};

struct BatchGrad {
    std::vector<VecD> d_pi;
    std::vector<VecD> d_pp;
};

double cosine_sim(const VecD& a, const VecD& b);

// -log( exp(sim(pi,pp)/tau) / Z ) where Z sums exp(sim(pi,n)/tau) over the
// negatives — and also the positive term when include_positive is set (the
// canonical normalized variant).
double l_nce(const VecD& pi, const VecD& pp, const std::vector<VecD>& negatives, double tau,
             bool include_positive = false);

// Symmetric sum over the batch; item i's negatives are the raw-image
// projections of every other item.
double contrastive_loss(const BatchD& batch, double tau, bool include_positive = false);

// Analytic gradient of contrastive_loss with respect to every projection.
BatchGrad contrastive_grad(const BatchD& batch, double tau, bool include_positive = false);

double total_loss(double l_seg, double l_rec, double l_c, double lambda_rec = 1.0,
                  double lambda_c = 0.1);

// Float-tensor conveniences for pipeline use.
VecD to_vecd(const Tensor& t);

}  // namespace tarseg
