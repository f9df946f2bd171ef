#pragma once

#include "tarseg/contrastive.hpp"
#include "tarseg/pyramid.hpp"
#include "tarseg/recognizer.hpp"
#include "tarseg/seghead.hpp"
#include "tarseg/tensor_io.hpp"

namespace tarseg {

struct ModelDims {
    int image_channels = 3;
    int channels = 512;   // feature channels C
    int hidden = 256;     // decoder state size D (even)
    int attn_dim = 128;
    int embed_dim = 32;
    int proj_dim = 128;
    int num_classes = kFirstSymbolId + 10;  // reserved ids + builtin alphabet

    void validate() const;
};

struct PipelineWeights {
    BackboneWeights backbone;
    FusionWeights fusion;
    RecognizerWeights rec;
    SegHeadWeights seg;
    ProjectionWeights proj;

    static PipelineWeights seeded(const ModelDims& dims, std::uint64_t seed);
    static PipelineWeights from_archive(const TensorArchive& ar);
    void to_archive(TensorArchive& ar) const;
    void save(const std::string& path) const;
    static PipelineWeights load(const std::string& path);
};

}  // namespace tarseg
