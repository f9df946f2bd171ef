#include "tarseg/weights.hpp"

namespace tarseg {

void ModelDims::validate() const {
    if (image_channels < 1) throw ConfigError("model dims: image channels must be >= 1");
    if (channels < 1) throw ConfigError("model dims: feature channels must be >= 1");
    if (hidden < 2 || hidden % 2 != 0)
        throw ConfigError("model dims: hidden size must be a positive even number");
    if (attn_dim < 1 || embed_dim < 1) throw ConfigError("model dims: attention/embedding dims must be >= 1");
    if (proj_dim < 2) throw ConfigError("model dims: projection dim must be >= 2");
    if (num_classes <= kFirstSymbolId)
        throw ConfigError("model dims: class count must exceed the reserved ids");
}

PipelineWeights PipelineWeights::seeded(const ModelDims& dims, std::uint64_t seed) {
    dims.validate();
    PipelineWeights w;
    w.backbone = BackboneWeights::seeded(dims.image_channels, dims.channels, seed);
    w.fusion = FusionWeights::seeded(seed);
    w.rec = RecognizerWeights::seeded(dims.channels, dims.hidden, dims.attn_dim, dims.embed_dim,
                                      dims.num_classes, seed);
    w.seg = SegHeadWeights::seeded(dims.channels, dims.embed_dim, seed);
    w.proj = ProjectionWeights::seeded(dims.channels, dims.proj_dim, seed);
    return w;
}

PipelineWeights PipelineWeights::from_archive(const TensorArchive& ar) {
    PipelineWeights w;
    w.backbone = BackboneWeights::from_archive(ar);
    w.fusion = FusionWeights::from_archive(ar);
    w.rec = RecognizerWeights::from_archive(ar);
    w.seg = SegHeadWeights::from_archive(ar);
    w.proj = ProjectionWeights::from_archive(ar);
    return w;
}

void PipelineWeights::to_archive(TensorArchive& ar) const {
    backbone.to_archive(ar);
    fusion.to_archive(ar);
    rec.to_archive(ar);
    seg.to_archive(ar);
    proj.to_archive(ar);
}

void PipelineWeights::save(const std::string& path) const {
    TensorArchive ar;
    to_archive(ar);
    ar.save(path);
}

PipelineWeights PipelineWeights::load(const std::string& path) {
    TensorArchive ar = TensorArchive::load(path);
    return from_archive(ar);
}

}  // namespace tarseg
