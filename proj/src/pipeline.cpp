#include "tarseg/pipeline.hpp"

#include <cmath>

#include "tarseg/ops.hpp"
#include "tarseg/threadpool.hpp"

namespace tarseg {

namespace {

// Vote over however many levels are present: binarize at 0.5, resize,
// re-threshold, keep pixels backed by more than half the votes.
Tensor vote_masks(const std::vector<Tensor>& fgs, int outH, int outW) {
    std::vector<Tensor> votes;
    votes.reserve(fgs.size());
    for (const Tensor& fg : fgs) {
        Tensor b = fg;
        for (auto& v : b.vec()) v = v >= 0.5f ? 1.0f : 0.0f;
        votes.push_back(resize_bilinear(b, outH, outW));
    }
    Tensor out({outH, outW});
    const int need = static_cast<int>(votes.size()) / 2 + 1;
    for (std::size_t i = 0; i < out.size(); ++i) {
        int n = 0;
        for (const auto& v : votes) n += v[i] >= 0.5f ? 1 : 0;
        out[i] = n >= need ? 1.0f : 0.0f;
    }
    return out;
}

}  // namespace

double attention_entropy(const Tensor& attention) {
    double h = 0.0;
    for (const float v : attention.vec())
        if (v > 0.0f) h -= static_cast<double>(v) * std::log(static_cast<double>(v));
    return h;
}

PipelineResult run_pipeline(const Tensor& image, const PipelineWeights& w,
                            const PipelineOptions& opt) {
    if (image.rank() != 3) throw ShapeError("pipeline: image must be [C,H,W]");
    opt.refine.validate();
    const int h = image.dim(1), wd = image.dim(2);

    const FeaturePyramid fused = fuse(extract_pyramid(image, w.backbone), w.fusion);

    PipelineResult result;
    result.traces.resize(3);
    parallel_for(3, opt.threads, [&](int l) {
        result.traces[static_cast<std::size_t>(l)] =
            decode(fused.fused[static_cast<std::size_t>(l)], w.rec, opt.max_steps);
    });

    const std::vector<int> symbols = result.traces[0].symbols();
    const int n = static_cast<int>(symbols.size());
    result.instances.resize(static_cast<std::size_t>(n));

    // Pre-end step counts per level for the fallback rule.
    int pre_end[3];
    for (int l = 0; l < 3; ++l)
        pre_end[l] = static_cast<int>(result.traces[static_cast<std::size_t>(l)].symbols().size());

    const Guidance stage1 = prepare_stage1_guidance(fused.fused[0], h, wd, opt.guide_gain);
    const Guidance rgb{image};

    parallel_for(n, opt.threads, [&](int t) {
        InstanceOutput& out = result.instances[static_cast<std::size_t>(t)];
        out.step = t;
        out.symbol = symbols[static_cast<std::size_t>(t)];

        Tensor emb({w.rec.embed_dim()});
        for (int j = 0; j < emb.dim(0); ++j) emb(j) = w.rec.embedding(out.symbol, j);

        std::vector<Tensor> level_fgs;
        for (int l = 0; l < 3; ++l) {
            if (pre_end[l] < 1) continue;  // this level decoded nothing
            const int idx = std::min(t, pre_end[l] - 1);
            const auto& level_fused = fused.fused[static_cast<std::size_t>(l)];
            const auto& step = result.traces[static_cast<std::size_t>(l)]
                                   .steps[static_cast<std::size_t>(idx)];
            const Tensor fc = combine(level_fused, step.attention, emb, w.seg);
            std::vector<Tensor> skips;
            int sh = fc.dim(1), sw = fc.dim(2);
            for (int s = 0; s < 3; ++s) {
                sh *= 2;
                sw *= 2;
                const int src = std::max(l - (s + 1), 0);
                skips.push_back(resize_bilinear(fused.fused[static_cast<std::size_t>(src)], sh, sw));
            }
            level_fgs.push_back(coarse_mask(fc, skips, w.seg).fg());
        }
        out.final_mask = vote_masks(level_fgs, h, wd);

        const SoftLabel seed{resize_bilinear(result.traces[0].steps[static_cast<std::size_t>(t)]
                                                 .attention,
                                             h, wd)};
        out.pseudo_soft = two_stage_refine(seed, stage1, rgb, opt.refine);
        out.pseudo = binarize(out.pseudo_soft, opt.refine.binarize_threshold);
    });

    return result;
}

}  // namespace tarseg
