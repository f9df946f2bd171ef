#include "tarseg/seghead.hpp"

#include <cmath>

#include "tarseg/ops.hpp"
#include "tarseg/rng.hpp"

namespace tarseg {

namespace {

Tensor he(std::vector<int> shape, Rng& rng) {
    Tensor t(std::move(shape));
    std::size_t fan_in = 1;
    for (int i = 1; i < t.rank(); ++i) fan_in *= static_cast<std::size_t>(t.dim(i));
    const float scale = std::sqrt(2.0f / static_cast<float>(fan_in));
    for (auto& v : t.vec()) v = static_cast<float>(rng.normal()) * scale;
    return t;
}

Tensor plane(const Tensor& two_channel, int c) {
    Tensor out({two_channel.dim(1), two_channel.dim(2)});
    for (int y = 0; y < out.dim(0); ++y)
        for (int x = 0; x < out.dim(1); ++x) out(y, x) = two_channel(c, y, x);
    return out;
}

}  // namespace

const Tensor CoarseMask::fg() const { return plane(channels, 0); }
const Tensor CoarseMask::bg() const { return plane(channels, 1); }

SegHeadWeights SegHeadWeights::seeded(int channels, int embed_dim, std::uint64_t seed) {
    if (channels < 1 || embed_dim < 1)
        throw ConfigError("segmentation head dimensions must be positive");
    Rng rng = Rng::stream(seed, 30);
    SegHeadWeights w;
    w.combine_w = he({channels, channels + 1 + embed_dim, 1, 1}, rng);
    w.combine_b = Tensor({channels});
    for (int s = 0; s < 3; ++s) {
        w.up_w[s] = he({channels, channels, 2, 2}, rng);
        w.up_b[s] = Tensor({channels});
        w.skip_w[s] = he({channels, channels, 1, 1}, rng);
        w.skip_b[s] = Tensor({channels});
    }
    w.out_w = he({2, channels, 1, 1}, rng);
    w.out_b = Tensor({2});
    return w;
}

SegHeadWeights SegHeadWeights::from_archive(const TensorArchive& ar) {
    SegHeadWeights w;
    w.combine_w = ar.get("seg.combine.weight");
    w.combine_b = ar.get("seg.combine.bias");
    for (int s = 0; s < 3; ++s) {
        const std::string n = std::to_string(s + 1);
        w.up_w[s] = ar.get("seg.up" + n + ".weight");
        w.up_b[s] = ar.get("seg.up" + n + ".bias");
        w.skip_w[s] = ar.get("seg.skip" + n + ".weight");
        w.skip_b[s] = ar.get("seg.skip" + n + ".bias");
    }
    w.out_w = ar.get("seg.out.weight");
    w.out_b = ar.get("seg.out.bias");
    return w;
}

void SegHeadWeights::to_archive(TensorArchive& ar) const {
    ar.put("seg.combine.weight", combine_w);
    ar.put("seg.combine.bias", combine_b);
    for (int s = 0; s < 3; ++s) {
        const std::string n = std::to_string(s + 1);
        ar.put("seg.up" + n + ".weight", up_w[s]);
        ar.put("seg.up" + n + ".bias", up_b[s]);
        ar.put("seg.skip" + n + ".weight", skip_w[s]);
        ar.put("seg.skip" + n + ".bias", skip_b[s]);
    }
    ar.put("seg.out.weight", out_w);
    ar.put("seg.out.bias", out_b);
}

Tensor combine(const Tensor& fused, const Tensor& attention, const Tensor& symbol_embedding,
               const SegHeadWeights& w) {
    if (fused.rank() != 3) throw ShapeError("combine: features must be [C,H,W]");
    if (attention.rank() != 2 || attention.dim(0) != fused.dim(1) ||
        attention.dim(1) != fused.dim(2))
        throw ShapeError("combine: attention map must spatially match the features");
    if (symbol_embedding.rank() != 1)
        throw ShapeError("combine: symbol embedding must be a vector");
    const int c = fused.dim(0), h = fused.dim(1), wd = fused.dim(2);
    const int e = symbol_embedding.dim(0);
    if (w.combine_w.dim(1) != c + 1 + e)
        throw ShapeError("combine: weights expect " + std::to_string(w.combine_w.dim(1)) +
                         " input channels, got " + std::to_string(c + 1 + e));

    Tensor stacked({c + 1 + e, h, wd});
    std::copy(fused.data(), fused.data() + fused.size(), stacked.data());
    float* att_plane = stacked.data() + fused.size();
    std::copy(attention.data(), attention.data() + attention.size(), att_plane);
    for (int j = 0; j < e; ++j) {
        float* p = stacked.data() + (static_cast<std::size_t>(c + 1 + j)) * h * wd;
        std::fill(p, p + static_cast<std::size_t>(h) * wd, symbol_embedding(j));
    }
    return conv2d(stacked, w.combine_w, w.combine_b, 1, 0);
}

CoarseMask coarse_mask(const Tensor& fc, const std::vector<Tensor>& skip_features,
                       const SegHeadWeights& w) {
    if (fc.rank() != 3) throw ShapeError("coarse_mask: input must be [C,H,W]");
    if (skip_features.size() != 3)
        throw ShapeError("coarse_mask: exactly three skip features required, got " +
                         std::to_string(skip_features.size()));
    Tensor x = fc;
    for (int s = 0; s < 3; ++s) {
        x = transposed_conv2d(x, w.up_w[s], w.up_b[s], 2);
        const Tensor& skip = skip_features[static_cast<std::size_t>(s)];
        if (skip.rank() != 3 || skip.dim(1) != x.dim(1) || skip.dim(2) != x.dim(2))
            throw ShapeError("coarse_mask: skip feature " + std::to_string(s + 1) +
                             " must be [C," + std::to_string(x.dim(1)) + "," +
                             std::to_string(x.dim(2)) + "], got " + skip.shape_str());
        const Tensor proj = conv2d(skip, w.skip_w[s], w.skip_b[s], 1, 0);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += proj[i];
        x = relu_map(x);
    }
    CoarseMask m;
    m.channels = sigmoid_map(conv2d(x, w.out_w, w.out_b, 1, 0));
    return m;
}

double seg_loss(const std::vector<Tensor>& masks, const std::vector<Tensor>& pseudo) {
    if (masks.size() != pseudo.size())
        throw ConfigError("seg_loss: " + std::to_string(masks.size()) + " masks vs " +
                          std::to_string(pseudo.size()) + " labels");
    constexpr double eps = 1e-7;
    double total = 0.0;
    for (std::size_t t = 0; t < masks.size(); ++t) {
        const Tensor& m = masks[t];
        const Tensor& p = pseudo[t];
        if (!m.same_shape(p))
            throw ShapeError("seg_loss: mask/label shape mismatch at instance " +
                             std::to_string(t));
        double acc = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double q = std::clamp(static_cast<double>(m[i]), eps, 1.0 - eps);
            const double y = p[i];
            acc += -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
        }
        total += acc / static_cast<double>(m.size());
    }
    return total;
}

Tensor ensemble(const CoarseMask& m1, const CoarseMask& m2, const CoarseMask& m3, int outH,
                int outW, bool mean_then_threshold) {
    if (outH < 1 || outW < 1) throw ConfigError("ensemble: output dims must be >= 1");
    const CoarseMask* ms[3] = {&m1, &m2, &m3};
    Tensor votes[3];
    for (int i = 0; i < 3; ++i) {
        if (ms[i]->channels.rank() != 3 || ms[i]->channels.dim(0) != 2)
            throw ShapeError("ensemble: masks must be [2,H,W]");
        Tensor fg = ms[i]->fg();
        if (!mean_then_threshold)
            for (auto& v : fg.vec()) v = v >= 0.5f ? 1.0f : 0.0f;
        votes[i] = resize_bilinear(fg, outH, outW);
    }
    Tensor out({outH, outW});
    if (mean_then_threshold) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double mean = (static_cast<double>(votes[0][i]) + votes[1][i] + votes[2][i]) / 3.0;
            out[i] = mean >= 0.5 ? 1.0f : 0.0f;
        }
    } else {
        for (std::size_t i = 0; i < out.size(); ++i) {
            int n = 0;
            for (const auto& v : votes) n += v[i] >= 0.5f ? 1 : 0;
            out[i] = n >= 2 ? 1.0f : 0.0f;
        }
    }
    return out;
}

}  // namespace tarseg
