#include "tarseg/tar.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tarseg/ops.hpp"

namespace tarseg {

void RefineConfig::validate() const {
    if (kernel_radius < 1) throw ConfigError("refine: kernel radius must be >= 1");
    if (iters_stage1 < 0 || iters_stage2 < 0)
        throw ConfigError("refine: iteration counts must be >= 0");
    if (!(sigma_floor > 0.0)) throw ConfigError("refine: sigma floor must be > 0");
    if (!(binarize_threshold > 0.0 && binarize_threshold < 1.0))
        throw ConfigError("refine: binarize threshold must lie in (0,1)");
}

double kernel_affinity(const float* vx, const float* vy, const double* sigma_sq, int channels) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c)
        acc += -std::abs(static_cast<double>(vx[c]) - vy[c]) / sigma_sq[c];
    return acc / channels;
}

namespace {

void check_pair(const SoftLabel& label, const Guidance& guidance) {
    if (label.values.rank() != 2) throw ShapeError("refine: label must be [H,W]");
    if (guidance.values.rank() != 3) throw ShapeError("refine: guidance must be [Cg,H,W]");
    if (guidance.values.dim(1) != label.values.dim(0) ||
        guidance.values.dim(2) != label.values.dim(1))
        throw ShapeError("refine: guidance spatial shape " +
                         std::to_string(guidance.values.dim(1)) + "x" +
                         std::to_string(guidance.values.dim(2)) + " does not match label " +
                         std::to_string(label.values.dim(0)) + "x" +
                         std::to_string(label.values.dim(1)));
}

}  // namespace

SoftLabel tar_step(const SoftLabel& label, const Guidance& guidance, const RefineConfig& cfg) {
    cfg.validate();
    check_pair(label, guidance);
    const int h = label.values.dim(0), w = label.values.dim(1);
    const int cg = guidance.values.dim(0);
    const int r = cfg.kernel_radius;
    const Tensor& v = guidance.values;
    const std::size_t plane = static_cast<std::size_t>(h) * w;

    // Guidance values transposed to pixel-major [H*W, Cg] so a pixel's vector
    // is contiguous in the hot loop.
    std::vector<float> vp(plane * static_cast<std::size_t>(cg));
    for (int c = 0; c < cg; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                vp[(static_cast<std::size_t>(y) * w + x) * cg + c] = v(c, y, x);

    // Optional whole-image deviation, shared by every pixel.
    std::vector<double> global_sigma_sq;
    if (cfg.sigma_global) {
        global_sigma_sq.resize(static_cast<std::size_t>(cg));
        for (int c = 0; c < cg; ++c) {
            double s = 0.0, s2 = 0.0;
            for (std::size_t i = 0; i < plane; ++i) {
                const double val = vp[i * cg + c];
                s += val;
                s2 += val * val;
            }
            const double mean = s / static_cast<double>(plane);
            const double var = std::max(0.0, s2 / static_cast<double>(plane) - mean * mean);
            const double sigma = std::max(std::sqrt(var), cfg.sigma_floor);
            global_sigma_sq[static_cast<std::size_t>(c)] = sigma * sigma;
        }
    }

    SoftLabel out{Tensor({h, w})};
    std::vector<double> sigma_sq(static_cast<std::size_t>(cg));
    const int max_nb = (2 * r + 1) * (2 * r + 1);
    std::vector<double> aff(static_cast<std::size_t>(max_nb));
    std::vector<float> nb_p(static_cast<std::size_t>(max_nb));

    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(0, y - r), y1 = std::min(h - 1, y + r);
        for (int x = 0; x < w; ++x) {
            const int x0 = std::max(0, x - r), x1 = std::min(w - 1, x + r);
            const float* vx = &vp[(static_cast<std::size_t>(y) * w + x) * cg];

            if (cfg.sigma_global) {
                for (int c = 0; c < cg; ++c) sigma_sq[c] = global_sigma_sq[c];
            } else {
                // Deviation of the guidance inside this pixel's window
                // (center included), per channel.
                const int count = (y1 - y0 + 1) * (x1 - x0 + 1);
                for (int c = 0; c < cg; ++c) {
                    double s = 0.0, s2 = 0.0;
                    for (int ny = y0; ny <= y1; ++ny) {
                        const float* row = &vp[(static_cast<std::size_t>(ny) * w + x0) * cg];
                        for (int nx = 0; nx <= x1 - x0; ++nx) {
                            const double val = row[static_cast<std::size_t>(nx) * cg + c];
                            s += val;
                            s2 += val * val;
                        }
                    }
                    const double mean = s / count;
                    const double var = std::max(0.0, s2 / count - mean * mean);
                    const double sigma = std::max(std::sqrt(var), cfg.sigma_floor);
                    sigma_sq[static_cast<std::size_t>(c)] = sigma * sigma;
                }
            }

            int n = 0;
            double m = -1e300;
            for (int ny = y0; ny <= y1; ++ny) {
                for (int nx = x0; nx <= x1; ++nx) {
                    if (!cfg.include_center && ny == y && nx == x) continue;
                    const float* va = &vp[(static_cast<std::size_t>(ny) * w + nx) * cg];
                    const double k = kernel_affinity(vx, va, sigma_sq.data(), cg);
                    aff[n] = k;
                    nb_p[n] = label.values(ny, nx);
                    m = std::max(m, k);
                    ++n;
                }
            }
            if (n == 0) {  // degenerate 1x1 image with the center excluded
                out.values(y, x) = label.values(y, x);
                continue;
            }
            double sum = 0.0, acc = 0.0;
            for (int i = 0; i < n; ++i) {
                const double e = std::exp(aff[i] - m);
                sum += e;
                acc += e * nb_p[i];
            }
            out.values(y, x) = static_cast<float>(acc / sum);
        }
    }
    return out;
}

SoftLabel refine(const SoftLabel& label, const Guidance& guidance, int iters,
                 const RefineConfig& cfg) {
    if (iters < 0) throw ConfigError("refine: iteration count must be >= 0");
    SoftLabel cur = label;
    for (int i = 0; i < iters; ++i) cur = tar_step(cur, guidance, cfg);
    return cur;
}

SoftLabel two_stage_refine(const SoftLabel& seed, const Guidance& backbone_feat,
                           const Guidance& rgb, const RefineConfig& cfg) {
    cfg.validate();
    check_pair(seed, backbone_feat);
    check_pair(seed, rgb);
    const SoftLabel stage1 = refine(seed, backbone_feat, cfg.iters_stage1, cfg);
    return refine(stage1, rgb, cfg.iters_stage2, cfg);
}

Guidance prepare_stage1_guidance(const Tensor& feat, int height, int width, double gain) {
    if (feat.rank() != 3) throw ShapeError("guidance features must be [C,H,W]");
    if (!(gain > 0.0)) throw ConfigError("guidance gain must be positive");
    Tensor up = resize_bilinear(feat, height, width);
    const float g = static_cast<float>(gain);
    for (std::size_t i = 0; i < up.size(); ++i) up[i] *= g;
    return Guidance{std::move(up)};
}

Tensor binarize(const SoftLabel& label, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw ConfigError("binarize: threshold must lie in (0,1)");
    if (label.values.rank() != 2) throw ShapeError("binarize: label must be [H,W]");
    float lo = label.values[0], hi = label.values[0];
    for (const float v : label.values.vec()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    Tensor out(label.values.shape());
    if (hi == lo) return out;  // constant map: all zeros
    const double range = static_cast<double>(hi) - lo;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (static_cast<double>(label.values[i]) - lo) / range >= threshold ? 1.0f : 0.0f;
    return out;
}

}  // namespace tarseg
