#include "tarseg/meanfield.hpp"

#include <cmath>
#include <vector>

namespace tarseg {

void MeanFieldConfig::validate() const {
    if (!(pos_sigma > 0.0) || !(rgb_sigma > 0.0))
        throw ConfigError("meanfield: sigmas must be > 0");
    if (area_cap < 1) throw ConfigError("meanfield: area cap must be >= 1");
}

SoftLabel baseline_meanfield(const SoftLabel& label, const Tensor& rgb, int iters,
                             const MeanFieldConfig& cfg) {
    cfg.validate();
    if (iters < 0) throw ConfigError("meanfield: iteration count must be >= 0");
    if (label.values.rank() != 2) throw ShapeError("meanfield: label must be [H,W]");
    if (rgb.rank() != 3 || rgb.dim(0) != 3) throw ShapeError("meanfield: rgb must be [3,H,W]");
    const int h = label.values.dim(0), w = label.values.dim(1);
    if (rgb.dim(1) != h || rgb.dim(2) != w)
        throw ShapeError("meanfield: rgb spatial shape does not match label");
    const int n = h * w;
    if (n > cfg.area_cap)
        throw ConfigError("meanfield: image area " + std::to_string(n) +
                          " exceeds the dense pairwise cap " + std::to_string(cfg.area_cap) +
                          "; crop the input or raise the cap");
    if (n == 1) return label;  // no other pixels to average over

    // Pixel-major copies for the O(N^2) loop.
    std::vector<float> px(static_cast<std::size_t>(n) * 5);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float* p = &px[static_cast<std::size_t>(y * w + x) * 5];
            p[0] = static_cast<float>(x);
            p[1] = static_cast<float>(y);
            p[2] = rgb(0, y, x);
            p[3] = rgb(1, y, x);
            p[4] = rgb(2, y, x);
        }
    }
    const float inv_pos = static_cast<float>(1.0 / (2.0 * cfg.pos_sigma * cfg.pos_sigma));
    const float inv_rgb = static_cast<float>(1.0 / (2.0 * cfg.rgb_sigma * cfg.rgb_sigma));

    std::vector<float> cur(label.values.vec());
    std::vector<float> next(static_cast<std::size_t>(n));
    std::vector<float> score(static_cast<std::size_t>(n));
    for (int it = 0; it < iters; ++it) {
        for (int i = 0; i < n; ++i) {
            const float* pi = &px[static_cast<std::size_t>(i) * 5];
            float m = -1e30f;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const float* pj = &px[static_cast<std::size_t>(j) * 5];
                const float dx = pi[0] - pj[0], dy = pi[1] - pj[1];
                const float dr = pi[2] - pj[2], dg = pi[3] - pj[3], db = pi[4] - pj[4];
                const float s = -((dx * dx + dy * dy) * inv_pos +
                                  (dr * dr + dg * dg + db * db) * inv_rgb);
                score[static_cast<std::size_t>(j)] = s;
                if (s > m) m = s;
            }
            double sum = 0.0, acc = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const double e = std::exp(static_cast<double>(score[static_cast<std::size_t>(j)] - m));
                sum += e;
                acc += e * cur[static_cast<std::size_t>(j)];
            }
            next[static_cast<std::size_t>(i)] = static_cast<float>(acc / sum);
        }
        cur.swap(next);
    }
    return SoftLabel{Tensor({h, w}, std::move(cur))};
}

}  // namespace tarseg
