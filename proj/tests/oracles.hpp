#pragma once

// Independent double-precision reference implementations used only by the
// test suites. Everything here is written brute-force from the documented
// contracts in include/tarseg, deliberately sharing no code with src/ so a
// bug must be made twice to slip through. Clarity over speed throughout.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace refimpl {

using Vec = std::vector<double>;

// ---------------------------------------------------------------------------
// Adaptive refinement: one pass of the per-pixel convex re-weighting.
// label is [h*w] row-major; guidance is [cg*h*w] channel-major.
// ---------------------------------------------------------------------------
struct RefineRef {
    int radius = 1;
    double sigma_floor = 1e-4;
    bool include_center = false;
    bool sigma_global = false;
};

inline Vec tar_step_ref(const Vec& label, const Vec& guidance, int h, int w, int cg,
                        const RefineRef& cfg) {
    auto g = [&](int c, int y, int x) -> double {
        return guidance[(static_cast<std::size_t>(c) * h + y) * w + x];
    };

    Vec global_sig2;
    if (cfg.sigma_global) {
        global_sig2.resize(static_cast<std::size_t>(cg));
        const double n = static_cast<double>(h) * w;
        for (int c = 0; c < cg; ++c) {
            double mean = 0.0;
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) mean += g(c, y, x);
            mean /= n;
            double var = 0.0;
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) var += (g(c, y, x) - mean) * (g(c, y, x) - mean);
            var /= n;
            const double sig = std::max(std::sqrt(var), cfg.sigma_floor);
            global_sig2[static_cast<std::size_t>(c)] = sig * sig;
        }
    }

    Vec out(static_cast<std::size_t>(h) * w, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int y0 = std::max(0, y - cfg.radius), y1 = std::min(h - 1, y + cfg.radius);
            const int x0 = std::max(0, x - cfg.radius), x1 = std::min(w - 1, x + cfg.radius);

            // Per-channel population deviation over the window, center
            // included, clamped below and squared.
            Vec sig2(static_cast<std::size_t>(cg), 0.0);
            if (cfg.sigma_global) {
                sig2 = global_sig2;
            } else {
                const double count = static_cast<double>((y1 - y0 + 1) * (x1 - x0 + 1));
                for (int c = 0; c < cg; ++c) {
                    double mean = 0.0;
                    for (int ny = y0; ny <= y1; ++ny)
                        for (int nx = x0; nx <= x1; ++nx) mean += g(c, ny, nx);
                    mean /= count;
                    double var = 0.0;
                    for (int ny = y0; ny <= y1; ++ny)
                        for (int nx = x0; nx <= x1; ++nx)
                            var += (g(c, ny, nx) - mean) * (g(c, ny, nx) - mean);
                    var /= count;
                    const double sig = std::max(std::sqrt(var), cfg.sigma_floor);
                    sig2[static_cast<std::size_t>(c)] = sig * sig;
                }
            }

            // Channel-mean affinity to every neighbor present, softmax over
            // the set actually present (center excluded unless configured),
            // then the convex combination of neighbor label values.
            std::vector<double> aff;
            std::vector<double> nb;
            for (int ny = y0; ny <= y1; ++ny) {
                for (int nx = x0; nx <= x1; ++nx) {
                    if (!cfg.include_center && ny == y && nx == x) continue;
                    double k = 0.0;
                    for (int c = 0; c < cg; ++c)
                        k += -std::abs(g(c, y, x) - g(c, ny, nx)) / sig2[c];
                    aff.push_back(k / cg);
                    nb.push_back(label[static_cast<std::size_t>(ny) * w + nx]);
                }
            }
            double& o = out[static_cast<std::size_t>(y) * w + x];
            if (aff.empty()) {
                o = label[static_cast<std::size_t>(y) * w + x];
                continue;
            }
            const double m = *std::max_element(aff.begin(), aff.end());
            double z = 0.0, acc = 0.0;
            for (std::size_t i = 0; i < aff.size(); ++i) {
                const double e = std::exp(aff[i] - m);
                z += e;
                acc += e * nb[i];
            }
            o = acc / z;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Convolutions and resizing.
// ---------------------------------------------------------------------------

// Cross-correlation with zero padding. input [cin*h*w], weights
// [cout*cin*kh*kw], bias [cout]. Returns [cout*oh*ow] with
// oh = (h + 2*padH - kh)/strideH + 1.
inline Vec conv2d_ref(const Vec& input, int cin, int h, int w, const Vec& weights, int cout,
                      int kh, int kw, const Vec& bias, int strideH, int strideW, int padH,
                      int padW) {
    const int oh = (h + 2 * padH - kh) / strideH + 1;
    const int ow = (w + 2 * padW - kw) / strideW + 1;
    Vec out(static_cast<std::size_t>(cout) * oh * ow, 0.0);
    for (int oc = 0; oc < cout; ++oc) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                double acc = bias[static_cast<std::size_t>(oc)];
                for (int ic = 0; ic < cin; ++ic) {
                    for (int ky = 0; ky < kh; ++ky) {
                        for (int kx = 0; kx < kw; ++kx) {
                            const int iy = oy * strideH - padH + ky;
                            const int ix = ox * strideW - padW + kx;
                            if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
                            acc += input[(static_cast<std::size_t>(ic) * h + iy) * w + ix] *
                                   weights[((static_cast<std::size_t>(oc) * cin + ic) * kh + ky) *
                                               kw +
                                           kx];
                        }
                    }
                }
                out[(static_cast<std::size_t>(oc) * oh + oy) * ow + ox] = acc;
            }
        }
    }
    return out;
}

// Scatter-add transposed convolution. input [cin*h*w], weights
// [cin*cout*kh*kw], bias [cout]. Output spatial size stride*(dim-1)+k.
inline Vec tconv2d_ref(const Vec& input, int cin, int h, int w, const Vec& weights, int cout,
                       int kh, int kw, const Vec& bias, int stride) {
    const int oh = stride * (h - 1) + kh;
    const int ow = stride * (w - 1) + kw;
    Vec out(static_cast<std::size_t>(cout) * oh * ow, 0.0);
    for (int oc = 0; oc < cout; ++oc)
        for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i)
            out[static_cast<std::size_t>(oc) * oh * ow + i] = bias[static_cast<std::size_t>(oc)];
    for (int ic = 0; ic < cin; ++ic) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double v = input[(static_cast<std::size_t>(ic) * h + y) * w + x];
                for (int oc = 0; oc < cout; ++oc) {
                    for (int ky = 0; ky < kh; ++ky) {
                        for (int kx = 0; kx < kw; ++kx) {
                            const int oy = y * stride + ky;
                            const int ox = x * stride + kx;
                            out[(static_cast<std::size_t>(oc) * oh + oy) * ow + ox] +=
                                v * weights[((static_cast<std::size_t>(ic) * cout + oc) * kh +
                                             ky) *
                                                kw +
                                            kx];
                        }
                    }
                }
            }
        }
    }
    return out;
}

// Half-pixel-center bilinear resize of a [c*h*w] block, clamped sampling.
inline Vec bilinear_ref(const Vec& input, int c, int h, int w, int oh, int ow) {
    Vec out(static_cast<std::size_t>(c) * oh * ow, 0.0);
    for (int ch = 0; ch < c; ++ch) {
        for (int oy = 0; oy < oh; ++oy) {
            double sy = (oy + 0.5) * static_cast<double>(h) / oh - 0.5;
            sy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
            const int y0 = static_cast<int>(std::floor(sy));
            const int y1 = std::min(y0 + 1, h - 1);
            const double fy = sy - y0;
            for (int ox = 0; ox < ow; ++ox) {
                double sx = (ox + 0.5) * static_cast<double>(w) / ow - 0.5;
                sx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
                const int x0 = static_cast<int>(std::floor(sx));
                const int x1 = std::min(x0 + 1, w - 1);
                const double fx = sx - x0;
                auto at = [&](int y, int x) {
                    return input[(static_cast<std::size_t>(ch) * h + y) * w + x];
                };
                out[(static_cast<std::size_t>(ch) * oh + oy) * ow + ox] =
                    (1 - fy) * ((1 - fx) * at(y0, x0) + fx * at(y0, x1)) +
                    fy * ((1 - fx) * at(y1, x0) + fx * at(y1, x1));
            }
        }
    }
    return out;
}

inline Vec softmax_ref(const Vec& v) {
    const double m = *std::max_element(v.begin(), v.end());
    Vec out(v.size());
    double z = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) z += std::exp(v[i] - m);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::exp(v[i] - m) / z;
    return out;
}

// ---------------------------------------------------------------------------
// Recurrent cell: gate preactivations a = W x + U h + b with row blocks
// [input, forget, candidate, output]; sigmoid gates, tanh candidate.
// ---------------------------------------------------------------------------
struct LstmRef {
    Vec h, c;
};

inline LstmRef lstm_cell_ref(const Vec& W, const Vec& U, const Vec& b, int din, int dh,
                             const Vec& x, const Vec& h_prev, const Vec& c_prev) {
    auto sigmoid = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    Vec a(static_cast<std::size_t>(4) * dh, 0.0);
    for (int r = 0; r < 4 * dh; ++r) {
        double acc = b[static_cast<std::size_t>(r)];
        for (int j = 0; j < din; ++j) acc += W[static_cast<std::size_t>(r) * din + j] * x[j];
        for (int j = 0; j < dh; ++j) acc += U[static_cast<std::size_t>(r) * dh + j] * h_prev[j];
        a[static_cast<std::size_t>(r)] = acc;
    }
    LstmRef out;
    out.h.resize(static_cast<std::size_t>(dh));
    out.c.resize(static_cast<std::size_t>(dh));
    for (int j = 0; j < dh; ++j) {
        const double i = sigmoid(a[static_cast<std::size_t>(j)]);
        const double f = sigmoid(a[static_cast<std::size_t>(dh + j)]);
        const double g = std::tanh(a[static_cast<std::size_t>(2 * dh + j)]);
        const double o = sigmoid(a[static_cast<std::size_t>(3 * dh + j)]);
        out.c[static_cast<std::size_t>(j)] = f * c_prev[static_cast<std::size_t>(j)] + i * g;
        out.h[static_cast<std::size_t>(j)] = o * std::tanh(out.c[static_cast<std::size_t>(j)]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Losses.
// ---------------------------------------------------------------------------

// -log softmax(logits)[gt], computed directly.
inline double ce_ref(const Vec& logits, int gt) {
    const double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (const double v : logits) z += std::exp(v - m);
    return -(logits[static_cast<std::size_t>(gt)] - m - std::log(z));
}

// Mean-over-pixels binary cross entropy, predictions clamped to
// [eps, 1-eps]; summed over instances by the caller.
inline double bce_ref(const Vec& pred, const Vec& target, double eps = 1e-7) {
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double q = std::clamp(pred[i], eps, 1.0 - eps);
        acc += -(target[i] * std::log(q) + (1.0 - target[i]) * std::log(1.0 - q));
    }
    return acc / static_cast<double>(pred.size());
}

inline double cosine_ref(const Vec& a, const Vec& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Direct (unshifted) InfoNCE term: the score magnitudes in these tests are
// far from overflow so the naive form is exact enough for a 1e-9 gate.
inline double nce_ref(const Vec& pi, const Vec& pp, const std::vector<Vec>& negatives,
                      double tau, bool include_positive) {
    const double s_pos = cosine_ref(pi, pp) / tau;
    double z = include_positive ? std::exp(s_pos) : 0.0;
    for (const Vec& n : negatives) z += std::exp(cosine_ref(pi, n) / tau);
    return -(s_pos - std::log(z));
}

// Symmetric batch sum; item i's negatives are the raw-image projections of
// every other item, for both directions of the pair.
inline double contrastive_ref(const std::vector<Vec>& pi, const std::vector<Vec>& pp,
                              double tau, bool include_positive) {
    double total = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) {
        std::vector<Vec> negatives;
        for (std::size_t j = 0; j < pi.size(); ++j)
            if (j != i) negatives.push_back(pi[j]);
        total += nce_ref(pi[i], pp[i], negatives, tau, include_positive);
        total += nce_ref(pp[i], pi[i], negatives, tau, include_positive);
    }
    return total;
}

// Central finite difference of a scalar function of one coordinate.
inline double central_diff(const std::function<double(double)>& f, double x0,
                           double h = 1e-5) {
    return (f(x0 + h) - f(x0 - h)) / (2.0 * h);
}

// ---------------------------------------------------------------------------
// Metric and voting.
// ---------------------------------------------------------------------------

inline double fiou_ref(const Vec& pred, const Vec& gt) {
    double inter = 0.0, uni = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i] > 0.5, g = gt[i] > 0.5;
        inter += (p && g) ? 1.0 : 0.0;
        uni += (p || g) ? 1.0 : 0.0;
    }
    return uni == 0.0 ? 1.0 : inter / uni;
}

// Pixelwise two-of-three majority over binary maps of identical size.
inline Vec majority_ref(const Vec& a, const Vec& b, const Vec& c) {
    Vec out(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const int n = (a[i] > 0.5 ? 1 : 0) + (b[i] > 0.5 ? 1 : 0) + (c[i] > 0.5 ? 1 : 0);
        out[i] = n >= 2 ? 1.0 : 0.0;
    }
    return out;
}

}  // namespace refimpl
