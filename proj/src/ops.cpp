#include "tarseg/ops.hpp"

#include <algorithm>
#include <cmath>

namespace tarseg {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw ShapeError(msg);
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias, int strideH,
              int strideW, int padH, int padW) {
    require(input.rank() == 3, "conv2d: input must be [C,H,W], got " + input.shape_str());
    require(weights.rank() == 4,
            "conv2d: weights must be [Cout,Cin,kH,kW], got " + weights.shape_str());
    require(bias.rank() == 1, "conv2d: bias must be [Cout], got " + bias.shape_str());
    const int cin = input.dim(0), h = input.dim(1), w = input.dim(2);
    const int cout = weights.dim(0), kh = weights.dim(2), kw = weights.dim(3);
    require(weights.dim(1) == cin, "conv2d: weight Cin " + std::to_string(weights.dim(1)) +
                                       " does not match input channels " + std::to_string(cin));
    require(bias.dim(0) == cout, "conv2d: bias length " + std::to_string(bias.dim(0)) +
                                     " does not match Cout " + std::to_string(cout));
    if (strideH < 1 || strideW < 1) throw ConfigError("conv2d: stride must be >= 1");
    if (padH < 0 || padW < 0) throw ConfigError("conv2d: padding must be >= 0");
    require(h + 2 * padH >= kh && w + 2 * padW >= kw,
            "conv2d: kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                " does not fit padded input " + std::to_string(h + 2 * padH) + "x" +
                std::to_string(w + 2 * padW));

    const int oh = (h + 2 * padH - kh) / strideH + 1;
    const int ow = (w + 2 * padW - kw) / strideW + 1;
    Tensor out({cout, oh, ow});
    for (int oc = 0; oc < cout; ++oc) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                double acc = bias(oc);
                const int y0 = oy * strideH - padH;
                const int x0 = ox * strideW - padW;
                for (int ic = 0; ic < cin; ++ic) {
                    for (int ky = 0; ky < kh; ++ky) {
                        const int y = y0 + ky;
                        if (y < 0 || y >= h) continue;
                        for (int kx = 0; kx < kw; ++kx) {
                            const int x = x0 + kx;
                            if (x < 0 || x >= w) continue;
                            acc += static_cast<double>(weights(oc, ic, ky, kx)) * input(ic, y, x);
                        }
                    }
                }
                out(oc, oy, ox) = static_cast<float>(acc);
            }
        }
    }
    return out;
}

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias, int stride,
              int padding) {
    return conv2d(input, weights, bias, stride, stride, padding, padding);
}

Tensor transposed_conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
                         int stride) {
    require(input.rank() == 3,
            "transposed_conv2d: input must be [C,H,W], got " + input.shape_str());
    require(weights.rank() == 4,
            "transposed_conv2d: weights must be [Cin,Cout,kH,kW], got " + weights.shape_str());
    require(bias.rank() == 1, "transposed_conv2d: bias must be [Cout], got " + bias.shape_str());
    const int cin = input.dim(0), h = input.dim(1), w = input.dim(2);
    const int cout = weights.dim(1), kh = weights.dim(2), kw = weights.dim(3);
    require(weights.dim(0) == cin,
            "transposed_conv2d: weight Cin " + std::to_string(weights.dim(0)) +
                " does not match input channels " + std::to_string(cin));
    require(bias.dim(0) == cout, "transposed_conv2d: bias length mismatch");
    if (stride < 1) throw ConfigError("transposed_conv2d: stride must be >= 1");

    const int oh = stride * (h - 1) + kh;
    const int ow = stride * (w - 1) + kw;
    std::vector<double> acc(static_cast<std::size_t>(cout) * oh * ow, 0.0);
    for (int oc = 0; oc < cout; ++oc) {
        double* plane = acc.data() + static_cast<std::size_t>(oc) * oh * ow;
        for (int i = 0; i < oh * ow; ++i) plane[i] = bias(oc);
    }
    for (int ic = 0; ic < cin; ++ic) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double v = input(ic, y, x);
                if (v == 0.0) continue;
                for (int oc = 0; oc < cout; ++oc) {
                    double* plane = acc.data() + static_cast<std::size_t>(oc) * oh * ow;
                    for (int ky = 0; ky < kh; ++ky) {
                        double* row = plane + static_cast<std::size_t>(y * stride + ky) * ow;
                        for (int kx = 0; kx < kw; ++kx) {
                            row[x * stride + kx] += v * weights(ic, oc, ky, kx);
                        }
                    }
                }
            }
        }
    }
    Tensor out({cout, oh, ow});
    for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<float>(acc[i]);
    return out;
}

Tensor resize_bilinear(const Tensor& input, int outH, int outW) {
    if (input.rank() == 2) {
        Tensor wrapped({1, input.dim(0), input.dim(1)}, input.vec());
        Tensor r = resize_bilinear(wrapped, outH, outW);
        return Tensor({outH, outW}, r.vec());
    }
    require(input.rank() == 3,
            "resize_bilinear: input must be [C,H,W] or [H,W], got " + input.shape_str());
    if (outH < 1 || outW < 1) throw ConfigError("resize_bilinear: output dims must be >= 1");
    const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
    if (outH == h && outW == w) return input;

    Tensor out({c, outH, outW});
    const double scaleY = static_cast<double>(h) / outH;
    const double scaleX = static_cast<double>(w) / outW;
    for (int oy = 0; oy < outH; ++oy) {
        double sy = (oy + 0.5) * scaleY - 0.5;
        sy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
        const int y0 = static_cast<int>(sy);
        const int y1 = std::min(y0 + 1, h - 1);
        const double fy = sy - y0;
        for (int ox = 0; ox < outW; ++ox) {
            double sx = (ox + 0.5) * scaleX - 0.5;
            sx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
            const int x0 = static_cast<int>(sx);
            const int x1 = std::min(x0 + 1, w - 1);
            const double fx = sx - x0;
            for (int ic = 0; ic < c; ++ic) {
                const double top = input(ic, y0, x0) + fx * (input(ic, y0, x1) - input(ic, y0, x0));
                const double bot = input(ic, y1, x0) + fx * (input(ic, y1, x1) - input(ic, y1, x0));
                out(ic, oy, ox) = static_cast<float>(top + fy * (bot - top));
            }
        }
    }
    return out;
}

Tensor softmax(const Tensor& input, int axis) {
    if (axis < 0 || axis >= input.rank())
        throw ShapeError("softmax: axis " + std::to_string(axis) + " out of range for rank " +
                         std::to_string(input.rank()));
    const auto& shape = input.shape();
    std::size_t inner = 1, outer = 1;
    for (int i = 0; i < axis; ++i) outer *= static_cast<std::size_t>(shape[i]);
    for (int i = axis + 1; i < input.rank(); ++i) inner *= static_cast<std::size_t>(shape[i]);
    const std::size_t n = static_cast<std::size_t>(shape[axis]);

    Tensor out(input.shape());
    const float* src = input.data();
    float* dst = out.data();
    std::vector<double> e(n);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * n * inner + in;
            double m = src[base];
            for (std::size_t k = 1; k < n; ++k)
                m = std::max(m, static_cast<double>(src[base + k * inner]));
            double sum = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                e[k] = std::exp(static_cast<double>(src[base + k * inner]) - m);
                sum += e[k];
            }
            for (std::size_t k = 0; k < n; ++k)
                dst[base + k * inner] = static_cast<float>(e[k] / sum);
        }
    }
    return out;
}

Tensor tanh_map(const Tensor& input) {
    Tensor out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) out[i] = std::tanh(input[i]);
    return out;
}

Tensor sigmoid_map(const Tensor& input) {
    Tensor out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i)
        out[i] = static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(input[i]))));
    return out;
}

Tensor relu_map(const Tensor& input) {
    Tensor out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] > 0.0f ? input[i] : 0.0f;
    return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require(a.rank() == 2 && b.rank() == 2, "matmul: both operands must be rank 2");
    require(a.dim(1) == b.dim(0), "matmul: inner dims " + std::to_string(a.dim(1)) + " vs " +
                                      std::to_string(b.dim(0)) + " do not match");
    const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor out({m, n});
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int t = 0; t < k; ++t) acc += static_cast<double>(a(i, t)) * b(t, j);
            out(i, j) = static_cast<float>(acc);
        }
    }
    return out;
}

Tensor matvec(const Tensor& a, const Tensor& x) {
    require(a.rank() == 2 && x.rank() == 1, "matvec: expected [m,k] and [k]");
    require(a.dim(1) == x.dim(0), "matvec: inner dims do not match");
    const int m = a.dim(0), k = a.dim(1);
    Tensor out({m});
    for (int i = 0; i < m; ++i) {
        double acc = 0.0;
        for (int t = 0; t < k; ++t) acc += static_cast<double>(a(i, t)) * x(t);
        out(i) = static_cast<float>(acc);
    }
    return out;
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
    if (parts.empty()) throw ConfigError("concat: no tensors given");
    const int rank = parts[0].rank();
    if (axis < 0 || axis >= rank)
        throw ConfigError("concat: axis " + std::to_string(axis) + " out of range");
    int axisTotal = 0;
    for (const auto& p : parts) {
        require(p.rank() == rank, "concat: rank mismatch");
        for (int d = 0; d < rank; ++d) {
            if (d != axis)
                require(p.dim(d) == parts[0].dim(d),
                        "concat: non-axis dim " + std::to_string(d) + " mismatch");
        }
        axisTotal += p.dim(axis);
    }
    std::vector<int> shape = parts[0].shape();
    shape[static_cast<std::size_t>(axis)] = axisTotal;
    Tensor out(shape);

    std::size_t inner = 1, outer = 1;
    for (int i = 0; i < axis; ++i) outer *= static_cast<std::size_t>(shape[i]);
    for (int i = axis + 1; i < rank; ++i) inner *= static_cast<std::size_t>(shape[i]);

    std::size_t axisOffset = 0;
    for (const auto& p : parts) {
        const std::size_t pAxis = static_cast<std::size_t>(p.dim(axis));
        for (std::size_t o = 0; o < outer; ++o) {
            const float* src = p.data() + o * pAxis * inner;
            float* dst = out.data() + (o * static_cast<std::size_t>(axisTotal) + axisOffset) * inner;
            std::copy(src, src + pAxis * inner, dst);
        }
        axisOffset += pAxis;
    }
    return out;
}

Tensor max_pool(const Tensor& input, int kH, int kW, int strideH, int strideW) {
    require(input.rank() == 3, "max_pool: input must be [C,H,W]");
    const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
    if (kH < 1 || kW < 1 || strideH < 1 || strideW < 1)
        throw ConfigError("max_pool: kernel and stride must be >= 1");
    require(kH <= h && kW <= w, "max_pool: kernel larger than input");
    const int oh = (h - kH) / strideH + 1;
    const int ow = (w - kW) / strideW + 1;
    Tensor out({c, oh, ow});
    for (int ic = 0; ic < c; ++ic) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                float m = input(ic, oy * strideH, ox * strideW);
                for (int ky = 0; ky < kH; ++ky)
                    for (int kx = 0; kx < kW; ++kx)
                        m = std::max(m, input(ic, oy * strideH + ky, ox * strideW + kx));
                out(ic, oy, ox) = m;
            }
        }
    }
    return out;
}

}  // namespace tarseg
