#include "tarseg/contrastive.hpp"

#include <cmath>

#include "tarseg/ops.hpp"
#include "tarseg/rng.hpp"

namespace tarseg {

namespace {

double norm(const VecD& a) {
    double s = 0.0;
    for (const double v : a) s += v * v;
    return std::sqrt(s);
}

void check_batch(const BatchD& batch) {
    if (batch.pi.size() != batch.pp.size())
        throw ShapeError("contrastive batch: pi/pp counts differ");
    if (batch.pi.size() < 2)
        throw ConfigError("contrastive batch needs at least 2 items so negatives exist");
    const std::size_t d = batch.pi[0].size();
    for (const auto& v : batch.pi)
        if (v.size() != d) throw ShapeError("contrastive batch: projection lengths differ");
    for (const auto& v : batch.pp)
        if (v.size() != d) throw ShapeError("contrastive batch: projection lengths differ");
}

// Accumulates lambda * d sim(a,b)/d a into out_a and the symmetric term into
// out_b. sim is the cosine, so d/da = b/(|a||b|) - sim * a/|a|^2.
void add_sim_grad(const VecD& a, const VecD& b, double lambda, VecD& out_a, VecD& out_b) {
    const double na = norm(a), nb = norm(b);
    double dot = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
    const double s = dot / (na * nb);
    for (std::size_t k = 0; k < a.size(); ++k) {
        out_a[k] += lambda * (b[k] / (na * nb) - s * a[k] / (na * na));
        out_b[k] += lambda * (a[k] / (na * nb) - s * b[k] / (nb * nb));
    }
}

}  // namespace

ProjectionWeights ProjectionWeights::seeded(int channels, int proj_dim, std::uint64_t seed) {
    if (channels < 1 || proj_dim < 2)
        throw ConfigError("projection needs channels >= 1 and output dim >= 2");
    Rng rng = Rng::stream(seed, 40);
    ProjectionWeights w;
    w.weight = Tensor({proj_dim, channels});
    const float scale = 1.0f / std::sqrt(static_cast<float>(channels));
    for (auto& v : w.weight.vec()) v = static_cast<float>(rng.normal()) * scale;
    w.bias = Tensor({proj_dim});
    return w;
}

ProjectionWeights ProjectionWeights::from_archive(const TensorArchive& ar) {
    ProjectionWeights w;
    w.weight = ar.get("proj.weight");
    w.bias = ar.get("proj.bias");
    return w;
}

void ProjectionWeights::to_archive(TensorArchive& ar) const {
    ar.put("proj.weight", weight);
    ar.put("proj.bias", bias);
}

Tensor project(const Tensor& image, const BackboneWeights& backbone, const ProjectionWeights& w) {
    const FeaturePyramid pyr = extract_pyramid(image, backbone);
    const Tensor& f = pyr.f3;
    const int c = f.dim(0);
    if (w.weight.dim(1) != c)
        throw ShapeError("project: projection expects " + std::to_string(w.weight.dim(1)) +
                         " channels, backbone yields " + std::to_string(c));
    Tensor pooled({c});
    const std::size_t area = static_cast<std::size_t>(f.dim(1)) * f.dim(2);
    for (int ic = 0; ic < c; ++ic) {
        double acc = 0.0;
        const float* p = f.data() + static_cast<std::size_t>(ic) * area;
        for (std::size_t i = 0; i < area; ++i) acc += p[i];
        pooled(ic) = static_cast<float>(acc / static_cast<double>(area));
    }
    Tensor out = matvec(w.weight, pooled);
    for (int j = 0; j < out.dim(0); ++j) out(j) += w.bias(j);
    return out;
}

VecD to_vecd(const Tensor& t) { return VecD(t.vec().begin(), t.vec().end()); }

double cosine_sim(const VecD& a, const VecD& b) {
    if (a.size() != b.size()) throw ShapeError("cosine_sim: lengths differ");
    if (a.empty()) throw ShapeError("cosine_sim: empty vectors");
    const double na = norm(a), nb = norm(b);
    if (na == 0.0 || nb == 0.0)
        throw DegenerateInputError("cosine_sim: zero-norm projection has no direction");
    double dot = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
    return dot / (na * nb);
}

double l_nce(const VecD& pi, const VecD& pp, const std::vector<VecD>& negatives, double tau,
             bool include_positive) {
    if (!(tau > 0.0)) throw ConfigError("l_nce: temperature must be > 0");
    if (negatives.empty()) throw ConfigError("l_nce: at least one negative required");
    const double s_pos = cosine_sim(pi, pp) / tau;
    double m = include_positive ? s_pos : -1e300;
    std::vector<double> s_neg(negatives.size());
    for (std::size_t j = 0; j < negatives.size(); ++j) {
        s_neg[j] = cosine_sim(pi, negatives[j]) / tau;
        m = std::max(m, s_neg[j]);
    }
    double z = include_positive ? std::exp(s_pos - m) : 0.0;
    for (const double s : s_neg) z += std::exp(s - m);
    return -(s_pos - m - std::log(z));
}

double contrastive_loss(const BatchD& batch, double tau, bool include_positive) {
    check_batch(batch);
    const std::size_t n = batch.pi.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<VecD> negatives;
        negatives.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) negatives.push_back(batch.pi[j]);
        total += l_nce(batch.pi[i], batch.pp[i], negatives, tau, include_positive);
        total += l_nce(batch.pp[i], batch.pi[i], negatives, tau, include_positive);
    }
    return total;
}

BatchGrad contrastive_grad(const BatchD& batch, double tau, bool include_positive) {
    check_batch(batch);
    if (!(tau > 0.0)) throw ConfigError("contrastive_grad: temperature must be > 0");
    const std::size_t n = batch.pi.size();
    const std::size_t d = batch.pi[0].size();
    for (const auto& v : batch.pi)
        if (norm(v) == 0.0) throw DegenerateInputError("contrastive_grad: zero-norm projection");
    for (const auto& v : batch.pp)
        if (norm(v) == 0.0) throw DegenerateInputError("contrastive_grad: zero-norm projection");

    BatchGrad g;
    g.d_pi.assign(n, VecD(d, 0.0));
    g.d_pp.assign(n, VecD(d, 0.0));

    // One l_nce term with anchor a and positive p. Negatives are always the
    // raw-image projections of the other items.
    auto accumulate = [&](const VecD& a, VecD& da, const VecD& p, VecD& dp, std::size_t skip) {
        const double s_pos = cosine_sim(a, p) / tau;
        std::vector<double> s(n, 0.0);
        double m = include_positive ? s_pos : -1e300;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == skip) continue;
            s[j] = cosine_sim(a, batch.pi[j]) / tau;
            m = std::max(m, s[j]);
        }
        double z = include_positive ? std::exp(s_pos - m) : 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != skip) z += std::exp(s[j] - m);

        // d loss / d s_pos and d loss / d s_j in similarity units.
        const double w_pos = include_positive ? std::exp(s_pos - m) / z : 0.0;
        add_sim_grad(a, p, (-1.0 + w_pos) / tau, da, dp);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == skip) continue;
            const double w = std::exp(s[j] - m) / z;
            add_sim_grad(a, batch.pi[j], w / tau, da, g.d_pi[j]);
        }
    };

    for (std::size_t i = 0; i < n; ++i) {
        accumulate(batch.pi[i], g.d_pi[i], batch.pp[i], g.d_pp[i], i);
        accumulate(batch.pp[i], g.d_pp[i], batch.pi[i], g.d_pi[i], i);
    }
    return g;
}

double total_loss(double l_seg, double l_rec, double l_c, double lambda_rec, double lambda_c) {
    if (lambda_rec < 0.0 || lambda_c < 0.0)
        throw ConfigError("total_loss: loss weights must be >= 0");
    return l_seg + lambda_rec * l_rec + lambda_c * l_c;
}

}  // namespace tarseg
