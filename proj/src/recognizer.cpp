#include "tarseg/recognizer.hpp"

#include <cctype>
#include <cmath>
#include <fstream>

#include "tarseg/ops.hpp"
#include "tarseg/rng.hpp"

namespace tarseg {

namespace {

constexpr const char* kBuiltinAlphabet = "OCDILTHUXZ";

Tensor xavier(std::vector<int> shape, Rng& rng) {
    Tensor t(std::move(shape));
    std::size_t fan_in = 1;
    for (int i = 1; i < t.rank(); ++i) fan_in *= static_cast<std::size_t>(t.dim(i));
    const float scale = 1.0f / std::sqrt(static_cast<float>(fan_in));
    for (auto& v : t.vec()) v = static_cast<float>(rng.normal()) * scale;
    return t;
}

LstmCellWeights seeded_cell(int din, int dh, Rng& rng) {
    LstmCellWeights w;
    w.W = xavier({4 * dh, din}, rng);
    w.U = xavier({4 * dh, dh}, rng);
    w.b = Tensor({4 * dh});
    return w;
}

void check_cell(const LstmCellWeights& w, int din, int dh, const std::string& name) {
    if (w.W.rank() != 2 || w.U.rank() != 2 || w.b.rank() != 1 || w.W.dim(0) != 4 * dh ||
        w.W.dim(1) != din || w.U.dim(0) != 4 * dh || w.U.dim(1) != dh || w.b.dim(0) != 4 * dh)
        throw ShapeError("recognizer weights: cell '" + name + "' shapes are inconsistent (want W[" +
                         std::to_string(4 * dh) + "," + std::to_string(din) + "], U[" +
                         std::to_string(4 * dh) + "," + std::to_string(dh) + "])");
}

void put_cell(TensorArchive& ar, const std::string& prefix, const LstmCellWeights& w) {
    ar.put(prefix + ".W", w.W);
    ar.put(prefix + ".U", w.U);
    ar.put(prefix + ".b", w.b);
}

LstmCellWeights get_cell(const TensorArchive& ar, const std::string& prefix) {
    LstmCellWeights w;
    w.W = ar.get(prefix + ".W");
    w.U = ar.get(prefix + ".U");
    w.b = ar.get(prefix + ".b");
    return w;
}

}  // namespace

SymbolTable SymbolTable::builtin() {
    std::vector<std::string> syms;
    for (const char* p = kBuiltinAlphabet; *p; ++p) syms.emplace_back(1, *p);
    return from_symbols(std::move(syms));
}

SymbolTable SymbolTable::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open symbol table " + path);
    std::vector<std::string> syms;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        syms.push_back(line);
    }
    if (syms.empty()) throw ConfigError("symbol table " + path + " has no symbols");
    return from_symbols(std::move(syms));
}

SymbolTable SymbolTable::from_symbols(std::vector<std::string> symbols) {
    if (symbols.empty()) throw ConfigError("symbol table needs at least one symbol");
    SymbolTable t;
    t.symbols_ = std::move(symbols);
    return t;
}

std::string SymbolTable::symbol(int class_id) const {
    if (class_id == kStartId) return "<s>";
    if (class_id == kEndId) return "<e>";
    if (class_id == kPadId) return "<p>";
    const int i = class_id - kFirstSymbolId;
    if (i < 0 || i >= alphabet_size())
        throw ConfigError("class id " + std::to_string(class_id) + " outside symbol table");
    return symbols_[static_cast<std::size_t>(i)];
}

std::string SymbolTable::symbol_tag(int class_id) const {
    const std::string s = symbol(class_id);
    if (s.size() == 1 && std::isalnum(static_cast<unsigned char>(s[0]))) return s;
    return "c" + std::to_string(class_id);
}

int SymbolTable::class_of(const std::string& symbol) const {
    for (std::size_t i = 0; i < symbols_.size(); ++i)
        if (symbols_[i] == symbol) return kFirstSymbolId + static_cast<int>(i);
    return -1;
}

LstmState lstm_cell(const LstmCellWeights& w, const Tensor& x, const LstmState& prev) {
    const int dh = w.hidden();
    const int din = w.input();
    if (x.dim(0) != din)
        throw ShapeError("lstm_cell: input length " + std::to_string(x.dim(0)) +
                         " does not match cell input size " + std::to_string(din));
    if (prev.h.dim(0) != dh || prev.c.dim(0) != dh)
        throw ShapeError("lstm_cell: state length does not match hidden size");

    LstmState out{Tensor({dh}), Tensor({dh})};
    for (int j = 0; j < dh; ++j) {
        double gates[4];
        for (int g = 0; g < 4; ++g) {
            const int row = g * dh + j;
            double acc = w.b(row);
            for (int t = 0; t < din; ++t) acc += static_cast<double>(w.W(row, t)) * x(t);
            for (int t = 0; t < dh; ++t) acc += static_cast<double>(w.U(row, t)) * prev.h(t);
            gates[g] = acc;
        }
        const double i = 1.0 / (1.0 + std::exp(-gates[0]));
        const double f = 1.0 / (1.0 + std::exp(-gates[1]));
        const double g = std::tanh(gates[2]);
        const double o = 1.0 / (1.0 + std::exp(-gates[3]));
        const double c = f * prev.c(j) + i * g;
        out.c(j) = static_cast<float>(c);
        out.h(j) = static_cast<float>(o * std::tanh(c));
    }
    return out;
}

RecognizerWeights RecognizerWeights::seeded(int channels, int hidden, int attn_dim, int embed_dim,
                                            int num_classes, std::uint64_t seed) {
    if (hidden % 2 != 0) throw ConfigError("recognizer hidden size must be even, got " +
                                           std::to_string(hidden));
    if (channels < 1 || attn_dim < 1 || embed_dim < 1)
        throw ConfigError("recognizer dimensions must be positive");
    if (num_classes <= kFirstSymbolId)
        throw ConfigError("recognizer needs at least one non-reserved class");
    Rng rng = Rng::stream(seed, 20);
    RecognizerWeights w;
    const int dh = hidden / 2;
    w.enc_fw[0] = seeded_cell(channels, dh, rng);
    w.enc_bw[0] = seeded_cell(channels, dh, rng);
    w.enc_fw[1] = seeded_cell(hidden, dh, rng);
    w.enc_bw[1] = seeded_cell(hidden, dh, rng);
    w.dec = seeded_cell(embed_dim, hidden, rng);
    w.att_conv = xavier({attn_dim, channels, 3, 3}, rng);
    w.att_Wh = xavier({attn_dim, hidden}, rng);
    w.att_we = xavier({attn_dim}, rng);
    for (auto& v : w.att_we.vec()) v *= std::sqrt(static_cast<float>(attn_dim));
    w.proj_Wp = xavier({num_classes, hidden + channels}, rng);
    w.embedding = xavier({num_classes, embed_dim}, rng);
    for (auto& v : w.embedding.vec()) v *= std::sqrt(static_cast<float>(embed_dim));
    return w;
}

RecognizerWeights RecognizerWeights::from_archive(const TensorArchive& ar) {
    RecognizerWeights w;
    for (int l = 0; l < 2; ++l) {
        const std::string p = "rec.enc.l" + std::to_string(l + 1);
        w.enc_fw[l] = get_cell(ar, p + ".fw");
        w.enc_bw[l] = get_cell(ar, p + ".bw");
    }
    w.dec = get_cell(ar, "rec.dec");
    w.att_conv = ar.get("rec.att.conv");
    w.att_Wh = ar.get("rec.att.Wh");
    w.att_we = ar.get("rec.att.we");
    w.proj_Wp = ar.get("rec.proj.Wp");
    w.embedding = ar.get("rec.emb.table");
    w.validate();
    return w;
}

void RecognizerWeights::to_archive(TensorArchive& ar) const {
    for (int l = 0; l < 2; ++l) {
        const std::string p = "rec.enc.l" + std::to_string(l + 1);
        put_cell(ar, p + ".fw", enc_fw[l]);
        put_cell(ar, p + ".bw", enc_bw[l]);
    }
    put_cell(ar, "rec.dec", dec);
    ar.put("rec.att.conv", att_conv);
    ar.put("rec.att.Wh", att_Wh);
    ar.put("rec.att.we", att_we);
    ar.put("rec.proj.Wp", proj_Wp);
    ar.put("rec.emb.table", embedding);
}

void RecognizerWeights::validate() const {
    if (att_conv.rank() != 4 || att_conv.dim(2) != 3 || att_conv.dim(3) != 3)
        throw ShapeError("recognizer weights: attention conv must be [Da,C,3,3]");
    const int c = channels(), d = hidden(), da = attn_dim(), e = embed_dim(), k = num_classes();
    if (d % 2 != 0) throw ShapeError("recognizer weights: hidden size must be even");
    const int dh = d / 2;
    check_cell(enc_fw[0], c, dh, "enc.l1.fw");
    check_cell(enc_bw[0], c, dh, "enc.l1.bw");
    check_cell(enc_fw[1], d, dh, "enc.l2.fw");
    check_cell(enc_bw[1], d, dh, "enc.l2.bw");
    check_cell(dec, e, d, "dec");
    if (att_conv.dim(0) != da || att_Wh.dim(0) != da)
        throw ShapeError("recognizer weights: attention dims are inconsistent");
    if (proj_Wp.rank() != 2 || proj_Wp.dim(1) != d + c)
        throw ShapeError("recognizer weights: output projection must be [K, D+C]");
    if (embedding.rank() != 2 || embedding.dim(0) != k)
        throw ShapeError("recognizer weights: embedding table must have one row per class");
    if (k <= kFirstSymbolId)
        throw ShapeError("recognizer weights: class count leaves no room for real symbols");
}

std::vector<int> AttentionTrace::symbols() const {
    std::vector<int> out;
    for (const auto& s : steps) {
        if (s.symbol == kEndId) break;
        out.push_back(s.symbol);
    }
    return out;
}

Tensor encode_holistic(const Tensor& fused, const RecognizerWeights& w) {
    if (fused.rank() != 3) throw ShapeError("encode_holistic: expected [C,H,W] features");
    const int c = fused.dim(0), h = fused.dim(1), wd = fused.dim(2);
    if (c != w.channels())
        throw ShapeError("encode_holistic: feature channels " + std::to_string(c) +
                         " do not match weights (" + std::to_string(w.channels()) + ")");

    // Collapse height by max, leaving a width-long sequence of C-vectors.
    const Tensor pooled = max_pool(fused, h, 1, h, 1);  // [C, 1, W]
    std::vector<Tensor> seq(static_cast<std::size_t>(wd), Tensor({c}));
    for (int t = 0; t < wd; ++t)
        for (int ic = 0; ic < c; ++ic) seq[static_cast<std::size_t>(t)](ic) = pooled(ic, 0, t);

    const int dh = w.hidden() / 2;
    Tensor h_last;
    for (int layer = 0; layer < 2; ++layer) {
        std::vector<Tensor> fw_h(seq.size()), bw_h(seq.size());
        LstmState fw{Tensor({dh}), Tensor({dh})};
        for (std::size_t t = 0; t < seq.size(); ++t) {
            fw = lstm_cell(w.enc_fw[layer], seq[t], fw);
            fw_h[t] = fw.h;
        }
        LstmState bw{Tensor({dh}), Tensor({dh})};
        for (std::size_t t = seq.size(); t-- > 0;) {
            bw = lstm_cell(w.enc_bw[layer], seq[t], bw);
            bw_h[t] = bw.h;
        }
        for (std::size_t t = 0; t < seq.size(); ++t) seq[t] = concat({fw_h[t], bw_h[t]}, 0);
        h_last = concat({fw.h, bw.h}, 0);  // terminal states of both directions
    }
    return h_last;
}

AttentionStep attention_step(const Tensor& fused, const Tensor& h_t, const RecognizerWeights& w) {
    if (fused.rank() != 3) throw ShapeError("attention_step: expected [C,H,W] features");
    if (fused.dim(0) != w.channels())
        throw ShapeError("attention_step: feature channel mismatch");
    if (h_t.dim(0) != w.hidden()) throw ShapeError("attention_step: hidden state length mismatch");
    const int c = fused.dim(0), h = fused.dim(1), wd = fused.dim(2);
    const int da = w.attn_dim();

    Tensor scores = conv2d(fused, w.att_conv, Tensor({da}), 1, 1);  // [Da,H,W], zero bias
    const Tensor hterm = matvec(w.att_Wh, h_t);                     // [Da]
    Tensor s({h, wd});
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < wd; ++x) {
            double acc = 0.0;
            for (int d = 0; d < da; ++d)
                acc += static_cast<double>(w.att_we(d)) *
                       std::tanh(static_cast<double>(scores(d, y, x)) + hterm(d));
            s(y, x) = static_cast<float>(acc);
        }
    }
    AttentionStep step;
    step.attention = Tensor({h, wd}, softmax(Tensor({h * wd}, s.vec()), 0).vec());
    step.glimpse = Tensor({c});
    for (int ic = 0; ic < c; ++ic) {
        double acc = 0.0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < wd; ++x)
                acc += static_cast<double>(step.attention(y, x)) * fused(ic, y, x);
        step.glimpse(ic) = static_cast<float>(acc);
    }
    step.hidden = h_t;
    return step;
}

AttentionTrace decode(const Tensor& fused, const RecognizerWeights& w, int max_steps) {
    if (max_steps < 1) throw ConfigError("decode: max_steps must be >= 1");
    const int d = w.hidden();
    const int e = w.embed_dim();

    AttentionTrace trace;
    LstmState state{encode_holistic(fused, w), Tensor({d})};
    int prev_symbol = kStartId;
    for (int t = 0; t < max_steps; ++t) {
        Tensor x({e});
        for (int j = 0; j < e; ++j) x(j) = w.embedding(prev_symbol, j);
        state = lstm_cell(w.dec, x, state);

        AttentionStep step = attention_step(fused, state.h, w);
        step.logits = matvec(w.proj_Wp, concat({state.h, step.glimpse}, 0));
        int best = 0;
        for (int k = 1; k < step.logits.dim(0); ++k)
            if (step.logits(k) > step.logits(best)) best = k;  // ties keep the lowest id
        step.symbol = best;
        trace.steps.push_back(std::move(step));

        if (best == kEndId) break;
        prev_symbol = best;
    }
    return trace;
}

double recognition_loss(const AttentionTrace& trace, const std::vector<int>& gt_symbols) {
    if (gt_symbols.empty()) throw ConfigError("recognition_loss: ground truth is empty");
    if (gt_symbols.size() > trace.steps.size())
        throw ConfigError("recognition_loss: ground truth longer than the trace (" +
                          std::to_string(gt_symbols.size()) + " vs " +
                          std::to_string(trace.steps.size()) + ")");
    double loss = 0.0;
    for (std::size_t t = 0; t < gt_symbols.size(); ++t) {
        const Tensor& logits = trace.steps[t].logits;
        const int k = logits.dim(0);
        const int gt = gt_symbols[t];
        if (gt < 0 || gt >= k)
            throw ConfigError("recognition_loss: ground-truth id " + std::to_string(gt) +
                              " outside class range");
        double m = logits(0);
        for (int i = 1; i < k; ++i) m = std::max(m, static_cast<double>(logits(i)));
        double sum = 0.0;
        for (int i = 0; i < k; ++i) sum += std::exp(static_cast<double>(logits(i)) - m);
        loss += -(static_cast<double>(logits(gt)) - m - std::log(sum));
    }
    return loss;
}

}  // namespace tarseg
