#pragma once

#include <string>
#include <vector>

#include "tarseg/tensor.hpp"
#include "tarseg/tensor_io.hpp"

namespace tarseg {

// Reserved class ids; real symbols start at kFirstSymbolId.
inline constexpr int kStartId = 0;
inline constexpr int kEndId = 1;
inline constexpr int kPadId = 2;
inline constexpr int kFirstSymbolId = 3;

// Class id <-> printable symbol. Loaded from a UTF-8 text file with one
// symbol per line; line i maps to id kFirstSymbolId + i.
class SymbolTable {
public:
    static SymbolTable builtin();  // the synthetic glyph alphabet
    static SymbolTable load(const std::string& path);
    static SymbolTable from_symbols(std::vector<std::string> symbols);

    int num_classes() const { return kFirstSymbolId + static_cast<int>(symbols_.size()); }
    int alphabet_size() const { return static_cast<int>(symbols_.size()); }
    // Printable form; reserved ids render as <s>, <e>, <p>.
    std::string symbol(int class_id) const;
    // Filename-safe form: the symbol itself if alphanumeric ASCII, else "cNN".
    std::string symbol_tag(int class_id) const;
    int class_of(const std::string& symbol) const;  // -1 if absent

private:
    std::vector<std::string> symbols_;
};

// One recurrent cell layer: gate preactivations W*x + U*h + b with rows
// ordered [input, forget, candidate, output].
struct LstmCellWeights {
    Tensor W;  // [4*Dh, Din]
    Tensor U;  // [4*Dh, Dh]
    Tensor b;  // [4*Dh]

    int hidden() const { return U.dim(1); }
    int input() const { return W.dim(1); }
};

struct LstmState {
    Tensor h, c;  // [Dh] each
};

// Applies one cell step; accumulation in f64, sigmoid gates, tanh candidate.
LstmState lstm_cell(const LstmCellWeights& w, const Tensor& x, const LstmState& prev);

struct RecognizerWeights {
    // 2-layer bidirectional encoder over the width sequence; hidden D/2 per
    // direction so the concatenated state has length D.
    LstmCellWeights enc_fw[2], enc_bw[2];
    LstmCellWeights dec;   // decoder cell, input = embedding dim E, hidden D
    Tensor att_conv;       // [Da, C, 3, 3]; center tap = per-position term, ring = neighbor term
    Tensor att_Wh;         // [Da, D]
    Tensor att_we;         // [Da]
    Tensor proj_Wp;        // [K, D + C], logits from [h_t ; glimpse]
    Tensor embedding;      // [K, E]

    int channels() const { return att_conv.dim(1); }
    int hidden() const { return att_Wh.dim(1); }
    int attn_dim() const { return att_we.dim(0); }
    int embed_dim() const { return embedding.dim(1); }
    int num_classes() const { return proj_Wp.dim(0); }

    static RecognizerWeights seeded(int channels, int hidden, int attn_dim, int embed_dim,
                                    int num_classes, std::uint64_t seed);
    static RecognizerWeights from_archive(const TensorArchive& ar);
    void to_archive(TensorArchive& ar) const;
    void validate() const;
};

struct AttentionStep {
    Tensor attention;  // [H,W], nonnegative, sums to 1
    Tensor glimpse;    // [C]
    Tensor hidden;     // [D]
    Tensor logits;     // [K], pre-softmax
    int symbol = 0;    // greedy argmax class id
};

struct AttentionTrace {
    std::vector<AttentionStep> steps;  // includes the end-token step if reached

    // Decoded symbol ids before the end token.
    std::vector<int> symbols() const;
};

// Holistic feature h_w: max-pool over height to a width-long sequence, run
// the 2-layer bidirectional encoder, concatenate the terminal states of the
// final layer's two directions.
Tensor encode_holistic(const Tensor& fused, const RecognizerWeights& w);

// One attention read: scores from a zero-padded 3x3 conv over the features
// plus a broadcast hidden-state term, tanh, dot with the scoring vector,
// softmax over all positions; glimpse = attention-weighted feature sum.
AttentionStep attention_step(const Tensor& fused, const Tensor& h_t, const RecognizerWeights& w);

// Greedy decode, at most max_steps steps, stopping at the end token (the end
// step itself is kept in the trace). Ties in argmax go to the lowest id.
AttentionTrace decode(const Tensor& fused, const RecognizerWeights& w, int max_steps);

// Sum over ground-truth positions of -log softmax(logits)[gt]. The ground
// truth must be non-empty and no longer than the trace.
double recognition_loss(const AttentionTrace& trace, const std::vector<int>& gt_symbols);

}  // namespace tarseg
