#pragma once

#include <optional>
#include <random>
#include <vector>

#include "codebook.hpp"
#include "corpus.hpp"
#include "layers.hpp"

namespace fvn {

// Static dimensions and switches of one model instance.
struct FvnDims {
    int64_t vocab = 0;         // |V|
    int64_t embed_dim = 300;   // D (even); decoder hidden width is 2D
    int64_t content_codes = 512; // K
    int64_t content_labels = 0;  // content head width: slot keys / slot-value labels
    int64_t style_labels = 0;    // style head width: 5 classes / slot-value labels
    bool e2e = false;            // style head is multi-label in e2e mode
    double beta = 0.25;          // shared VQ commitment weight
    bool block_control_grad = false; // stop control gradients at the o-sequence
    int64_t max_decode_len = 100;
};

struct FvnParams {
    FvnDims dims;
    EmbeddingTable embedding; // shared word embedding, doubles as the word codebook
    BiLstmStack enc_tc;       // text -> content summary
    BiLstmStack enc_ts;       // text -> style summary
    BiLstmStack enc_c;        // condition content sequence
    BiLstmStack enc_s;        // condition style sequence
    Tensor content_codebook;  // {K, D}
    Tensor style_codebook;    // {|V|, D}, initialized from the embedding rows
    LstmCell decoder;         // input D, hidden 2D
    DenseLayer input_proj;    // 3D -> D (embedding + attention context)
    Attention attn;           // keys D -> 2D, bilinear 2D x 2D
    DenseLayer out_emb;       // 2D -> D: o_l, the re-encodable word representation
    DenseLayer out_vocab;     // D -> |V| logits
    DenseLayer head_c1, head_c2; // content head D -> D/2 -> content_labels
    DenseLayer head_s1, head_s2; // style head D -> D/2 -> style_labels

    // Every trainable tensor in a fixed, documented order (storage shared).
    ParamList params() const;
};

// Fresh model. RNG consumption order is fixed; `pretrained` (shape {|V|, D})
// replaces the random embedding and seeds the style codebook copy.
FvnParams make_fvn(const FvnDims& dims, std::mt19937_64& rng, const Tensor* pretrained = nullptr);

// Text-side encodings and their quantizations.
struct TextCodes {
    Tensor z_c, z_s; // encoder summaries {D}
    int k = -1;      // nearest content code
    int n = -1;      // nearest style code
    Tensor e_c, e_s; // straight-through quantized rows {D}
};

// Condition-side encodings: summaries plus full sequences for attention.
struct EncodedCondition {
    Tensor v_c, v_s;       // {D}, last rows of the sequences below
    Tensor keys_c, keys_s; // {L', D} and {L'', D}
};

struct ControlTargets {
    std::vector<double> content_indicator; // length content_labels, values {0,1}
    int style_class = -1;                  // personage: index into the 5 classes
    std::vector<double> style_indicator;   // e2e: length style_labels
};

TextCodes encode_text(const FvnParams& p, const std::vector<int>& text_ids);
EncodedCondition encode_condition(const FvnParams& p, const std::vector<int>& content_ids,
                                  const std::vector<int>& style_ids);

struct DecodeStepOut {
    Tensor probs;  // {|V|}, sums to 1
    Tensor logits; // {|V|}
    Tensor o;      // {D}
    LstmState state;
};

// One decoder step given the previous token's embedding and projected keys.
DecodeStepOut decode_step(const FvnParams& p, const Tensor& prev_embedding, const LstmState& state,
                          const Tensor& projected_keys);

enum class DecodeMode { teacher_forced, greedy, sampled };

struct DecodeOptions {
    DecodeMode mode = DecodeMode::greedy;
    const std::vector<int>* target = nullptr; // required for teacher_forced; ends with EOS
    double temperature = 1.0;                 // sampled mode
    std::mt19937_64* rng = nullptr;           // required for sampled mode
};

struct DecodeResult {
    std::vector<int> tokens;   // emitted ids, EOS excluded (teacher-forced: echo of target)
    std::vector<Tensor> o_seq; // one {D} vector per decoded step
    Tensor loss;               // teacher-forced only: sum of per-step cross entropy
};

// Initial state is h0 = concat(e_c, e_s), c0 = concat(v_c, v_s); generation
// stops at EOS or max_decode_len.
DecodeResult decode_sequence(const FvnParams& p, const EncodedCondition& cond, const Tensor& e_c,
                             const Tensor& e_s, const DecodeOptions& opt);

// Backward control objective: the o-sequence is re-encoded by the two text
// encoders (raw vectors, no embedding lookup) and both heads also read the
// quantized text codes. Four summed terms.
Tensor control_forward(const FvnParams& p, const std::vector<Tensor>& o_seq, const TextCodes& codes,
                       const ControlTargets& targets);

// Anchors each o_l to the embedding row of the reference token at step l.
Tensor word_vq_loss(const FvnParams& p, const std::vector<Tensor>& o_seq, const std::vector<int>& target_ids);

// Everything total_loss needs for one example, resolved to ids/indicators.
struct TrainingExample {
    std::vector<int> text_ids;    // delexicalized reference tokens (no EOS)
    std::vector<int> content_ids; // linearized condition, content side
    std::vector<int> style_ids;   // linearized condition, style side
    ControlTargets targets;
};

struct LabelInventories {
    std::vector<std::string> content_labels;
    std::vector<std::string> style_labels;
};

// Inventories for a mode: slot keys + the 5 personalities, or slot-value
// labels on both sides for e2e.
LabelInventories make_label_inventories(const LoadedDataset& data, DatasetFormat format);

TrainingExample make_training_example(const Example& ex, const Vocabulary& vocab, DatasetFormat format,
                                      const LabelInventories& inv);

struct LossComponents {
    Tensor total;
    Tensor dec, ctrl, vq_c, vq_s, vq_v;
};

LossComponents total_loss(const FvnParams& p, const TrainingExample& ex);

} // namespace fvn
