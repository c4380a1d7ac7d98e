#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ops.hpp"
#include "rng.hpp"

namespace fvn {

// Named view over every trainable tensor; copies share storage with the
// owning layer, so optimizer updates through the list mutate the model.
using ParamList = std::vector<std::pair<std::string, Tensor>>;

struct DenseLayer {
    Tensor W; // {out, in}
    Tensor b; // {out}
    void collect(const std::string& prefix, ParamList& out) const;
};

DenseLayer make_dense(std::mt19937_64& rng, int64_t out, int64_t in);
Tensor dense_apply(const DenseLayer& l, const Tensor& x);      // {in} -> {out}
Tensor dense_apply_rows(const DenseLayer& l, const Tensor& m); // {L,in} -> {L,out}

struct LstmCell {
    int64_t input_size = 0;
    int64_t hidden_size = 0;
    Tensor Wi, Ui, bi; // input gate
    Tensor Wf, Uf, bf; // forget gate (bias initialized to +1)
    Tensor Wg, Ug, bg; // candidate
    Tensor Wo, Uo, bo; // output gate
    void collect(const std::string& prefix, ParamList& out) const;
};

LstmCell make_lstm(std::mt19937_64& rng, int64_t input_size, int64_t hidden_size);

struct LstmState {
    Tensor h;
    Tensor c;
};

LstmState lstm_step(const LstmCell& cell, const Tensor& x, const LstmState& prev);

struct BiLstmLayer {
    LstmCell fwd;
    LstmCell bwd;
    void collect(const std::string& prefix, ParamList& out) const;
};

// Stacked bidirectional encoder: each layer runs both directions at hidden
// width D/2 and concatenates per position, so every layer maps L x D -> L x D.
struct BiLstmStack {
    int64_t width = 0; // D
    std::vector<BiLstmLayer> layers;
    void collect(const std::string& prefix, ParamList& out) const;
};

BiLstmStack make_bilstm_stack(std::mt19937_64& rng, int n_layers, int64_t width);

struct Encoded {
    Tensor seq;  // {L, D}
    Tensor last; // {D}, row L-1 of seq
};

// Inputs are per-position vectors of width D (embedded tokens or raw vectors).
Encoded bilstm_encode(const BiLstmStack& stack, const std::vector<Tensor>& xs);

struct EmbeddingTable {
    Tensor rows; // {V, D}
    void collect(const std::string& prefix, ParamList& out) const;
};

EmbeddingTable make_embedding(std::mt19937_64& rng, int64_t vocab, int64_t dim);
// Lookup as a list of row vectors (the form the encoders consume).
std::vector<Tensor> embed_sequence(const EmbeddingTable& table, const std::vector<int>& ids);

Encoded bilstm_encode_ids(const BiLstmStack& stack, const EmbeddingTable& table, const std::vector<int>& ids);

struct Attention {
    DenseLayer key_proj; // D -> 2D
    Tensor Wb;           // {2D, 2D} bilinear score weight
    void collect(const std::string& prefix, ParamList& out) const;
};

Attention make_attention(std::mt19937_64& rng, int64_t d);
// Project keys {L,D} -> {L,2D}; done once per decoded sequence.
Tensor attention_project_keys(const Attention& a, const Tensor& keys);
// scores_i = q^T Wb pk_i; weights = softmax(scores); context = sum w_i pk_i.
Tensor attention_context(const Attention& a, const Tensor& projected_keys, const Tensor& query);
Tensor attention_weights(const Attention& a, const Tensor& projected_keys, const Tensor& query); // {L}
Tensor attention(const Attention& a, const Tensor& query, const Tensor& keys);

// Xavier-uniform bound sqrt(6/(fan_in+fan_out)).
Tensor xavier_uniform(std::mt19937_64& rng, int64_t out, int64_t in);

// Text file: one token per line followed by `dim` decimals. Tokens absent
// from the file get the mean of all loaded vectors plus uniform noise 1e-3.
Tensor load_pretrained_embeddings(const std::string& path, const std::vector<std::string>& tokens, int64_t dim,
                                  std::mt19937_64& rng);

} // namespace fvn
