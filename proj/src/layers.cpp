#include "layers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "error.hpp"

namespace fvn {

void DenseLayer::collect(const std::string& prefix, ParamList& out) const {
    out.emplace_back(prefix + ".W", W);
    out.emplace_back(prefix + ".b", b);
}

Tensor xavier_uniform(std::mt19937_64& rng, int64_t out, int64_t in) {
    double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    std::vector<double> d(static_cast<size_t>(out * in));
    for (double& x : d) x = uniform_double(rng, -bound, bound);
    return Tensor::param({out, in}, std::move(d));
}

DenseLayer make_dense(std::mt19937_64& rng, int64_t out, int64_t in) {
    DenseLayer l;
    l.W = xavier_uniform(rng, out, in);
    Tensor b = Tensor::zeros({out});
    b.set_requires_grad(true);
    l.b = b;
    return l;
}

Tensor dense_apply(const DenseLayer& l, const Tensor& x) {
    if (x.rank() != 1 || x.shape()[0] != l.W.shape()[1]) {
        throw DimensionError("dense_apply: input " + shape_str(x.shape()) + " incompatible with weight " +
                             shape_str(l.W.shape()));
    }
    return add(matmul(l.W, x), l.b);
}

Tensor dense_apply_rows(const DenseLayer& l, const Tensor& m) {
    if (m.rank() != 2 || m.shape()[1] != l.W.shape()[1]) {
        throw DimensionError("dense_apply_rows: input " + shape_str(m.shape()) + " incompatible with weight " +
                             shape_str(l.W.shape()));
    }
    return add_rowwise(matmul(m, transpose(l.W)), l.b);
}

void LstmCell::collect(const std::string& prefix, ParamList& out) const {
    out.emplace_back(prefix + ".Wi", Wi);
    out.emplace_back(prefix + ".Ui", Ui);
    out.emplace_back(prefix + ".bi", bi);
    out.emplace_back(prefix + ".Wf", Wf);
    out.emplace_back(prefix + ".Uf", Uf);
    out.emplace_back(prefix + ".bf", bf);
    out.emplace_back(prefix + ".Wg", Wg);
    out.emplace_back(prefix + ".Ug", Ug);
    out.emplace_back(prefix + ".bg", bg);
    out.emplace_back(prefix + ".Wo", Wo);
    out.emplace_back(prefix + ".Uo", Uo);
    out.emplace_back(prefix + ".bo", bo);
}

LstmCell make_lstm(std::mt19937_64& rng, int64_t input_size, int64_t hidden_size) {
    if (input_size <= 0 || hidden_size <= 0) {
        throw ArgumentError("make_lstm: sizes must be positive");
    }
    LstmCell c;
    c.input_size = input_size;
    c.hidden_size = hidden_size;
    auto bias = [&](double v) {
        Tensor t = Tensor::full({hidden_size}, v);
        t.set_requires_grad(true);
        return t;
    };
    c.Wi = xavier_uniform(rng, hidden_size, input_size);
    c.Ui = xavier_uniform(rng, hidden_size, hidden_size);
    c.bi = bias(0.0);
    c.Wf = xavier_uniform(rng, hidden_size, input_size);
    c.Uf = xavier_uniform(rng, hidden_size, hidden_size);
    c.bf = bias(1.0); // keeps early training from forgetting everything
    c.Wg = xavier_uniform(rng, hidden_size, input_size);
    c.Ug = xavier_uniform(rng, hidden_size, hidden_size);
    c.bg = bias(0.0);
    c.Wo = xavier_uniform(rng, hidden_size, input_size);
    c.Uo = xavier_uniform(rng, hidden_size, hidden_size);
    c.bo = bias(0.0);
    return c;
}

LstmState lstm_step(const LstmCell& cell, const Tensor& x, const LstmState& prev) {
    if (x.rank() != 1 || x.shape()[0] != cell.input_size) {
        throw DimensionError("lstm_step: input " + shape_str(x.shape()) + " expected width " +
                             std::to_string(cell.input_size));
    }
    if (prev.h.shape()[0] != cell.hidden_size || prev.c.shape()[0] != cell.hidden_size) {
        throw DimensionError("lstm_step: state width mismatch, expected " + std::to_string(cell.hidden_size));
    }
    Tensor i = sigmoid(add(add(matmul(cell.Wi, x), matmul(cell.Ui, prev.h)), cell.bi));
    Tensor f = sigmoid(add(add(matmul(cell.Wf, x), matmul(cell.Uf, prev.h)), cell.bf));
    Tensor g = fvn::tanh(add(add(matmul(cell.Wg, x), matmul(cell.Ug, prev.h)), cell.bg));
    Tensor o = sigmoid(add(add(matmul(cell.Wo, x), matmul(cell.Uo, prev.h)), cell.bo));
    Tensor c = add(mul(f, prev.c), mul(i, g));
    Tensor h = mul(o, fvn::tanh(c));
    return {h, c};
}

void BiLstmLayer::collect(const std::string& prefix, ParamList& out) const {
    fwd.collect(prefix + ".fwd", out);
    bwd.collect(prefix + ".bwd", out);
}

void BiLstmStack::collect(const std::string& prefix, ParamList& out) const {
    for (size_t i = 0; i < layers.size(); ++i) {
        layers[i].collect(prefix + ".layer" + std::to_string(i), out);
    }
}

BiLstmStack make_bilstm_stack(std::mt19937_64& rng, int n_layers, int64_t width) {
    if (n_layers <= 0) throw ArgumentError("make_bilstm_stack: need at least one layer");
    if (width % 2 != 0) {
        throw ConfigError("make_bilstm_stack: width " + std::to_string(width) +
                          " must be even (split across directions)");
    }
    BiLstmStack s;
    s.width = width;
    int64_t half = width / 2;
    for (int i = 0; i < n_layers; ++i) {
        BiLstmLayer layer;
        layer.fwd = make_lstm(rng, width, half);
        layer.bwd = make_lstm(rng, width, half);
        s.layers.push_back(std::move(layer));
    }
    return s;
}

Encoded bilstm_encode(const BiLstmStack& stack, const std::vector<Tensor>& xs) {
    if (xs.empty()) throw ArgumentError("bilstm_encode: empty sequence");
    for (const Tensor& x : xs) {
        if (x.rank() != 1 || x.shape()[0] != stack.width) {
            throw DimensionError("bilstm_encode: position width " + shape_str(x.shape()) + " expected {" +
                                 std::to_string(stack.width) + "}");
        }
    }
    size_t L = xs.size();
    int64_t half = stack.width / 2;
    std::vector<Tensor> cur = xs;
    for (const BiLstmLayer& layer : stack.layers) {
        std::vector<Tensor> fh(L), bh(L);
        LstmState st{Tensor::zeros({half}), Tensor::zeros({half})};
        for (size_t t = 0; t < L; ++t) {
            st = lstm_step(layer.fwd, cur[t], st);
            fh[t] = st.h;
        }
        st = {Tensor::zeros({half}), Tensor::zeros({half})};
        for (size_t t = L; t-- > 0;) {
            st = lstm_step(layer.bwd, cur[t], st);
            bh[t] = st.h;
        }
        for (size_t t = 0; t < L; ++t) cur[t] = concat({fh[t], bh[t]}, 0);
    }
    Encoded e;
    e.seq = stack_rows(cur);
    e.last = cur.back();
    return e;
}

void EmbeddingTable::collect(const std::string& prefix, ParamList& out) const {
    out.emplace_back(prefix + ".rows", rows);
}

EmbeddingTable make_embedding(std::mt19937_64& rng, int64_t vocab, int64_t dim) {
    EmbeddingTable t;
    t.rows = xavier_uniform(rng, vocab, dim);
    return t;
}

std::vector<Tensor> embed_sequence(const EmbeddingTable& table, const std::vector<int>& ids) {
    Tensor m = embedding_rows(table.rows, ids);
    std::vector<Tensor> out;
    out.reserve(ids.size());
    for (size_t i = 0; i < ids.size(); ++i) out.push_back(select_row(m, static_cast<int64_t>(i)));
    return out;
}

Encoded bilstm_encode_ids(const BiLstmStack& stack, const EmbeddingTable& table, const std::vector<int>& ids) {
    if (ids.empty()) throw ArgumentError("bilstm_encode_ids: empty token sequence");
    return bilstm_encode(stack, embed_sequence(table, ids));
}

void Attention::collect(const std::string& prefix, ParamList& out) const {
    key_proj.collect(prefix + ".key_proj", out);
    out.emplace_back(prefix + ".Wb", Wb);
}

Attention make_attention(std::mt19937_64& rng, int64_t d) {
    Attention a;
    a.key_proj = make_dense(rng, 2 * d, d);
    a.Wb = xavier_uniform(rng, 2 * d, 2 * d);
    return a;
}

Tensor attention_project_keys(const Attention& a, const Tensor& keys) {
    if (keys.rank() != 2) {
        throw DimensionError("attention_project_keys: keys must be {L,D}, got " + shape_str(keys.shape()));
    }
    if (keys.shape()[0] < 1) throw ArgumentError("attention: empty keys");
    return dense_apply_rows(a.key_proj, keys);
}

Tensor attention_weights(const Attention& a, const Tensor& projected_keys, const Tensor& query) {
    Tensor scores = matmul(projected_keys, matmul(a.Wb, query)); // {L}
    return softmax(scores, 0);
}

Tensor attention_context(const Attention& a, const Tensor& projected_keys, const Tensor& query) {
    Tensor weights = attention_weights(a, projected_keys, query);
    return matmul(transpose(projected_keys), weights); // {2D}
}

Tensor attention(const Attention& a, const Tensor& query, const Tensor& keys) {
    return attention_context(a, attention_project_keys(a, keys), query);
}

Tensor load_pretrained_embeddings(const std::string& path, const std::vector<std::string>& tokens, int64_t dim,
                                  std::mt19937_64& rng) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open embedding file: " + path);
    std::unordered_map<std::string, std::vector<double>> loaded;
    std::string line;
    int lineno = 0;
    std::vector<double> mean(static_cast<size_t>(dim), 0.0);
    size_t n_loaded = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        std::vector<double> v;
        v.reserve(static_cast<size_t>(dim));
        double x;
        while (ls >> x) v.push_back(x);
        if (static_cast<int64_t>(v.size()) != dim) {
            throw FormatError("embedding file line " + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                              " values, got " + std::to_string(v.size()));
        }
        for (int64_t i = 0; i < dim; ++i) mean[static_cast<size_t>(i)] += v[static_cast<size_t>(i)];
        ++n_loaded;
        loaded[tok] = std::move(v);
    }
    if (n_loaded == 0) throw FormatError("embedding file is empty: " + path);
    for (double& m : mean) m /= static_cast<double>(n_loaded);

    std::vector<double> data;
    data.reserve(tokens.size() * static_cast<size_t>(dim));
    for (const std::string& tok : tokens) {
        auto it = loaded.find(tok);
        if (it != loaded.end()) {
            data.insert(data.end(), it->second.begin(), it->second.end());
        } else {
            for (int64_t i = 0; i < dim; ++i) {
                data.push_back(mean[static_cast<size_t>(i)] + uniform_double(rng, -1e-3, 1e-3));
            }
        }
    }
    return Tensor::param({static_cast<int64_t>(tokens.size()), dim}, std::move(data));
}

} // namespace fvn
