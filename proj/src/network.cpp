#include "network.hpp"

#include <algorithm>

#include "tape.hpp"

namespace fvn {

namespace {

Tensor head_apply(const DenseLayer& l1, const DenseLayer& l2, const Tensor& x) {
    return dense_apply(l2, tanh(dense_apply(l1, x)));
}

} // namespace

ParamList FvnParams::params() const {
    ParamList out;
    embedding.collect("embedding", out);
    enc_tc.collect("enc_tc", out);
    enc_ts.collect("enc_ts", out);
    enc_c.collect("enc_c", out);
    enc_s.collect("enc_s", out);
    out.emplace_back("content_codebook", content_codebook);
    out.emplace_back("style_codebook", style_codebook);
    decoder.collect("decoder", out);
    input_proj.collect("input_proj", out);
    attn.collect("attn", out);
    out_emb.collect("out_emb", out);
    out_vocab.collect("out_vocab", out);
    head_c1.collect("head_c1", out);
    head_c2.collect("head_c2", out);
    head_s1.collect("head_s1", out);
    head_s2.collect("head_s2", out);
    return out;
}

FvnParams make_fvn(const FvnDims& dims, std::mt19937_64& rng, const Tensor* pretrained) {
    if (dims.vocab < 4) throw ConfigError("vocab must include the four reserved ids");
    if (dims.embed_dim <= 0 || dims.embed_dim % 2 != 0) {
        throw ConfigError("embed_dim must be positive and even, got " + std::to_string(dims.embed_dim));
    }
    if (dims.content_codes <= 0) throw ConfigError("content_codes must be positive");
    if (dims.content_labels <= 0 || dims.style_labels <= 0) {
        throw ConfigError("label inventories must be nonempty");
    }
    const int64_t d = dims.embed_dim;

    FvnParams p;
    p.dims = dims;
    p.embedding = make_embedding(rng, dims.vocab, d);
    if (pretrained) {
        if (pretrained->shape() != Shape{dims.vocab, d}) {
            throw DimensionError("pretrained embedding shape " + shape_str(pretrained->shape()) +
                                 " does not match {" + std::to_string(dims.vocab) + ", " + std::to_string(d) + "}");
        }
        p.embedding.rows = Tensor::param(pretrained->shape(), pretrained->data());
    }
    const int n_enc_layers = 3;
    p.enc_tc = make_bilstm_stack(rng, n_enc_layers, d);
    p.enc_ts = make_bilstm_stack(rng, n_enc_layers, d);
    p.enc_c = make_bilstm_stack(rng, n_enc_layers, d);
    p.enc_s = make_bilstm_stack(rng, n_enc_layers, d);
    p.content_codebook = make_content_codebook(rng, static_cast<int>(dims.content_codes), static_cast<int>(d));
    p.style_codebook = codebook_from_rows(p.embedding.rows);
    p.decoder = make_lstm(rng, d, 2 * d);
    p.input_proj = make_dense(rng, d, 3 * d);
    p.attn = make_attention(rng, d);
    p.out_emb = make_dense(rng, d, 2 * d);
    p.out_vocab = make_dense(rng, dims.vocab, d);
    p.head_c1 = make_dense(rng, d / 2, d);
    p.head_c2 = make_dense(rng, dims.content_labels, d / 2);
    p.head_s1 = make_dense(rng, d / 2, d);
    p.head_s2 = make_dense(rng, dims.style_labels, d / 2);
    return p;
}

TextCodes encode_text(const FvnParams& p, const std::vector<int>& text_ids) {
    if (text_ids.empty()) throw ArgumentError("encode_text: empty token sequence");
    TextCodes out;
    out.z_c = bilstm_encode_ids(p.enc_tc, p.embedding, text_ids).last;
    out.z_s = bilstm_encode_ids(p.enc_ts, p.embedding, text_ids).last;
    out.k = nearest_code(out.z_c, p.content_codebook);
    out.n = nearest_code(out.z_s, p.style_codebook);
    out.e_c = quantize_straight_through(out.z_c, p.content_codebook, out.k);
    out.e_s = quantize_straight_through(out.z_s, p.style_codebook, out.n);
    return out;
}

EncodedCondition encode_condition(const FvnParams& p, const std::vector<int>& content_ids,
                                  const std::vector<int>& style_ids) {
    if (content_ids.empty()) throw ArgumentError("encode_condition: empty content sequence");
    if (style_ids.empty()) throw ArgumentError("encode_condition: empty style sequence");
    EncodedCondition out;
    Encoded ec = bilstm_encode_ids(p.enc_c, p.embedding, content_ids);
    Encoded es = bilstm_encode_ids(p.enc_s, p.embedding, style_ids);
    out.keys_c = ec.seq;
    out.keys_s = es.seq;
    out.v_c = ec.last;
    out.v_s = es.last;
    return out;
}

DecodeStepOut decode_step(const FvnParams& p, const Tensor& prev_embedding, const LstmState& state,
                          const Tensor& projected_keys) {
    Tensor context = attention_context(p.attn, projected_keys, state.h); // {2D}
    Tensor x = dense_apply(p.input_proj, concat({prev_embedding, context}, 0)); // {D}
    LstmState next = lstm_step(p.decoder, x, state);
    DecodeStepOut out;
    out.o = dense_apply(p.out_emb, next.h);
    out.logits = dense_apply(p.out_vocab, out.o);
    out.probs = softmax(out.logits, 0);
    out.state = next;
    return out;
}

DecodeResult decode_sequence(const FvnParams& p, const EncodedCondition& cond, const Tensor& e_c,
                             const Tensor& e_s, const DecodeOptions& opt) {
    if (opt.mode == DecodeMode::teacher_forced) {
        if (!opt.target || opt.target->empty()) {
            throw ArgumentError("decode_sequence: teacher-forced mode requires a nonempty target");
        }
    }
    if (opt.mode == DecodeMode::sampled) {
        if (!opt.rng) throw ArgumentError("decode_sequence: sampled mode requires an RNG");
        if (!(opt.temperature > 0)) throw ArgumentError("decode_sequence: temperature must be positive");
    }

    LstmState state{concat({e_c, e_s}, 0), concat({cond.v_c, cond.v_s}, 0)};
    Tensor keys = concat({cond.keys_c, cond.keys_s}, 0); // sequence-axis merge
    Tensor pk = attention_project_keys(p.attn, keys);

    DecodeResult res;
    Tensor prev = select_row(p.embedding.rows, Vocabulary::kBos);

    if (opt.mode == DecodeMode::teacher_forced) {
        const std::vector<int>& target = *opt.target;
        Tensor loss;
        for (size_t l = 0; l < target.size(); ++l) {
            int64_t t = target[l];
            if (t < 0 || t >= p.dims.vocab) {
                throw ArgumentError("decode_sequence: target id " + std::to_string(t) + " out of vocabulary");
            }
            DecodeStepOut step = decode_step(p, prev, state, pk);
            state = step.state;
            res.o_seq.push_back(step.o);
            Tensor ce = cross_entropy(step.logits, t);
            loss = loss.defined() ? add(loss, ce) : ce;
            res.tokens.push_back(static_cast<int>(t));
            prev = select_row(p.embedding.rows, t);
        }
        res.loss = loss;
        return res;
    }

    // generation: no recording needed, and none wanted
    NoGrad guard;
    for (int64_t l = 0; l < p.dims.max_decode_len; ++l) {
        DecodeStepOut step = decode_step(p, prev, state, pk);
        state = step.state;
        int next = -1;
        if (opt.mode == DecodeMode::greedy) {
            const auto& d = step.probs.data();
            next = static_cast<int>(std::max_element(d.begin(), d.end()) - d.begin());
        } else {
            const auto& logits = step.logits.data();
            double mx = *std::max_element(logits.begin(), logits.end());
            std::vector<double> probs(logits.size());
            double z = 0;
            for (size_t i = 0; i < logits.size(); ++i) {
                probs[i] = std::exp((logits[i] - mx) / opt.temperature);
                z += probs[i];
            }
            for (double& v : probs) v /= z;
            next = static_cast<int>(sample_index(*opt.rng, probs));
        }
        if (next == Vocabulary::kEos) break;
        res.tokens.push_back(next);
        res.o_seq.push_back(step.o);
        prev = select_row(p.embedding.rows, next);
    }
    return res;
}

Tensor control_forward(const FvnParams& p, const std::vector<Tensor>& o_seq, const TextCodes& codes,
                       const ControlTargets& targets) {
    if (o_seq.empty()) throw ArgumentError("control_forward: empty o-sequence");
    if (static_cast<int64_t>(targets.content_indicator.size()) != p.dims.content_labels) {
        throw ArgumentError("control_forward: content indicator width " +
                            std::to_string(targets.content_indicator.size()) + " != " +
                            std::to_string(p.dims.content_labels));
    }

    std::vector<Tensor> inputs = o_seq;
    if (p.dims.block_control_grad) {
        for (Tensor& t : inputs) t = stop_gradient(t);
    }
    Tensor zc = bilstm_encode(p.enc_tc, inputs).last;
    Tensor zs = bilstm_encode(p.enc_ts, inputs).last;

    Tensor loss = add(bce_with_logits_sum(head_apply(p.head_c1, p.head_c2, zc), targets.content_indicator),
                      bce_with_logits_sum(head_apply(p.head_c1, p.head_c2, codes.e_c), targets.content_indicator));
    if (p.dims.e2e) {
        if (static_cast<int64_t>(targets.style_indicator.size()) != p.dims.style_labels) {
            throw ArgumentError("control_forward: style indicator width mismatch");
        }
        loss = add(loss, bce_with_logits_sum(head_apply(p.head_s1, p.head_s2, zs), targets.style_indicator));
        loss = add(loss, bce_with_logits_sum(head_apply(p.head_s1, p.head_s2, codes.e_s), targets.style_indicator));
    } else {
        if (targets.style_class < 0 || targets.style_class >= p.dims.style_labels) {
            throw ArgumentError("control_forward: style class " + std::to_string(targets.style_class) +
                                " out of range");
        }
        loss = add(loss, cross_entropy(head_apply(p.head_s1, p.head_s2, zs), targets.style_class));
        loss = add(loss, cross_entropy(head_apply(p.head_s1, p.head_s2, codes.e_s), targets.style_class));
    }
    return loss;
}

Tensor word_vq_loss(const FvnParams& p, const std::vector<Tensor>& o_seq, const std::vector<int>& target_ids) {
    if (o_seq.size() != target_ids.size()) {
        throw ArgumentError("word_vq_loss: " + std::to_string(o_seq.size()) + " outputs vs " +
                            std::to_string(target_ids.size()) + " targets");
    }
    Tensor loss;
    for (size_t l = 0; l < o_seq.size(); ++l) {
        Tensor term = vq_loss(o_seq[l], p.embedding.rows, target_ids[l], p.dims.beta);
        loss = loss.defined() ? add(loss, term) : term;
    }
    return loss;
}

LabelInventories make_label_inventories(const LoadedDataset& data, DatasetFormat format) {
    LabelInventories inv;
    if (format == DatasetFormat::personage) {
        inv.content_labels = data.slot_key_inventory;
        inv.style_labels = kStyleLabels;
    } else {
        inv.content_labels = data.slot_value_inventory;
        inv.style_labels = data.slot_value_inventory;
    }
    return inv;
}

TrainingExample make_training_example(const Example& ex, const Vocabulary& vocab, DatasetFormat format,
                                      const LabelInventories& inv) {
    TrainingExample out;
    out.text_ids = vocab.ids(ex.delex_tokens);
    ConditionSequences cs = linearize_condition(ex.cmr, ex.style, format);
    out.content_ids = vocab.ids(cs.content);
    out.style_ids = vocab.ids(cs.style);

    out.targets.content_indicator.assign(inv.content_labels.size(), 0.0);
    if (format == DatasetFormat::personage) {
        for (size_t i = 0; i < inv.content_labels.size(); ++i) {
            if (ex.cmr.has(inv.content_labels[i])) out.targets.content_indicator[i] = 1.0;
        }
        if (!ex.style) throw ArgumentError("personage example without a style label");
        auto it = std::find(kStyleLabels.begin(), kStyleLabels.end(), *ex.style);
        if (it == kStyleLabels.end()) throw ArgumentError("unknown style label '" + *ex.style + "'");
        out.targets.style_class = static_cast<int>(it - kStyleLabels.begin());
    } else {
        for (const Slot& s : ex.cmr.slots) {
            std::string label = slot_value_label(s, format);
            auto it = std::find(inv.content_labels.begin(), inv.content_labels.end(), label);
            if (it != inv.content_labels.end()) {
                out.targets.content_indicator[static_cast<size_t>(it - inv.content_labels.begin())] = 1.0;
            }
        }
        out.targets.style_indicator = out.targets.content_indicator;
    }
    return out;
}

LossComponents total_loss(const FvnParams& p, const TrainingExample& ex) {
    LossComponents c;
    TextCodes codes = encode_text(p, ex.text_ids);
    EncodedCondition cond = encode_condition(p, ex.content_ids, ex.style_ids);

    std::vector<int> target = ex.text_ids;
    target.push_back(Vocabulary::kEos);

    DecodeOptions opt;
    opt.mode = DecodeMode::teacher_forced;
    opt.target = &target;
    DecodeResult dec = decode_sequence(p, cond, codes.e_c, codes.e_s, opt);

    c.dec = dec.loss;
    c.ctrl = control_forward(p, dec.o_seq, codes, ex.targets);
    c.vq_c = vq_loss(codes.z_c, p.content_codebook, codes.k, p.dims.beta);
    c.vq_s = vq_loss(codes.z_s, p.style_codebook, codes.n, p.dims.beta);
    c.vq_v = word_vq_loss(p, dec.o_seq, target);
    c.total = add(add(add(c.dec, c.ctrl), add(c.vq_c, c.vq_s)), c.vq_v);
    return c;
}

} // namespace fvn
