#include "trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ops.hpp"
#include "rng.hpp"
#include "strings.hpp"
#include "tape.hpp"

namespace fvn {

namespace {

std::string rng_to_string(const std::mt19937_64& g) {
    std::ostringstream os;
    os << g;
    return os.str();
}

void rng_from_string(std::mt19937_64& g, const std::string& s) {
    std::istringstream is(s);
    is >> g;
    if (is.fail()) throw IntegrityError("invalid RNG state in checkpoint");
}

int64_t tokens_of(const TrainingExample& ex) { return static_cast<int64_t>(ex.text_ids.size()) + 1; } // + EOS

} // namespace

DatasetFormat dataset_format(const std::string& mode) {
    if (mode == "personage") return DatasetFormat::personage;
    if (mode == "e2e") return DatasetFormat::e2e;
    throw ConfigError("mode must be 'personage' or 'e2e', got '" + mode + "'");
}

std::string epoch_log_line(const EpochLog& l) {
    std::string s = "{\"epoch\":" + std::to_string(l.epoch);
    s += ",\"train_total\":" + format_double(l.train_total);
    s += ",\"train_dec\":" + format_double(l.train_dec);
    s += ",\"train_ctrl\":" + format_double(l.train_ctrl);
    s += ",\"train_vq_c\":" + format_double(l.train_vq_c);
    s += ",\"train_vq_s\":" + format_double(l.train_vq_s);
    s += ",\"train_vq_v\":" + format_double(l.train_vq_v);
    s += ",\"train_dec_per_token\":" + format_double(l.train_dec_per_token);
    s += ",\"val_dec_per_token\":" + format_double(l.val_dec_per_token);
    s += ",\"grad_norm\":" + format_double(l.grad_norm);
    s += ",\"improved\":";
    s += l.improved ? "true" : "false";
    s += "}";
    return s;
}

double adam_step(const ParamList& params, const std::vector<std::vector<double>>& grads, AdamState& state,
                 double lr, double clip_norm, double beta1, double beta2, double eps) {
    if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
        throw ArgumentError("optimizer state is not aligned with the model parameters");
    }
    // Validate everything before touching any state: a bad batch must not
    // leave a half-applied update behind.
    double sq = 0.0;
    for (size_t i = 0; i < params.size(); ++i) {
        if (grads[i].size() != static_cast<size_t>(params[i].second.size())) {
            throw ArgumentError("gradient for '" + params[i].first + "' has the wrong element count");
        }
        for (double g : grads[i]) {
            if (!std::isfinite(g)) {
                throw NumericError("non-finite gradient for parameter '" + params[i].first + "'; step aborted");
            }
            sq += g * g;
        }
    }
    const double norm = std::sqrt(sq);
    const double scale = (clip_norm > 0.0 && norm > clip_norm) ? clip_norm / norm : 1.0;

    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (size_t i = 0; i < params.size(); ++i) {
        Tensor t = params[i].second;
        auto& x = t.mutable_data();
        auto& m = state.m[i];
        auto& v = state.v[i];
        for (size_t j = 0; j < x.size(); ++j) {
            const double g = grads[i][j] * scale;
            m[j] = beta1 * m[j] + (1.0 - beta1) * g;
            v[j] = beta2 * v[j] + (1.0 - beta2) * g * g;
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            x[j] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
    return norm;
}

std::vector<TrainingExample> to_training_examples(const std::vector<Example>& examples, const Vocabulary& vocab,
                                                  DatasetFormat format, const LabelInventories& inv) {
    std::vector<TrainingExample> out;
    out.reserve(examples.size());
    for (const auto& ex : examples) out.push_back(make_training_example(ex, vocab, format, inv));
    return out;
}

TrainData split_train_val(std::vector<TrainingExample> examples, double fraction, uint64_t seed) {
    if (examples.empty()) throw ArgumentError("training dataset is empty");
    TrainData out;
    if (fraction <= 0.0 || examples.size() < 2) {
        out.train = std::move(examples);
        return out;
    }
    const size_t n = examples.size();
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::mt19937_64 rng(seed + 1); // split stream, independent of the training stream
    seeded_shuffle(idx, rng);
    size_t n_val = static_cast<size_t>(fraction * static_cast<double>(n));
    n_val = std::clamp<size_t>(n_val, 1, n - 1);
    std::vector<size_t> val_idx(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<size_t> train_idx(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
    std::sort(val_idx.begin(), val_idx.end());
    std::sort(train_idx.begin(), train_idx.end());
    out.val.reserve(val_idx.size());
    out.train.reserve(train_idx.size());
    for (size_t i : val_idx) out.val.push_back(std::move(examples[i]));
    for (size_t i : train_idx) out.train.push_back(std::move(examples[i]));
    return out;
}

Checkpoint init_training(const TrainConfig& cfg, const LoadedDataset& data) {
    validate_config(cfg);
    if (data.examples.empty()) throw ArgumentError("training dataset is empty");
    Checkpoint ck;
    ck.config = cfg;
    ck.vocab = data.vocab;
    ck.labels = make_label_inventories(data, dataset_format(cfg.mode));
    FvnDims dims = dims_from(cfg, ck.vocab.size(), ck.labels);
    std::mt19937_64 rng(cfg.seed);
    if (!cfg.embeddings_path.empty()) {
        Tensor pre = load_pretrained_embeddings(cfg.embeddings_path, ck.vocab.tokens(), cfg.embed_dim, rng);
        ck.model = make_fvn(dims, rng, &pre);
    } else {
        ck.model = make_fvn(dims, rng);
    }
    ParamList ps = ck.model.params();
    ck.adam.t = 0;
    ck.adam.m.resize(ps.size());
    ck.adam.v.resize(ps.size());
    for (size_t i = 0; i < ps.size(); ++i) {
        ck.adam.m[i].assign(static_cast<size_t>(ps[i].second.size()), 0.0);
        ck.adam.v[i].assign(static_cast<size_t>(ps[i].second.size()), 0.0);
    }
    // The training stream continues where initialization stopped: one seed,
    // one stream, resumable from the stored state alone.
    ck.train.epochs_done = 0;
    ck.train.rng_state = rng_to_string(rng);
    return ck;
}

double eval_dec_per_token(const FvnParams& p, const std::vector<TrainingExample>& examples) {
    if (examples.empty()) throw ArgumentError("evaluation set is empty");
    NoGrad guard;
    double dec = 0.0;
    double toks = 0.0;
    for (const auto& ex : examples) {
        TextCodes codes = encode_text(p, ex.text_ids);
        EncodedCondition cond = encode_condition(p, ex.content_ids, ex.style_ids);
        std::vector<int> target = ex.text_ids;
        target.push_back(Vocabulary::kEos);
        DecodeOptions opt;
        opt.mode = DecodeMode::teacher_forced;
        opt.target = &target;
        DecodeResult dr = decode_sequence(p, cond, codes.e_c, codes.e_s, opt);
        dec += dr.loss.item();
        toks += static_cast<double>(target.size());
    }
    return dec / toks;
}

namespace {

// Per-example component means over a set, without updates.
EpochLog eval_only_epoch(const FvnParams& p, const TrainData& data) {
    NoGrad guard;
    EpochLog el;
    el.epoch = 0;
    double toks = 0.0;
    double dec_sum = 0.0;
    for (const auto& ex : data.train) {
        LossComponents lc = total_loss(p, ex);
        el.train_total += lc.total.item();
        dec_sum += lc.dec.item();
        el.train_ctrl += lc.ctrl.item();
        el.train_vq_c += lc.vq_c.item();
        el.train_vq_s += lc.vq_s.item();
        el.train_vq_v += lc.vq_v.item();
        toks += static_cast<double>(tokens_of(ex));
    }
    const auto n = static_cast<double>(data.train.size());
    el.train_dec = dec_sum / n;
    el.train_total /= n;
    el.train_ctrl /= n;
    el.train_vq_c /= n;
    el.train_vq_s /= n;
    el.train_vq_v /= n;
    el.train_dec_per_token = dec_sum / toks;
    el.val_dec_per_token = data.val.empty() ? el.train_dec_per_token : eval_dec_per_token(p, data.val);
    return el;
}

} // namespace

std::vector<EpochLog> train_model(Checkpoint& ck, const TrainData& data, const TrainOptions& opt) {
    if (data.train.empty()) throw ArgumentError("training dataset is empty");
    validate_config(ck.config);
    const TrainConfig& cfg = ck.config;
    ParamList params = ck.model.params();
    if (ck.adam.m.size() != params.size() || ck.adam.v.size() != params.size()) {
        throw StateError("optimizer state is not aligned with the model parameters");
    }

    std::mt19937_64 rng;
    if (ck.train.rng_state.empty()) {
        rng.seed(cfg.seed);
    } else {
        rng_from_string(rng, ck.train.rng_state);
    }

    std::ofstream log_out;
    if (!opt.log_path.empty()) {
        log_out.open(opt.log_path, std::ios::app | std::ios::binary);
        if (!log_out) throw IoError("cannot open loss log: " + opt.log_path);
    }

    std::vector<EpochLog> logs;
    auto emit = [&](const EpochLog& el) {
        logs.push_back(el);
        if (log_out.is_open()) {
            log_out << epoch_log_line(el) << "\n";
            log_out.flush();
        }
        if (opt.on_epoch) opt.on_epoch(el);
    };
    auto save_best = [&] {
        if (!opt.best_path.empty()) save_checkpoint(opt.best_path, ck);
    };

    // Evaluation-only pass on the freshly initialized model. Consumes no RNG,
    // so a rerun before the first update reproduces it exactly.
    if (ck.train.epochs_done == 0 && ck.adam.t == 0) {
        EpochLog el = eval_only_epoch(ck.model, data);
        el.improved = el.val_dec_per_token < ck.train.best_val_dec;
        if (el.improved) ck.train.best_val_dec = el.val_dec_per_token;
        emit(el);
        if (el.improved) save_best();
    }

    const auto batch_size = static_cast<size_t>(cfg.batch_size);
    for (int64_t epoch = ck.train.epochs_done + 1; epoch <= cfg.epochs; ++epoch) {
        std::vector<size_t> order(data.train.size());
        std::iota(order.begin(), order.end(), size_t{0});
        seeded_shuffle(order, rng);

        EpochLog el;
        el.epoch = epoch;
        double dec_sum = 0.0, toks = 0.0, norm_sum = 0.0;
        size_t steps = 0;
        for (size_t start = 0; start < order.size(); start += batch_size) {
            const size_t end = std::min(start + batch_size, order.size());
            Tape tape;
            Tensor batch_total;
            for (size_t i = start; i < end; ++i) {
                const TrainingExample& ex = data.train[order[i]];
                LossComponents lc = total_loss(ck.model, ex);
                batch_total = batch_total.defined() ? add(batch_total, lc.total) : lc.total;
                el.train_total += lc.total.item();
                dec_sum += lc.dec.item();
                el.train_ctrl += lc.ctrl.item();
                el.train_vq_c += lc.vq_c.item();
                el.train_vq_s += lc.vq_s.item();
                el.train_vq_v += lc.vq_v.item();
                toks += static_cast<double>(tokens_of(ex));
            }
            Tensor batch_mean = smul(1.0 / static_cast<double>(end - start), batch_total);
            GradientMap grads = tape.backward(batch_mean);
            std::vector<std::vector<double>> gvecs(params.size());
            for (size_t i = 0; i < params.size(); ++i) gvecs[i] = grads.get(params[i].second);
            norm_sum += adam_step(params, gvecs, ck.adam, cfg.learning_rate, cfg.clip_norm);
            steps += 1;
        }
        const auto n = static_cast<double>(data.train.size());
        el.train_dec = dec_sum / n;
        el.train_total /= n;
        el.train_ctrl /= n;
        el.train_vq_c /= n;
        el.train_vq_s /= n;
        el.train_vq_v /= n;
        el.train_dec_per_token = dec_sum / toks;
        el.grad_norm = steps ? norm_sum / static_cast<double>(steps) : 0.0;
        el.val_dec_per_token =
            data.val.empty() ? eval_dec_per_token(ck.model, data.train) : eval_dec_per_token(ck.model, data.val);
        el.improved = el.val_dec_per_token < ck.train.best_val_dec;

        ck.train.epochs_done = epoch;
        ck.train.rng_state = rng_to_string(rng);
        if (el.improved) ck.train.best_val_dec = el.val_dec_per_token;
        emit(el);
        if (!opt.latest_path.empty()) save_checkpoint(opt.latest_path, ck);
        if (el.improved) save_best();
        if (opt.stop_after && opt.stop_after(epoch)) break;
    }
    return logs;
}

} // namespace fvn
