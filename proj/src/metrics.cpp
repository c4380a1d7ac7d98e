#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "strings.hpp"
#include "tape.hpp"
#include "trainer.hpp"

namespace fvn {

namespace {

// n-grams are joined with 0x1F (never produced by the tokenizer) so they can
// key hash maps cheaply; the prefix of a joined n-gram is everything before
// the last separator.
constexpr char kSep = '\x1f';

std::string join_ngram(const TokenSeq& toks, size_t start, int n) {
    std::string g = toks[start];
    for (int k = 1; k < n; ++k) {
        g += kSep;
        g += toks[start + static_cast<size_t>(k)];
    }
    return g;
}

using Counts = std::unordered_map<std::string, int64_t>;

Counts ngram_counts(const TokenSeq& toks, int n) {
    Counts c;
    if (static_cast<int>(toks.size()) >= n) {
        for (size_t i = 0; i + static_cast<size_t>(n) <= toks.size(); ++i) ++c[join_ngram(toks, i, n)];
    }
    return c;
}

// Per-segment clipping counts: max count of each n-gram over the references.
Counts max_ref_counts(const RefSet& refs, int n) {
    Counts m;
    for (const TokenSeq& ref : refs) {
        for (const auto& [g, k] : ngram_counts(ref, n)) {
            int64_t& v = m[g];
            v = std::max(v, k);
        }
    }
    return m;
}

void check_aligned(const std::vector<TokenSeq>& hyps, const std::vector<RefSet>& refs, const char* what) {
    if (hyps.empty()) throw ArgumentError(std::string(what) + ": empty hypothesis set");
    if (hyps.size() != refs.size()) {
        throw ArgumentError(std::string(what) + ": " + std::to_string(hyps.size()) + " hypotheses vs " +
                            std::to_string(refs.size()) + " reference sets");
    }
    for (size_t i = 0; i < refs.size(); ++i) {
        if (refs[i].empty()) {
            throw ArgumentError(std::string(what) + ": reference set " + std::to_string(i) + " is empty");
        }
    }
}

int64_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<int64_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (size_t i = 1; i <= a.size(); ++i) {
        for (size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// One METEOR-lite alignment stage. Hypothesis positions are scanned left to
// right; among unmatched reference candidates the one adjacent to the
// previous match is preferred, then the leftmost.
void align_stage(const TokenSeq& hyp, const TokenSeq& ref, bool stemmed, std::vector<bool>& hyp_used,
                 std::vector<bool>& ref_used, std::vector<std::pair<int, int>>& pairs) {
    auto key = [&](const std::string& w) { return stemmed ? light_stem(w) : w; };
    int prev_ref = -2;
    for (size_t i = 0; i < hyp.size(); ++i) {
        if (hyp_used[i]) continue;
        const std::string hk = key(hyp[i]);
        int chosen = -1;
        for (size_t j = 0; j < ref.size(); ++j) {
            if (ref_used[j]) continue;
            if (key(ref[j]) != hk) continue;
            if (static_cast<int>(j) == prev_ref + 1) {
                chosen = static_cast<int>(j);
                break;
            }
            if (chosen < 0) chosen = static_cast<int>(j);
        }
        if (chosen < 0) continue;
        pairs.emplace_back(static_cast<int>(i), chosen);
        hyp_used[i] = true;
        ref_used[static_cast<size_t>(chosen)] = true;
        prev_ref = chosen;
    }
}

double meteor_pair(const TokenSeq& hyp, const TokenSeq& ref) {
    if (hyp.empty() || ref.empty()) return 0.0;
    std::vector<bool> hyp_used(hyp.size(), false), ref_used(ref.size(), false);
    std::vector<std::pair<int, int>> pairs;
    align_stage(hyp, ref, false, hyp_used, ref_used, pairs);
    align_stage(hyp, ref, true, hyp_used, ref_used, pairs);
    std::sort(pairs.begin(), pairs.end());
    const double m = static_cast<double>(pairs.size());
    if (pairs.empty()) return 0.0;
    const double p = m / static_cast<double>(hyp.size());
    const double r = m / static_cast<double>(ref.size());
    const double f = p * r / (0.9 * p + 0.1 * r);
    int chunks = 1;
    for (size_t i = 1; i < pairs.size(); ++i) {
        if (!(pairs[i].first == pairs[i - 1].first + 1 && pairs[i].second == pairs[i - 1].second + 1)) ++chunks;
    }
    const double frag = static_cast<double>(chunks) / m;
    return f * (1.0 - 0.5 * frag * frag * frag);
}

bool is_slot_token(const std::string& tok) {
    static const std::string suffix = "_slot";
    return tok.size() > suffix.size() && tok.compare(tok.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string marker_token(const std::string& canonical_key) {
    std::vector<std::string> toks = tokenize(slot_marker(canonical_key));
    if (toks.size() != 1) throw ArgumentError("slot key '" + canonical_key + "' does not tokenize to one marker");
    return toks[0];
}

double safe_div(int64_t num, int64_t den) { return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0; }

std::string fmt_opt(const std::optional<double>& v) { return v ? format_double(*v) : "n/a"; }

} // namespace

double bleu(const std::vector<TokenSeq>& hyps, const std::vector<RefSet>& refs, int max_n) {
    check_aligned(hyps, refs, "bleu");
    if (max_n < 1) throw ArgumentError("bleu: max_n must be >= 1");
    std::vector<int64_t> match(static_cast<size_t>(max_n), 0), total(static_cast<size_t>(max_n), 0);
    int64_t hyp_len = 0, ref_len = 0;
    for (size_t ex = 0; ex < hyps.size(); ++ex) {
        const TokenSeq& hyp = hyps[ex];
        hyp_len += static_cast<int64_t>(hyp.size());
        // Closest reference length; ties break toward the shorter reference.
        int64_t best = -1, best_gap = 0;
        for (const TokenSeq& ref : refs[ex]) {
            const int64_t len = static_cast<int64_t>(ref.size());
            const int64_t gap = std::llabs(len - static_cast<int64_t>(hyp.size()));
            if (best < 0 || gap < best_gap || (gap == best_gap && len < best)) {
                best = len;
                best_gap = gap;
            }
        }
        ref_len += best;
        for (int n = 1; n <= max_n; ++n) {
            Counts clip = max_ref_counts(refs[ex], n);
            for (const auto& [g, k] : ngram_counts(hyp, n)) {
                auto it = clip.find(g);
                if (it != clip.end()) match[static_cast<size_t>(n - 1)] += std::min(k, it->second);
            }
            total[static_cast<size_t>(n - 1)] +=
                std::max<int64_t>(0, static_cast<int64_t>(hyp.size()) - n + 1);
        }
    }
    double log_p = 0.0;
    for (int n = 0; n < max_n; ++n) {
        if (total[static_cast<size_t>(n)] == 0 || match[static_cast<size_t>(n)] == 0) return 0.0;
        log_p += std::log(static_cast<double>(match[static_cast<size_t>(n)]) /
                          static_cast<double>(total[static_cast<size_t>(n)]));
    }
    double bp = 1.0;
    if (hyp_len == 0) return 0.0;
    if (hyp_len <= ref_len) bp = std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
    return bp * std::exp(log_p / max_n);
}

double nist(const std::vector<TokenSeq>& hyps, const std::vector<RefSet>& refs, int max_n) {
    check_aligned(hyps, refs, "nist");
    if (max_n < 1) throw ArgumentError("nist: max_n must be >= 1");
    // Info weights from the pooled reference statistics.
    std::vector<Counts> cnt(static_cast<size_t>(max_n) + 1);
    int64_t tot_words = 0;
    for (const RefSet& rs : refs) {
        for (const TokenSeq& ref : rs) {
            tot_words += static_cast<int64_t>(ref.size());
            for (int n = 1; n <= max_n; ++n) {
                for (const auto& [g, k] : ngram_counts(ref, n)) cnt[static_cast<size_t>(n)][g] += k;
            }
        }
    }
    auto info = [&](const std::string& g, int n) -> double {
        auto it = cnt[static_cast<size_t>(n)].find(g);
        const int64_t den = it == cnt[static_cast<size_t>(n)].end() ? 0 : it->second;
        int64_t num = 0;
        if (n == 1) {
            num = tot_words;
        } else {
            const std::string prefix = g.substr(0, g.rfind(kSep));
            auto pit = cnt[static_cast<size_t>(n - 1)].find(prefix);
            num = pit == cnt[static_cast<size_t>(n - 1)].end() ? 0 : pit->second;
        }
        if (den <= 0 || num <= den) return 0.0; // never contribute negative information
        return std::log2(static_cast<double>(num) / static_cast<double>(den));
    };
    std::vector<double> num(static_cast<size_t>(max_n) + 1, 0.0);
    std::vector<int64_t> den(static_cast<size_t>(max_n) + 1, 0);
    int64_t sys_len = 0;
    double ref_len = 0.0;
    for (size_t ex = 0; ex < hyps.size(); ++ex) {
        const TokenSeq& hyp = hyps[ex];
        sys_len += static_cast<int64_t>(hyp.size());
        double seg_ref = 0.0;
        for (const TokenSeq& ref : refs[ex]) seg_ref += static_cast<double>(ref.size());
        ref_len += seg_ref / static_cast<double>(refs[ex].size());
        for (int n = 1; n <= max_n; ++n) {
            Counts clip = max_ref_counts(refs[ex], n);
            for (const auto& [g, k] : ngram_counts(hyp, n)) {
                auto it = clip.find(g);
                const int64_t m = it == clip.end() ? 0 : std::min(k, it->second);
                if (m > 0) num[static_cast<size_t>(n)] += static_cast<double>(m) * info(g, n);
            }
            den[static_cast<size_t>(n)] += std::max<int64_t>(0, static_cast<int64_t>(hyp.size()) - n + 1);
        }
    }
    double score = 0.0;
    for (int n = 1; n <= max_n; ++n) {
        if (den[static_cast<size_t>(n)] > 0) {
            score += num[static_cast<size_t>(n)] / static_cast<double>(den[static_cast<size_t>(n)]);
        }
    }
    const double beta = std::log(0.5) / (std::log(1.5) * std::log(1.5));
    double ratio = ref_len > 0.0 ? std::min(1.0, static_cast<double>(sys_len) / ref_len) : 0.0;
    if (ratio <= 0.0) return 0.0;
    const double lr = std::log(ratio);
    return score * std::exp(beta * lr * lr);
}

double rouge_l_example(const TokenSeq& hyp, const RefSet& refs, double beta) {
    double best = 0.0;
    for (const TokenSeq& ref : refs) {
        const int64_t l = lcs_length(hyp, ref);
        if (l == 0) continue;
        const double p = static_cast<double>(l) / static_cast<double>(hyp.size());
        const double r = static_cast<double>(l) / static_cast<double>(ref.size());
        const double b2 = beta * beta;
        best = std::max(best, (1.0 + b2) * r * p / (r + b2 * p));
    }
    return best;
}

double rouge_l(const std::vector<TokenSeq>& hyps, const std::vector<RefSet>& refs, double beta) {
    check_aligned(hyps, refs, "rouge_l");
    double total = 0.0;
    for (size_t i = 0; i < hyps.size(); ++i) total += rouge_l_example(hyps[i], refs[i], beta);
    return total / static_cast<double>(hyps.size());
}

std::string light_stem(const std::string& word) {
    static const std::vector<std::string> suffixes = {"ing", "ed", "es", "ly", "s"};
    if (word.size() <= 3) return word;
    for (const std::string& s : suffixes) {
        if (word.size() > s.size() && word.size() - s.size() >= 3 &&
            word.compare(word.size() - s.size(), s.size(), s) == 0) {
            return word.substr(0, word.size() - s.size());
        }
    }
    return word;
}

double meteor_lite_example(const TokenSeq& hyp, const RefSet& refs) {
    double best = 0.0;
    for (const TokenSeq& ref : refs) best = std::max(best, meteor_pair(hyp, ref));
    return best;
}

double meteor_lite(const std::vector<TokenSeq>& hyps, const std::vector<RefSet>& refs) {
    check_aligned(hyps, refs, "meteor_lite");
    double total = 0.0;
    for (size_t i = 0; i < hyps.size(); ++i) total += meteor_lite_example(hyps[i], refs[i]);
    return total / static_cast<double>(hyps.size());
}

std::optional<double> distinct_n(const std::vector<TokenSeq>& texts, int n) {
    if (texts.empty()) throw ArgumentError("distinct_n: empty corpus");
    if (n < 1) throw ArgumentError("distinct_n: n must be >= 1");
    Counts seen;
    int64_t total = 0;
    for (const TokenSeq& t : texts) {
        for (const auto& [g, k] : ngram_counts(t, n)) {
            seen[g] += k;
            total += k;
        }
    }
    if (total == 0) return std::nullopt;
    return static_cast<double>(seen.size()) / static_cast<double>(total);
}

SlotCounts slot_counts(const TokenSeq& hyp, const Cmr& cmr) {
    SlotCounts c;
    Counts hyp_markers;
    for (const std::string& tok : hyp) {
        if (is_slot_token(tok)) {
            ++hyp_markers[tok];
            ++c.hyp_slots;
        }
    }
    c.ref_slots = static_cast<int64_t>(cmr.slots.size());
    for (const Slot& s : cmr.slots) {
        auto it = hyp_markers.find(marker_token(s.key));
        if (it != hyp_markers.end() && it->second > 0) {
            --it->second; // each CMR slot consumes at most one hypothesis token
            ++c.matched;
        }
    }
    return c;
}

SlotPrf slot_prf(const std::vector<TokenSeq>& hyps, const std::vector<Cmr>& cmrs) {
    if (hyps.size() != cmrs.size()) {
        throw ArgumentError("slot_prf: " + std::to_string(hyps.size()) + " hypotheses vs " +
                            std::to_string(cmrs.size()) + " CMRs");
    }
    SlotPrf out;
    for (size_t i = 0; i < hyps.size(); ++i) {
        SlotCounts c = slot_counts(hyps[i], cmrs[i]);
        out.counts.matched += c.matched;
        out.counts.hyp_slots += c.hyp_slots;
        out.counts.ref_slots += c.ref_slots;
    }
    // Vacuously perfect when neither side has slots; one-sided emptiness is a
    // plain zero.
    if (out.counts.hyp_slots == 0 && out.counts.ref_slots == 0) {
        out.precision = out.recall = out.f1 = 1.0;
        return out;
    }
    out.precision = safe_div(out.counts.matched, out.counts.hyp_slots);
    out.recall = safe_div(out.counts.matched, out.counts.ref_slots);
    out.f1 = out.precision + out.recall > 0.0
                 ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                 : 0.0;
    return out;
}

// ---- style classifier ----

ParamList StyleClassifier::params() const {
    ParamList ps;
    embedding.collect("embedding", ps);
    encoder.collect("encoder", ps);
    hidden.collect("hidden", ps);
    out.collect("out", ps);
    return ps;
}

Tensor style_logits(const StyleClassifier& c, const std::vector<int>& ids) {
    std::vector<int> padded = ids;
    if (padded.empty()) padded.push_back(Vocabulary::kUnk); // encoder needs one step
    Encoded enc = bilstm_encode_ids(c.encoder, c.embedding, padded);
    Tensor h = tanh(dense_apply(c.hidden, enc.last));
    return dense_apply(c.out, h);
}

StyleClassifier train_style_classifier(const std::vector<Example>& examples, const Vocabulary& vocab,
                                       const StyleTrainConfig& cfg) {
    std::vector<std::pair<std::vector<int>, std::string>> rows;
    std::set<std::string> label_set;
    for (const Example& ex : examples) {
        if (!ex.style) continue;
        rows.emplace_back(ex.delex_token_ids, *ex.style);
        label_set.insert(*ex.style);
    }
    if (rows.empty()) throw ArgumentError("style classifier: dataset has no style labels");
    if (cfg.embed_dim < 2 || cfg.embed_dim % 2 != 0) {
        throw ArgumentError("style classifier: embed_dim must be a positive even number");
    }

    StyleClassifier c;
    c.labels.assign(label_set.begin(), label_set.end());
    c.vocab = vocab;
    c.dim = cfg.embed_dim;
    std::map<std::string, int> label_index;
    for (size_t i = 0; i < c.labels.size(); ++i) label_index[c.labels[i]] = static_cast<int>(i);

    std::mt19937_64 rng(cfg.seed);
    c.embedding = make_embedding(rng, vocab.size(), cfg.embed_dim);
    c.encoder = make_bilstm_stack(rng, 3, cfg.embed_dim);
    c.hidden = make_dense(rng, cfg.embed_dim, cfg.embed_dim);
    c.out = make_dense(rng, static_cast<int64_t>(c.labels.size()), cfg.embed_dim);

    ParamList params = c.params();
    AdamState adam;
    adam.m.resize(params.size());
    adam.v.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
        adam.m[i].assign(params[i].second.data().size(), 0.0);
        adam.v[i].assign(params[i].second.data().size(), 0.0);
    }

    std::vector<size_t> order(rows.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    const int64_t batch = std::max<int64_t>(1, cfg.batch_size);
    for (int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        seeded_shuffle(order, rng);
        for (size_t start = 0; start < order.size(); start += static_cast<size_t>(batch)) {
            const size_t end = std::min(order.size(), start + static_cast<size_t>(batch));
            Tape tape;
            Tensor total;
            for (size_t i = start; i < end; ++i) {
                const auto& [ids, label] = rows[order[i]];
                Tensor loss = cross_entropy(style_logits(c, ids), label_index.at(label));
                total = total.defined() ? add(total, loss) : loss;
            }
            Tensor mean_loss = smul(1.0 / static_cast<double>(end - start), total);
            GradientMap grads = tape.backward(mean_loss);
            std::vector<std::vector<double>> gvecs(params.size());
            for (size_t i = 0; i < params.size(); ++i) gvecs[i] = grads.get(params[i].second);
            adam_step(params, gvecs, adam, cfg.learning_rate, cfg.clip_norm);
        }
    }
    return c;
}

int classify_one(const StyleClassifier& c, const TokenSeq& tokens) {
    NoGrad guard;
    Tensor logits = style_logits(c, c.vocab.ids(tokens));
    const std::vector<double>& v = logits.data();
    int best = 0;
    for (size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[static_cast<size_t>(best)]) best = static_cast<int>(i);
    }
    return best;
}

std::vector<int> classify(const StyleClassifier& c, const std::vector<TokenSeq>& texts) {
    std::vector<int> out;
    out.reserve(texts.size());
    for (const TokenSeq& t : texts) out.push_back(classify_one(c, t));
    return out;
}

StyleEval evaluate_style(const StyleClassifier& c, const std::vector<TokenSeq>& texts,
                         const std::vector<std::string>& true_labels) {
    if (texts.size() != true_labels.size()) {
        throw ArgumentError("evaluate_style: " + std::to_string(texts.size()) + " texts vs " +
                            std::to_string(true_labels.size()) + " labels");
    }
    if (texts.empty()) throw ArgumentError("evaluate_style: empty input");
    std::map<std::string, int> label_index;
    for (size_t i = 0; i < c.labels.size(); ++i) label_index[c.labels[i]] = static_cast<int>(i);

    StyleEval ev;
    ev.labels = c.labels;
    ev.confusion.assign(c.labels.size(), std::vector<int64_t>(c.labels.size(), 0));
    int64_t correct = 0;
    for (size_t i = 0; i < texts.size(); ++i) {
        auto it = label_index.find(true_labels[i]);
        if (it == label_index.end()) {
            throw ArgumentError("evaluate_style: unknown label '" + true_labels[i] + "'");
        }
        const int pred = classify_one(c, texts[i]);
        ++ev.confusion[static_cast<size_t>(it->second)][static_cast<size_t>(pred)];
        if (pred == it->second) ++correct;
    }
    double psum = 0.0, rsum = 0.0, fsum = 0.0;
    for (size_t k = 0; k < c.labels.size(); ++k) {
        int64_t tp = ev.confusion[k][k], pred_k = 0, true_k = 0;
        for (size_t j = 0; j < c.labels.size(); ++j) {
            pred_k += ev.confusion[j][k];
            true_k += ev.confusion[k][j];
        }
        const double p = safe_div(tp, pred_k);
        const double r = safe_div(tp, true_k);
        psum += p;
        rsum += r;
        fsum += p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    }
    const double nl = static_cast<double>(c.labels.size());
    ev.macro.precision = psum / nl;
    ev.macro.recall = rsum / nl;
    ev.macro.f1 = fsum / nl;
    ev.macro.accuracy = static_cast<double>(correct) / static_cast<double>(texts.size());
    return ev;
}

// ---- aggregate report ----

EvalReport evaluate_corpus(const std::vector<TokenSeq>& hyps, const std::vector<RefSet>& refs,
                           const std::vector<Cmr>* cmrs, const StyleClassifier* classifier,
                           const std::vector<std::string>* style_targets) {
    check_aligned(hyps, refs, "evaluate");
    EvalReport r;
    r.examples = static_cast<int64_t>(hyps.size());
    r.bleu = bleu(hyps, refs);
    r.nist = nist(hyps, refs);
    r.rouge_l = rouge_l(hyps, refs);
    r.meteor_lite = meteor_lite(hyps, refs);
    std::vector<TokenSeq> pooled_refs;
    for (const RefSet& rs : refs) pooled_refs.insert(pooled_refs.end(), rs.begin(), rs.end());
    for (int n = 1; n <= 4; ++n) {
        r.distinct_hyp[n] = distinct_n(hyps, n);
        r.distinct_ref[n] = distinct_n(pooled_refs, n);
    }
    if (cmrs) r.slots = slot_prf(hyps, *cmrs);
    if (classifier && style_targets) r.style = evaluate_style(*classifier, hyps, *style_targets);

    r.per_example.resize(hyps.size());
    for (size_t i = 0; i < hyps.size(); ++i) {
        r.per_example[i].rouge_l = rouge_l_example(hyps[i], refs[i]);
        r.per_example[i].meteor_lite = meteor_lite_example(hyps[i], refs[i]);
        if (cmrs) r.per_example[i].slots = slot_counts(hyps[i], (*cmrs)[i]);
    }
    return r;
}

std::string format_report(const EvalReport& r) {
    std::ostringstream os;
    os << "evaluation over " << r.examples << " examples\n";
    os << "  BLEU         " << format_double(r.bleu) << "\n";
    os << "  NIST         " << format_double(r.nist) << "\n";
    os << "  ROUGE-L      " << format_double(r.rouge_l) << "\n";
    os << "  METEOR-lite  " << format_double(r.meteor_lite) << "\n";
    os << "  distinct-n (corpus ratio)   generated / references\n";
    for (const auto& [n, v] : r.distinct_hyp) {
        os << "    n=" << n << "  " << fmt_opt(v) << " / " << fmt_opt(r.distinct_ref.at(n)) << "\n";
    }
    if (r.slots) {
        os << "  slot micro P/R/F1  " << format_double(r.slots->precision) << " / "
           << format_double(r.slots->recall) << " / " << format_double(r.slots->f1) << "  (matched "
           << r.slots->counts.matched << ", emitted " << r.slots->counts.hyp_slots << ", expected "
           << r.slots->counts.ref_slots << ")\n";
    }
    if (r.style) {
        os << "  style macro P/R/F1  " << format_double(r.style->macro.precision) << " / "
           << format_double(r.style->macro.recall) << " / " << format_double(r.style->macro.f1)
           << "  accuracy " << format_double(r.style->macro.accuracy) << "\n";
        os << "  style confusion (rows = true, cols = predicted; labels "
           << [&] {
                  std::string s;
                  for (size_t i = 0; i < r.style->labels.size(); ++i) {
                      if (i) s += ", ";
                      s += r.style->labels[i];
                  }
                  return s;
              }()
           << ")\n";
        for (const auto& row : r.style->confusion) {
            os << "   ";
            for (int64_t v : row) os << " " << v;
            os << "\n";
        }
    }
    return os.str();
}

std::string report_machine_text(const EvalReport& r) {
    std::ostringstream os;
    os << "examples\t" << r.examples << "\n";
    os << "bleu\t" << format_double(r.bleu) << "\n";
    os << "nist\t" << format_double(r.nist) << "\n";
    os << "rouge_l\t" << format_double(r.rouge_l) << "\n";
    os << "meteor_lite\t" << format_double(r.meteor_lite) << "\n";
    for (const auto& [n, v] : r.distinct_hyp) os << "distinct_" << n << "_hyp\t" << fmt_opt(v) << "\n";
    for (const auto& [n, v] : r.distinct_ref) os << "distinct_" << n << "_ref\t" << fmt_opt(v) << "\n";
    if (r.slots) {
        os << "slot_precision\t" << format_double(r.slots->precision) << "\n";
        os << "slot_recall\t" << format_double(r.slots->recall) << "\n";
        os << "slot_f1\t" << format_double(r.slots->f1) << "\n";
    }
    if (r.style) {
        os << "style_macro_precision\t" << format_double(r.style->macro.precision) << "\n";
        os << "style_macro_recall\t" << format_double(r.style->macro.recall) << "\n";
        os << "style_macro_f1\t" << format_double(r.style->macro.f1) << "\n";
        os << "style_accuracy\t" << format_double(r.style->macro.accuracy) << "\n";
    }
    return os.str();
}

std::vector<TokenSeq> read_hypotheses_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open hypothesis file: " + path);
    std::vector<TokenSeq> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out.push_back(tokenize(line));
    }
    return out;
}

std::vector<RefSet> read_references_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open reference file: " + path);
    std::vector<RefSet> out;
    RefSet group;
    std::string line;
    auto flush = [&] {
        if (!group.empty()) {
            out.push_back(std::move(group));
            group.clear();
        }
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        bool blank = line.find_first_not_of(" \t") == std::string::npos;
        if (blank) {
            flush();
        } else {
            group.push_back(tokenize(line));
        }
    }
    flush();
    return out;
}

} // namespace fvn
