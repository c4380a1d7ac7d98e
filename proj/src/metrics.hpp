#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "layers.hpp"

namespace fvn {

using TokenSeq = std::vector<std::string>;
using RefSet = std::vector<TokenSeq>;

// Corpus-level metrics over aligned (hypothesis, reference-set) pairs. All
// four reject an empty hypothesis list, mismatched counts, or an empty
// reference set (ArgumentError).
//
// bleu: geometric mean of clipped n-gram precisions (orders 1..max_n) times a
// brevity penalty computed against the closest reference length (ties break
// toward the shorter reference). Zero matches at any order give score 0.
double bleu(const std::vector<TokenSeq>& hyps, const std::vector<RefSet>& refs, int max_n = 4);

// nist: information-weighted n-gram co-occurrence. Info weights come from the
// pooled reference statistics: info(g) = log2(count(prefix)/count(g)), with
// the unigram prefix count being the total reference token count; weights
// that would be negative or undefined contribute 0. Brevity factor
// exp(beta * ln(min(1, L_sys/L_ref))^2) with beta = ln(0.5)/ln(1.5)^2.
double nist(const std::vector<TokenSeq>& hyps, const std::vector<RefSet>& refs, int max_n = 5);

// rouge_l: LCS-based F-measure with beta favoring recall (standard 1.2),
// best reference per example, arithmetic mean over the corpus.
double rouge_l(const std::vector<TokenSeq>& hyps, const std::vector<RefSet>& refs, double beta = 1.2);

// meteor_lite: two-stage unigram alignment (exact, then suffix-stem), each
// stage scanning hypothesis positions left to right and preferring the
// reference position adjacent to the previous match. F = PR/(0.9P + 0.1R),
// fragmentation penalty 0.5*(chunks/matches)^3, score = F*(1 - penalty).
// Best reference per example, corpus mean. No synonym dictionary is used.
double meteor_lite(const std::vector<TokenSeq>& hyps, const std::vector<RefSet>& refs);

// Single-example scores used for the report breakdowns.
double rouge_l_example(const TokenSeq& hyp, const RefSet& refs, double beta = 1.2);
double meteor_lite_example(const TokenSeq& hyp, const RefSet& refs);

// |unique n-grams| / |total n-grams| pooled over the whole corpus. Returns
// nullopt when every text is shorter than n (the ratio is undefined and is
// reported as absent, never as 0). ArgumentError on an empty corpus or n < 1.
std::optional<double> distinct_n(const std::vector<TokenSeq>& texts, int n);

// Suffix stemmer backing the METEOR-lite stem stage: strips the first of
// {ing, ed, es, ly, s} that leaves a stem of >= 3 characters; words of <= 3
// characters are never stemmed. Exposed for tests.
std::string light_stem(const std::string& word);

// ---- slot micro precision / recall / F1 ----

struct SlotCounts {
    int64_t matched = 0;   // hypothesis slot tokens matched to a distinct CMR slot
    int64_t hyp_slots = 0; // slot tokens emitted (duplicates count)
    int64_t ref_slots = 0; // slots in the CMR
};

struct SlotPrf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    SlotCounts counts;
};

// Per-example multiset match: each *_SLOT token in the hypothesis must pair
// with a distinct slot key of the CMR; duplicated tokens are precision
// errors. Aggregation is micro (summed counts across the corpus).
SlotCounts slot_counts(const TokenSeq& hyp, const Cmr& cmr);
SlotPrf slot_prf(const std::vector<TokenSeq>& hyps, const std::vector<Cmr>& cmrs);

// ---- style classifier (trained separately from the generator) ----

struct StyleTrainConfig {
    int64_t embed_dim = 16;
    int64_t epochs = 40;
    int64_t batch_size = 8;
    double learning_rate = 0.005;
    double clip_norm = 0.0; // 0 disables clipping
    uint64_t seed = 1;
};

struct StyleClassifier {
    std::vector<std::string> labels; // sorted observed label set
    Vocabulary vocab;
    int64_t dim = 0;
    EmbeddingTable embedding; // {V, D}
    BiLstmStack encoder;      // 3 bidirectional layers, width D
    DenseLayer hidden;        // D -> D, tanh
    DenseLayer out;           // D -> |labels|
    ParamList params() const;
};

// Trains on the style-annotated subset of `examples` (delexicalized token
// ids against their style labels). ArgumentError when no example carries a
// style label.
StyleClassifier train_style_classifier(const std::vector<Example>& examples, const Vocabulary& vocab,
                                       const StyleTrainConfig& cfg = {});

Tensor style_logits(const StyleClassifier& c, const std::vector<int>& ids);
int classify_one(const StyleClassifier& c, const TokenSeq& tokens); // index into labels
std::vector<int> classify(const StyleClassifier& c, const std::vector<TokenSeq>& texts);

struct MacroPrf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
};

struct StyleEval {
    std::vector<std::string> labels;
    std::vector<std::vector<int64_t>> confusion; // [true][predicted]
    MacroPrf macro;                              // macro average over labels (0/0 -> 0)
};

StyleEval evaluate_style(const StyleClassifier& c, const std::vector<TokenSeq>& texts,
                         const std::vector<std::string>& true_labels);

// ---- aggregate report ----

struct ExampleBreakdown {
    double rouge_l = 0.0;
    double meteor_lite = 0.0;
    SlotCounts slots; // zeros when no CMRs were supplied
};

struct EvalReport {
    int64_t examples = 0;
    double bleu = 0.0;
    double nist = 0.0;
    double rouge_l = 0.0;
    double meteor_lite = 0.0;
    // distinct-n for n in 1..4 over hypotheses and over the pooled references.
    std::map<int, std::optional<double>> distinct_hyp;
    std::map<int, std::optional<double>> distinct_ref;
    std::optional<SlotPrf> slots;   // present when CMRs were supplied
    std::optional<StyleEval> style; // present when a classifier + targets were supplied
    std::vector<ExampleBreakdown> per_example;
};

EvalReport evaluate_corpus(const std::vector<TokenSeq>& hyps, const std::vector<RefSet>& refs,
                           const std::vector<Cmr>* cmrs = nullptr, const StyleClassifier* classifier = nullptr,
                           const std::vector<std::string>* style_targets = nullptr);

std::string format_report(const EvalReport& r);       // human-readable table
std::string report_machine_text(const EvalReport& r); // one "key<TAB>value" per line

// File formats: hypotheses are one text per line; references are groups of
// lines separated by blank lines, aligned with the hypothesis order. Both are
// run through the corpus tokenizer.
std::vector<TokenSeq> read_hypotheses_file(const std::string& path);
std::vector<RefSet> read_references_file(const std::string& path);

} // namespace fvn
