#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "network.hpp"

namespace fvn {

// Count-based conditional code tables, built once over the training set after
// training. Content vectors range over the K content codes; style vectors
// range over the style codebook rows (vocabulary size). Prediction-time
// variation comes from sampling code indices out of these tables — there is
// no learned prior over codes.

struct ContentEntry {
    std::vector<double> probs;     // P(k | slot-key set), sums to 1
    std::string representative_mr; // serialized CMR of the first example with this key set
};

struct CodeTables {
    // Key: sorted canonical slot keys joined with '+', e.g. "Area+EatType+Name".
    std::map<std::string, ContentEntry> content;
    // Key: style label (personage) or "Key[value]" slot-value label (e2e).
    std::map<std::string, std::vector<double>> style;
    std::vector<double> content_marginal; // P(k) over the whole training set
    std::vector<double> style_marginal;   // P(n) over the whole training set

    bool empty() const { return content.empty() || style.empty(); }
};

// The content-table key for a CMR: its canonical slot keys, sorted, '+'-joined.
std::string content_key(const Cmr& cmr);

// Encode every training example, count the nearest (content, style) code
// indices under the example's condition keys (e2e: each slot-value label gets
// its own counter), normalize per key, and keep unconditional marginals as
// the fallback for unseen conditions. Marginals count each example once.
CodeTables build_tables(const FvnParams& p, const std::vector<Example>& examples, DatasetFormat format);

struct SampledCodes {
    int k = -1;         // content code index
    std::vector<int> n; // style indices: one (personage) or one per slot-value (e2e)
    Tensor e_c, e_s;    // selected codebook rows {D}; e2e e_s is the mean of the n rows
    bool content_fallback = false; // the exact key set was absent from the table
};

// Draw code indices for one condition. An unseen key set falls back to the
// stored key set with the largest key overlap (ties: smallest symmetric
// difference, then lexicographically smallest key), and to the marginal when
// nothing overlaps — generation never aborts on an unseen condition.
// Personage requires `style` to be a label present in the table; e2e
// slot-values missing from the table fall back to the style marginal.
SampledCodes sample_codes(const FvnParams& p, const CodeTables& t, const Cmr& cmr,
                          const std::optional<std::string>& style, DatasetFormat format,
                          std::mt19937_64& rng);

struct GenerationOptions {
    DecodeMode mode = DecodeMode::greedy; // teacher_forced is rejected
    double temperature = 1.0;             // sampled mode only
};

struct GenerationResult {
    std::string text;                // surface text; e2e has its slot markers lexicalized
    std::vector<std::string> tokens; // decoded tokens before lexicalization
    SampledCodes codes;
};

// Substitute "*_SLOT" tokens with the CMR's values where available; markers
// without a matching slot are left untouched.
std::string lexicalize_generated(const std::vector<std::string>& tokens, const Cmr& cmr);

// Sample codes, encode the condition, decode, and (e2e only) lexicalize slot
// markers from the input CMR. Personage output stays delexicalized — the
// training texts themselves are fully delexicalized, so markers are the
// surface form. Read-only over model and tables; safe to call from many
// threads with per-thread RNGs.
GenerationResult generate(const FvnParams& p, const CodeTables& t, const Vocabulary& vocab,
                          const Cmr& cmr, const std::optional<std::string>& style,
                          DatasetFormat format, std::mt19937_64& rng,
                          const GenerationOptions& opt = {});

struct CodeReportEntry {
    int code = -1;
    double probability = 0.0;
    std::vector<std::string> samples;
};

struct CodeReport {
    std::string style_key;
    std::vector<CodeReportEntry> entries; // probability non-increasing
};

// The top_m most probable codes under one style table entry, each with
// samples_per_code greedy generations conditioned on that fixed style code.
// Conditions are drawn uniformly from the content table's representative
// CMRs, with k sampled from the matching content vector. If top_m exceeds the
// support of the style vector, all supported codes are reported.
CodeReport inspect_codes(const FvnParams& p, const CodeTables& t, const Vocabulary& vocab,
                         const std::string& style_key, int top_m, DatasetFormat format,
                         std::mt19937_64& rng, int samples_per_code = 3);

// Plain-text rendering: one "code <i>  p=<prob>" header per entry followed by
// its numbered sample generations.
std::string format_code_report(const CodeReport& r);

} // namespace fvn
