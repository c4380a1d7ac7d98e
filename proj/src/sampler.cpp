#include "sampler.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <set>

#include "rng.hpp"
#include "strings.hpp"
#include "tape.hpp"

namespace fvn {

namespace {

std::set<std::string> cmr_key_set(const Cmr& cmr) {
    std::set<std::string> keys;
    for (const auto& s : cmr.slots) keys.insert(s.key);
    return keys;
}

std::string join_keys(const std::set<std::string>& keys) {
    std::string out;
    for (const auto& k : keys) {
        if (!out.empty()) out += '+';
        out += k;
    }
    return out;
}

std::set<std::string> split_keys(const std::string& joined) {
    std::set<std::string> keys;
    size_t start = 0;
    while (start < joined.size()) {
        size_t plus = joined.find('+', start);
        if (plus == std::string::npos) plus = joined.size();
        if (plus > start) keys.insert(joined.substr(start, plus - start));
        start = plus + 1;
    }
    return keys;
}

void normalize(std::vector<double>& counts) {
    double total = 0.0;
    for (double c : counts) total += c;
    if (total > 0.0) {
        for (double& c : counts) c /= total;
    }
}

std::vector<double> codebook_row(const Tensor& cb, int64_t r) {
    const int64_t d = cb.dim(1);
    const auto& data = cb.data();
    return {data.begin() + r * d, data.begin() + (r + 1) * d};
}

Tensor row_tensor(const Tensor& cb, int64_t r) { return Tensor::from({cb.dim(1)}, codebook_row(cb, r)); }

// Exact key-set hit, else the stored set with the largest overlap (ties:
// smallest symmetric difference, then lexicographically smallest key — map
// order makes the first candidate win under strict comparisons), else null
// and the caller uses the marginal.
const ContentEntry* lookup_content(const CodeTables& t, const std::set<std::string>& keys, bool* exact) {
    auto it = t.content.find(join_keys(keys));
    if (it != t.content.end()) {
        *exact = true;
        return &it->second;
    }
    *exact = false;
    const ContentEntry* best = nullptr;
    size_t best_overlap = 0;
    size_t best_symdiff = std::numeric_limits<size_t>::max();
    for (const auto& [key, entry] : t.content) {
        std::set<std::string> stored = split_keys(key);
        size_t overlap = 0;
        for (const auto& k : keys) overlap += stored.count(k);
        if (overlap == 0) continue;
        size_t symdiff = keys.size() + stored.size() - 2 * overlap;
        if (overlap > best_overlap || (overlap == best_overlap && symdiff < best_symdiff)) {
            best_overlap = overlap;
            best_symdiff = symdiff;
            best = &entry;
        }
    }
    return best;
}

std::string known_style_keys(const CodeTables& t) {
    std::string out;
    for (const auto& [label, probs] : t.style) {
        if (!out.empty()) out += ", ";
        out += label;
    }
    return out;
}

std::string lower_ascii(const std::string& s) {
    std::string out = s;
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& tok : tokens) {
        if (!out.empty()) out += ' ';
        out += tok;
    }
    return out;
}

std::string surface_text(const std::vector<std::string>& tokens, const Cmr& cmr, DatasetFormat format) {
    return format == DatasetFormat::e2e ? lexicalize_generated(tokens, cmr) : join_tokens(tokens);
}

} // namespace

std::string content_key(const Cmr& cmr) { return join_keys(cmr_key_set(cmr)); }

CodeTables build_tables(const FvnParams& p, const std::vector<Example>& examples, DatasetFormat format) {
    if (examples.empty()) throw ArgumentError("cannot build code tables from an empty dataset");
    NoGrad guard;
    const auto num_k = static_cast<size_t>(p.dims.content_codes);
    const auto num_n = static_cast<size_t>(p.dims.vocab);
    CodeTables t;
    t.content_marginal.assign(num_k, 0.0);
    t.style_marginal.assign(num_n, 0.0);
    for (const auto& ex : examples) {
        TextCodes codes = encode_text(p, ex.delex_token_ids);
        ContentEntry& entry = t.content[content_key(ex.cmr)];
        if (entry.probs.empty()) {
            entry.probs.assign(num_k, 0.0);
            entry.representative_mr = serialize_cmr(ex.cmr);
        }
        entry.probs[static_cast<size_t>(codes.k)] += 1.0;
        t.content_marginal[static_cast<size_t>(codes.k)] += 1.0;
        if (format == DatasetFormat::personage) {
            if (!ex.style) throw ArgumentError("personage example without a style label");
            std::vector<double>& sv = t.style[*ex.style];
            if (sv.empty()) sv.assign(num_n, 0.0);
            sv[static_cast<size_t>(codes.n)] += 1.0;
        } else {
            for (const auto& slot : ex.cmr.slots) {
                std::vector<double>& sv = t.style[slot_value_label(slot, format)];
                if (sv.empty()) sv.assign(num_n, 0.0);
                sv[static_cast<size_t>(codes.n)] += 1.0;
            }
        }
        t.style_marginal[static_cast<size_t>(codes.n)] += 1.0;
    }
    for (auto& [key, entry] : t.content) normalize(entry.probs);
    for (auto& [key, probs] : t.style) normalize(probs);
    normalize(t.content_marginal);
    normalize(t.style_marginal);
    return t;
}

SampledCodes sample_codes(const FvnParams& p, const CodeTables& t, const Cmr& cmr,
                          const std::optional<std::string>& style, DatasetFormat format,
                          std::mt19937_64& rng) {
    if (t.empty()) throw StateError("code tables are empty; build them from a trained checkpoint first");
    SampledCodes out;
    bool exact = false;
    const ContentEntry* entry = lookup_content(t, cmr_key_set(cmr), &exact);
    out.content_fallback = !exact;
    out.k = static_cast<int>(sample_index(rng, entry ? entry->probs : t.content_marginal));
    out.e_c = row_tensor(p.content_codebook, out.k);
    if (format == DatasetFormat::personage) {
        if (!style) throw ArgumentError("a style label is required for personage generation");
        auto it = t.style.find(*style);
        if (it == t.style.end()) {
            throw ArgumentError("unknown style label '" + *style + "'; valid labels: " + known_style_keys(t));
        }
        out.n.push_back(static_cast<int>(sample_index(rng, it->second)));
        out.e_s = row_tensor(p.style_codebook, out.n.front());
    } else {
        if (cmr.slots.empty()) throw ArgumentError("e2e sampling requires a CMR with at least one slot");
        std::vector<double> acc(static_cast<size_t>(p.dims.embed_dim), 0.0);
        for (const auto& slot : cmr.slots) {
            auto it = t.style.find(slot_value_label(slot, format));
            const std::vector<double>& probs = it != t.style.end() ? it->second : t.style_marginal;
            int n = static_cast<int>(sample_index(rng, probs));
            out.n.push_back(n);
            std::vector<double> row = codebook_row(p.style_codebook, n);
            for (size_t i = 0; i < acc.size(); ++i) acc[i] += row[i];
        }
        const auto count = static_cast<double>(out.n.size());
        for (double& v : acc) v /= count;
        out.e_s = Tensor::from({p.dims.embed_dim}, std::move(acc));
    }
    return out;
}

std::string lexicalize_generated(const std::vector<std::string>& tokens, const Cmr& cmr) {
    std::map<std::string, std::string> by_marker; // lower(marker) -> value
    for (const auto& slot : cmr.slots) by_marker[lower_ascii(slot_marker(slot.key))] = slot.value;
    std::string out;
    for (const auto& tok : tokens) {
        auto it = by_marker.find(lower_ascii(tok));
        if (!out.empty()) out += ' ';
        out += it != by_marker.end() ? it->second : tok;
    }
    return out;
}

GenerationResult generate(const FvnParams& p, const CodeTables& t, const Vocabulary& vocab,
                          const Cmr& cmr, const std::optional<std::string>& style,
                          DatasetFormat format, std::mt19937_64& rng, const GenerationOptions& opt) {
    if (opt.mode == DecodeMode::teacher_forced) {
        throw ArgumentError("generation requires greedy or sampled decoding");
    }
    GenerationResult out;
    out.codes = sample_codes(p, t, cmr, style, format, rng);
    ConditionSequences cs = linearize_condition(cmr, style, format);
    NoGrad guard;
    EncodedCondition cond = encode_condition(p, vocab.ids(cs.content), vocab.ids(cs.style));
    DecodeOptions dopt;
    dopt.mode = opt.mode;
    dopt.temperature = opt.temperature;
    dopt.rng = &rng;
    DecodeResult dec = decode_sequence(p, cond, out.codes.e_c, out.codes.e_s, dopt);
    out.tokens.reserve(dec.tokens.size());
    for (int id : dec.tokens) out.tokens.push_back(vocab.token(id));
    out.text = surface_text(out.tokens, cmr, format);
    return out;
}

CodeReport inspect_codes(const FvnParams& p, const CodeTables& t, const Vocabulary& vocab,
                         const std::string& style_key, int top_m, DatasetFormat format,
                         std::mt19937_64& rng, int samples_per_code) {
    if (t.empty()) throw StateError("code tables are empty; build them from a trained checkpoint first");
    if (top_m <= 0) throw ArgumentError("top_m must be positive");
    if (samples_per_code < 0) throw ArgumentError("samples_per_code must be nonnegative");
    auto it = t.style.find(style_key);
    if (it == t.style.end()) {
        throw ArgumentError("unknown style key '" + style_key + "'; valid keys: " + known_style_keys(t));
    }
    const std::vector<double>& probs = it->second;
    std::vector<int> support;
    for (size_t n = 0; n < probs.size(); ++n) {
        if (probs[n] > 0.0) support.push_back(static_cast<int>(n));
    }
    std::stable_sort(support.begin(), support.end(), [&](int a, int b) { return probs[a] > probs[b]; });
    if (static_cast<int>(support.size()) > top_m) support.resize(static_cast<size_t>(top_m));

    std::vector<const ContentEntry*> entries;
    entries.reserve(t.content.size());
    for (const auto& [key, entry] : t.content) entries.push_back(&entry);

    std::optional<std::string> style;
    if (format == DatasetFormat::personage) style = style_key;

    CodeReport report;
    report.style_key = style_key;
    for (int code : support) {
        CodeReportEntry e;
        e.code = code;
        e.probability = probs[static_cast<size_t>(code)];
        Tensor e_s = row_tensor(p.style_codebook, code);
        for (int s = 0; s < samples_per_code; ++s) {
            const ContentEntry* ce = entries[static_cast<size_t>(uniform_u64(rng, entries.size()))];
            Cmr cmr = parse_cmr(ce->representative_mr);
            Tensor e_c = row_tensor(p.content_codebook, static_cast<int64_t>(sample_index(rng, ce->probs)));
            ConditionSequences cs = linearize_condition(cmr, style, format);
            NoGrad guard;
            EncodedCondition cond = encode_condition(p, vocab.ids(cs.content), vocab.ids(cs.style));
            DecodeOptions dopt; // greedy
            DecodeResult dec = decode_sequence(p, cond, e_c, e_s, dopt);
            std::vector<std::string> tokens;
            tokens.reserve(dec.tokens.size());
            for (int id : dec.tokens) tokens.push_back(vocab.token(id));
            e.samples.push_back(surface_text(tokens, cmr, format));
        }
        report.entries.push_back(std::move(e));
    }
    return report;
}

std::string format_code_report(const CodeReport& r) {
    std::string out = "style: " + r.style_key + "\n";
    for (const auto& e : r.entries) {
        out += "code " + std::to_string(e.code) + "  p=" + format_double(e.probability) + "\n";
        for (size_t i = 0; i < e.samples.size(); ++i) {
            out += "  " + std::to_string(i + 1) + ") " + e.samples[i] + "\n";
        }
    }
    return out;
}

} // namespace fvn
