#include "corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace fvn {

namespace {

bool ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && ascii_space(s[a])) ++a;
    while (b > a && ascii_space(s[b - 1])) --b;
    return s.substr(a, b - a);
}

char lower_ch(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string lower_str(const std::string& s) {
    std::string r = s;
    for (char& c : r) c = lower_ch(c);
    return r;
}

// word characters for boundary checks: alnum, underscore, and any non-ASCII byte
bool word_char(unsigned char c) {
    return std::isalnum(c) || c == '_' || c >= 0x80;
}

} // namespace

const std::vector<std::string> kStyleLabels = {"agreeable", "disagreeable", "conscientious", "unconscientious",
                                               "extravert"};

bool Cmr::has(const std::string& key) const {
    return value_of(key) != nullptr;
}

const std::string* Cmr::value_of(const std::string& key) const {
    for (const Slot& s : slots) {
        if (s.key == key) return &s.value;
    }
    return nullptr;
}

std::string canonical_slot_key(const std::string& raw) {
    std::string t = trim(raw);
    std::string out;
    bool new_word = true;
    // split on separators; capitalize the first letter of each word
    std::vector<std::string> words;
    std::string cur;
    for (char c : t) {
        if (c == ' ' || c == '_' || c == '\t' || c == '-') {
            if (!cur.empty()) words.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) words.push_back(cur);
    (void)new_word;
    for (std::string w : words) {
        bool has_lower = std::any_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; });
        if (!has_lower) w = lower_str(w); // NAME -> name before capitalizing
        if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
        out += w;
    }
    return out;
}

std::string slot_marker(const std::string& canonical_key) {
    return canonical_key + "_SLOT";
}

Cmr parse_cmr(const std::string& text) {
    Cmr cmr;
    size_t i = 0;
    const size_t n = text.size();
    auto err = [&](size_t off, const std::string& what) {
        throw ParseError("CMR parse error at offset " + std::to_string(off) + ": " + what);
    };
    while (true) {
        while (i < n && ascii_space(text[i])) ++i;
        if (i >= n) break;
        size_t key_start = i;
        while (i < n && text[i] != '[' && text[i] != ',') ++i;
        if (i >= n || text[i] == ',') err(key_start, "expected 'Key[value]' entry");
        std::string key_raw = text.substr(key_start, i - key_start);
        if (trim(key_raw).empty()) err(key_start, "empty slot key");
        ++i; // past '['
        size_t value_start = i;
        while (i < n && text[i] != ']') ++i;
        if (i >= n) err(value_start, "unclosed bracket");
        std::string value = trim(text.substr(value_start, i - value_start));
        ++i; // past ']'
        std::string key = canonical_slot_key(key_raw);
        for (const Slot& s : cmr.slots) {
            if (s.key == key) err(key_start, "duplicate slot key '" + key + "'");
        }
        cmr.slots.push_back({key, value});
        while (i < n && ascii_space(text[i])) ++i;
        if (i < n) {
            if (text[i] != ',') err(i, "expected ',' between entries");
            ++i;
        }
    }
    if (cmr.slots.empty()) throw ParseError("CMR parse error: no slots");
    if (cmr.slots.size() > 8) {
        throw ParseError("CMR has " + std::to_string(cmr.slots.size()) + " slots, limit is 8");
    }
    return cmr;
}

std::string serialize_cmr(const Cmr& cmr) {
    std::string out;
    for (size_t i = 0; i < cmr.slots.size(); ++i) {
        if (i) out += ", ";
        out += cmr.slots[i].key + "[" + cmr.slots[i].value + "]";
    }
    return out;
}

namespace {

// Surface variants a slot value may take in text, matched case-insensitively
// and longest-first. Covers the published delexicalization examples: plain
// value, adverbial "-ly" form (moderate -> moderately), and the yes/no
// FamilyFriendly phrasings where the polarity word is part of the phrase.
std::vector<std::string> value_variants(const std::string& key, const std::string& value) {
    std::vector<std::string> out;
    std::string v = lower_str(trim(value));
    if (v.empty()) return out;
    out.push_back(v);
    if (lower_str(key) == "familyfriendly") {
        static const std::vector<std::string> bases = {"family-friendly", "family friendly", "kid-friendly",
                                                       "kid friendly",    "child-friendly",  "child friendly",
                                                       "children-friendly", "children friendly"};
        if (v == "yes") {
            for (const auto& b : bases) out.push_back(b);
        } else if (v == "no") {
            for (const auto& neg : {"not ", "non ", "non-"}) {
                for (const auto& b : bases) out.push_back(neg + b);
            }
            for (const auto& b : bases) out.push_back(b); // weaker fallback after negated forms
        }
    } else {
        out.push_back(v + "ly");
    }
    return out;
}

struct Match {
    size_t pos;
    size_t len;
    size_t slot_index;
};

} // namespace

DelexResult delexicalize(const std::string& text, const Cmr& cmr, DelexMode mode) {
    DelexResult res;
    std::string low = lower_str(text);
    const size_t n = low.size();

    std::vector<size_t> active; // indices of slots considered for replacement
    for (size_t si = 0; si < cmr.slots.size(); ++si) {
        const std::string& key = cmr.slots[si].key;
        if (mode == DelexMode::name_near_only && key != "Name" && key != "Near") continue;
        active.push_back(si);
    }

    // candidate variants per active slot
    std::vector<std::vector<std::string>> vars(cmr.slots.size());
    for (size_t si : active) vars[si] = value_variants(cmr.slots[si].key, cmr.slots[si].value);

    std::vector<bool> matched(cmr.slots.size(), false);
    std::string out;
    out.reserve(text.size());
    size_t i = 0;
    while (i < n) {
        Match best{0, 0, 0};
        bool have = false;
        bool boundary_before = (i == 0) || !word_char(static_cast<unsigned char>(low[i - 1]));
        if (boundary_before) {
            for (size_t si : active) {
                for (const std::string& v : vars[si]) {
                    if (v.size() > best.len && low.compare(i, v.size(), v) == 0) {
                        size_t end = i + v.size();
                        bool boundary_after = (end >= n) || !word_char(static_cast<unsigned char>(low[end]));
                        if (boundary_after) {
                            best = {i, v.size(), si};
                            have = true;
                        }
                    }
                }
            }
        }
        if (have) {
            const std::string marker = slot_marker(cmr.slots[best.slot_index].key);
            out += marker;
            res.substitutions[marker].push_back(text.substr(best.pos, best.len));
            matched[best.slot_index] = true;
            i += best.len;
        } else {
            out += text[i];
            ++i;
        }
    }
    for (size_t si : active) {
        if (!matched[si]) res.missed_keys.push_back(cmr.slots[si].key);
    }
    res.text = std::move(out);
    return res;
}

std::string lexicalize(const std::string& delex_text,
                       const std::map<std::string, std::vector<std::string>>& subs) {
    // lowercase marker -> (canonical marker, next occurrence index)
    std::map<std::string, std::pair<std::string, size_t>> lookup;
    for (const auto& [marker, surfaces] : subs) {
        if (surfaces.empty()) continue;
        lookup[lower_str(marker)] = {marker, 0};
    }
    static const std::string suffix = "_slot";
    std::string out;
    const size_t n = delex_text.size();
    size_t i = 0;
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(delex_text[i]);
        bool boundary_before = (i == 0) || !word_char(static_cast<unsigned char>(delex_text[i - 1]));
        if (boundary_before && word_char(c)) {
            size_t j = i;
            while (j < n && word_char(static_cast<unsigned char>(delex_text[j]))) ++j;
            std::string word = delex_text.substr(i, j - i);
            std::string lw = lower_str(word);
            if (lw.size() > suffix.size() && lw.compare(lw.size() - suffix.size(), suffix.size(), suffix) == 0) {
                auto it = lookup.find(lw);
                if (it == lookup.end()) {
                    throw ArgumentError("lexicalize: no substitution for slot token '" + word + "'");
                }
                const auto& surfaces = subs.at(it->second.first);
                size_t idx = std::min(it->second.second, surfaces.size() - 1);
                out += surfaces[idx];
                ++it->second.second;
            } else {
                out += word;
            }
            i = j;
        } else {
            out += delex_text[i];
            ++i;
        }
    }
    return out;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    auto tok_word_char = [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '-' || c >= 0x80; };

    auto emit_core = [&](std::string core) {
        if (core.empty()) return;
        // standard contraction splits; everything is already lowercased
        if (core.size() > 3 && core.compare(core.size() - 3, 3, "n't") == 0) {
            tokens.push_back(core.substr(0, core.size() - 3));
            tokens.push_back("n't");
            return;
        }
        for (const char* suf : {"'ll", "'re", "'ve", "'s", "'d", "'m"}) {
            size_t sl = std::strlen(suf);
            if (core.size() > sl && core.compare(core.size() - sl, sl, suf) == 0) {
                tokens.push_back(core.substr(0, core.size() - sl));
                tokens.push_back(core.substr(core.size() - sl));
                return;
            }
        }
        tokens.push_back(core);
    };

    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        if (ascii_space(text[i])) {
            ++i;
            continue;
        }
        size_t j = i;
        while (j < n && !ascii_space(text[j])) ++j;
        std::string chunk = lower_str(text.substr(i, j - i));
        i = j;
        // peel punctuation off the edges; apostrophes stay for contraction handling
        size_t a = 0, b = chunk.size();
        std::vector<std::string> lead, trail;
        while (a < b && !tok_word_char(static_cast<unsigned char>(chunk[a])) && chunk[a] != '\'') {
            lead.push_back(std::string(1, chunk[a]));
            ++a;
        }
        while (b > a && !tok_word_char(static_cast<unsigned char>(chunk[b - 1])) && chunk[b - 1] != '\'') {
            trail.push_back(std::string(1, chunk[b - 1]));
            --b;
        }
        // trailing bare apostrophe (plural possessive, closing quote) is punctuation
        if (b > a && chunk[b - 1] == '\'') {
            trail.push_back("'");
            --b;
        }
        // leading apostrophe is an opening quote unless the core is itself a clitic
        if (b > a + 1 && chunk[a] == '\'') {
            static const std::set<std::string> clitics = {"'s", "'ll", "'re", "'ve", "'d", "'m", "'em"};
            if (!clitics.count(chunk.substr(a, b - a))) {
                lead.push_back("'");
                ++a;
            }
        }
        for (const auto& t : lead) tokens.push_back(t);
        emit_core(chunk.substr(a, b - a));
        for (auto it = trail.rbegin(); it != trail.rend(); ++it) tokens.push_back(*it);
    }
    return tokens;
}

Vocabulary::Vocabulary() {
    tokens_ = {"<pad>", "<bos>", "<eos>", "<unk>"};
    for (int i = 0; i < static_cast<int>(tokens_.size()); ++i) index_[tokens_[static_cast<size_t>(i)]] = i;
}

int Vocabulary::add(const std::string& token) {
    auto it = index_.find(token);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(tokens_.size());
    tokens_.push_back(token);
    index_[token] = id;
    return id;
}

int Vocabulary::id(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& token) const {
    return index_.count(token) > 0;
}

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || id >= size()) throw ArgumentError("vocabulary id " + std::to_string(id) + " out of range");
    return tokens_[static_cast<size_t>(id)];
}

std::vector<int> Vocabulary::ids(const std::vector<std::string>& toks) const {
    std::vector<int> out;
    out.reserve(toks.size());
    for (const auto& t : toks) out.push_back(id(t));
    return out;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    CsvTable table;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started_quoted = false;
    size_t i = 0;
    const size_t n = content.size();
    int rownum = 1;
    auto end_field = [&]() {
        row.push_back(field);
        field.clear();
        field_started_quoted = false;
    };
    auto end_row = [&]() {
        end_field();
        if (table.header.empty()) {
            table.header = row;
        } else {
            if (row.size() != table.header.size()) {
                throw FormatError("CSV row " + std::to_string(rownum) + ": expected " +
                                  std::to_string(table.header.size()) + " fields, got " + std::to_string(row.size()));
            }
            table.rows.push_back(row);
        }
        row.clear();
        ++rownum;
    };
    while (i < n) {
        char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < n && content[i + 1] == '"') {
                    field.push_back('"');
                    i += 2;
                    continue;
                }
                in_quotes = false;
                ++i;
                continue;
            }
            field.push_back(c);
            ++i;
            continue;
        }
        if (c == '"' && field.empty() && !field_started_quoted) {
            in_quotes = true;
            field_started_quoted = true;
            ++i;
            continue;
        }
        if (c == ',') {
            end_field();
            ++i;
            continue;
        }
        if (c == '\n' || c == '\r') {
            size_t adv = (c == '\r' && i + 1 < n && content[i + 1] == '\n') ? 2 : 1;
            end_row();
            i += adv;
            continue;
        }
        field.push_back(c);
        ++i;
    }
    if (in_quotes) throw FormatError("CSV: unterminated quoted field at end of file");
    if (!field.empty() || !row.empty()) end_row();
    if (table.header.empty()) throw FormatError("CSV: empty file " + path);
    return table;
}

std::string slot_value_label(const Slot& slot, DatasetFormat format) {
    bool delexed = (format == DatasetFormat::personage) || slot.key == "Name" || slot.key == "Near";
    return slot.key + "[" + (delexed ? std::string("_SLOT_") : lower_str(trim(slot.value))) + "]";
}

ConditionSequences linearize_condition(const Cmr& cmr, const std::optional<std::string>& style,
                                       DatasetFormat format) {
    ConditionSequences out;
    for (const Slot& s : cmr.slots) {
        out.content.push_back(lower_str(s.key));
        bool delexed = (format == DatasetFormat::personage) || s.key == "Name" || s.key == "Near";
        if (!delexed) {
            for (const std::string& vt : tokenize(s.value)) out.content.push_back(vt);
        }
    }
    if (format == DatasetFormat::personage) {
        if (style) out.style.push_back(lower_str(*style));
    } else {
        out.style = out.content; // slot-value tokens carry the style-side signal
    }
    return out;
}

LoadedDataset load_dataset(const std::string& path, DatasetFormat format, const Vocabulary* existing) {
    CsvTable table = read_csv(path);
    int mr_col = -1, ref_col = -1, pers_col = -1;
    for (size_t c = 0; c < table.header.size(); ++c) {
        std::string h = lower_str(trim(table.header[c]));
        if (h == "mr") mr_col = static_cast<int>(c);
        else if (h == "ref") ref_col = static_cast<int>(c);
        else if (h == "personality") pers_col = static_cast<int>(c);
    }
    if (mr_col < 0) throw FormatError(path + ": missing column 'mr' in header (line 1)");
    if (ref_col < 0) throw FormatError(path + ": missing column 'ref' in header (line 1)");
    if (format == DatasetFormat::personage && pers_col < 0) {
        throw FormatError(path + ": missing column 'personality' in header (line 1)");
    }

    LoadedDataset out;
    DelexMode mode = format == DatasetFormat::personage ? DelexMode::all_slots : DelexMode::name_near_only;
    std::set<std::string> keys, labels;
    for (size_t r = 0; r < table.rows.size(); ++r) {
        int line = static_cast<int>(r) + 2;
        const auto& row = table.rows[r];
        Example ex;
        try {
            ex.cmr = parse_cmr(row[static_cast<size_t>(mr_col)]);
        } catch (const ParseError& e) {
            throw ParseError(std::string(e.what()) + " (data line " + std::to_string(line) + ")");
        }
        if (format == DatasetFormat::personage) {
            std::string st = lower_str(trim(row[static_cast<size_t>(pers_col)]));
            if (std::find(kStyleLabels.begin(), kStyleLabels.end(), st) == kStyleLabels.end()) {
                throw FormatError(path + ": unknown personality '" + st + "' (data line " + std::to_string(line) +
                                  ")");
            }
            ex.style = st;
        }
        ex.reference = row[static_cast<size_t>(ref_col)];
        DelexResult dr = delexicalize(ex.reference, ex.cmr, mode);
        ex.delex_text = dr.text;
        ex.substitutions = dr.substitutions;
        ex.delex_tokens = tokenize(ex.delex_text);
        if (ex.delex_tokens.empty()) {
            throw FormatError(path + ": empty reference text (data line " + std::to_string(line) + ")");
        }
        for (const auto& [marker, _] : dr.substitutions) {
            ex.slot_tokens_present.insert(marker.substr(0, marker.size() - 5)); // strip "_SLOT"
        }
        ex.group_key = serialize_cmr(ex.cmr) + "\t" + (ex.style ? *ex.style : std::string());

        int64_t active = 0;
        for (const Slot& s : ex.cmr.slots) {
            if (mode == DelexMode::name_near_only && s.key != "Name" && s.key != "Near") continue;
            ++active;
        }
        out.stats.total_slots += active;
        out.stats.missed_slots += static_cast<int64_t>(dr.missed_keys.size());
        for (const auto& k : dr.missed_keys) ++out.stats.missed_by_key[k];

        for (const Slot& s : ex.cmr.slots) {
            keys.insert(s.key);
            labels.insert(slot_value_label(s, format));
        }
        out.examples.push_back(std::move(ex));
    }
    if (out.examples.empty()) throw FormatError(path + ": no data rows");

    if (existing) {
        out.vocab = *existing;
    } else {
        for (const Example& ex : out.examples) {
            for (const std::string& t : ex.delex_tokens) out.vocab.add(t);
            ConditionSequences cs = linearize_condition(ex.cmr, ex.style, format);
            for (const std::string& t : cs.content) out.vocab.add(t);
            for (const std::string& t : cs.style) out.vocab.add(t);
        }
    }
    for (Example& ex : out.examples) ex.delex_token_ids = out.vocab.ids(ex.delex_tokens);

    out.slot_key_inventory.assign(keys.begin(), keys.end());
    out.slot_value_inventory.assign(labels.begin(), labels.end());
    return out;
}

std::map<std::string, std::vector<size_t>> group_references(const std::vector<Example>& examples) {
    std::map<std::string, std::vector<size_t>> groups;
    for (size_t i = 0; i < examples.size(); ++i) groups[examples[i].group_key].push_back(i);
    return groups;
}

void write_dataset_jsonl(const std::string& path, const LoadedDataset& data) {
    std::ofstream outf(path, std::ios::binary);
    if (!outf) throw IoError("cannot write file: " + path);
    for (const Example& ex : data.examples) {
        nlohmann::json j;
        j["mr"] = serialize_cmr(ex.cmr);
        if (ex.style) j["style"] = *ex.style;
        j["ref"] = ex.reference;
        j["delex"] = ex.delex_text;
        j["tokens"] = ex.delex_tokens;
        nlohmann::json subs = nlohmann::json::object();
        for (const auto& [marker, surfaces] : ex.substitutions) subs[marker] = surfaces;
        j["subs"] = subs;
        j["slots_present"] = std::vector<std::string>(ex.slot_tokens_present.begin(), ex.slot_tokens_present.end());
        outf << j.dump() << "\n";
    }
}

} // namespace fvn
