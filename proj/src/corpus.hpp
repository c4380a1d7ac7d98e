#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "error.hpp"

namespace fvn {

enum class DatasetFormat { personage, e2e };

struct Slot {
    std::string key;   // canonical, e.g. "CustomerRating"
    std::string value; // trimmed original surface
};

struct Cmr {
    std::vector<Slot> slots; // input order preserved
    bool has(const std::string& key) const;
    const std::string* value_of(const std::string& key) const;
};

// "customer rating" -> "CustomerRating", "eatType" -> "EatType", "name" -> "Name"
std::string canonical_slot_key(const std::string& raw);
std::string slot_marker(const std::string& canonical_key); // "Name" -> "Name_SLOT"

Cmr parse_cmr(const std::string& text);
std::string serialize_cmr(const Cmr& cmr);

extern const std::vector<std::string> kStyleLabels; // the five personality classes

enum class DelexMode { all_slots, name_near_only };

struct DelexResult {
    std::string text;
    // marker token -> matched surface forms in order of appearance
    std::map<std::string, std::vector<std::string>> substitutions;
    std::vector<std::string> missed_keys; // slot keys whose value never matched
};

DelexResult delexicalize(const std::string& text, const Cmr& cmr, DelexMode mode);
std::string lexicalize(const std::string& delex_text, const std::map<std::string, std::vector<std::string>>& subs);

// Lowercases, peels punctuation off word edges, splits standard English
// contractions; underscores are word characters so slot markers survive.
std::vector<std::string> tokenize(const std::string& text);

class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kBos = 1;
    static constexpr int kEos = 2;
    static constexpr int kUnk = 3;

    Vocabulary();
    int add(const std::string& token);      // id of token, inserting if new
    int id(const std::string& token) const; // kUnk when absent
    bool contains(const std::string& token) const;
    const std::string& token(int id) const;
    int size() const { return static_cast<int>(tokens_.size()); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    std::vector<int> ids(const std::vector<std::string>& toks) const;

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
};

struct Example {
    Cmr cmr;
    std::optional<std::string> style; // one of kStyleLabels; absent for E2E
    std::string reference;            // raw text
    std::string delex_text;
    std::vector<std::string> delex_tokens;
    std::vector<int> delex_token_ids;
    std::map<std::string, std::vector<std::string>> substitutions;
    std::set<std::string> slot_tokens_present; // canonical keys realized as markers
    std::string group_key;                     // serialized CMR (+style) for multi-ref grouping
};

struct DelexStats {
    int64_t total_slots = 0;
    int64_t missed_slots = 0;
    std::map<std::string, int64_t> missed_by_key;
    double miss_rate() const { return total_slots ? static_cast<double>(missed_slots) / total_slots : 0.0; }
};

struct LoadedDataset {
    std::vector<Example> examples;
    Vocabulary vocab;
    DelexStats stats;
    std::vector<std::string> slot_key_inventory;   // sorted canonical keys seen
    std::vector<std::string> slot_value_inventory; // sorted "Key[value]" labels (E2E control targets)
};

// CSV with header naming columns mr, ref and (personage) personality, any
// order, RFC-4180 quoting. When `existing` is given the vocabulary is reused
// and out-of-vocabulary tokens map to UNK (test/dev loading); otherwise the
// vocabulary is built from this file in first-occurrence order.
LoadedDataset load_dataset(const std::string& path, DatasetFormat format, const Vocabulary* existing = nullptr);

struct ConditionSequences {
    std::vector<std::string> content; // linearized CMR tokens
    std::vector<std::string> style;   // style token (personage) / slot-value tokens (E2E)
};

ConditionSequences linearize_condition(const Cmr& cmr, const std::optional<std::string>& style, DatasetFormat format);

// "Key[value]" with the value lowercased; delexicalized slots use "_SLOT_".
std::string slot_value_label(const Slot& slot, DatasetFormat format);

// Multi-reference grouping: indices of examples sharing a group key.
std::map<std::string, std::vector<size_t>> group_references(const std::vector<Example>& examples);

// Canonical line-delimited dump of a loaded dataset (JSON object per line).
void write_dataset_jsonl(const std::string& path, const LoadedDataset& data);

// Internal CSV reader shared with the CLI's generation input (header: mr[,personality][,ref]).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(const std::string& path);

} // namespace fvn
