// C interface over the C++ core. Every entry point translates exceptions
// into status codes and keeps the message in a thread-local slot for
// fvn_last_error(); no exception crosses the library boundary.

#include "fvn/fvn.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "../src/checkpoint.hpp"
#include "../src/config.hpp"
#include "../src/corpus.hpp"
#include "../src/error.hpp"
#include "../src/manifest.hpp"
#include "../src/metrics.hpp"
#include "../src/sampler.hpp"
#include "../src/selftest.hpp"
#include "../src/strings.hpp"
#include "../src/trainer.hpp"

struct fvn_model {
    fvn::Checkpoint ck;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require(const void* p, const char* name) {
    if (p == nullptr) throw fvn::ArgumentError(std::string(name) + " must not be null");
}

template <typename Fn>
fvn_status guarded(Fn&& fn) {
    g_last_error.clear();
    try {
        fn();
        return FVN_OK;
    } catch (const fvn::ArgumentError& e) {
        g_last_error = e.what();
        return FVN_ERR_ARGUMENT;
    } catch (const fvn::DimensionError& e) {
        g_last_error = e.what();
        return FVN_ERR_DIMENSION;
    } catch (const fvn::NumericError& e) {
        g_last_error = e.what();
        return FVN_ERR_NUMERIC;
    } catch (const fvn::ParseError& e) {
        g_last_error = e.what();
        return FVN_ERR_PARSE;
    } catch (const fvn::FormatError& e) {
        g_last_error = e.what();
        return FVN_ERR_FORMAT;
    } catch (const fvn::IoError& e) {
        g_last_error = e.what();
        return FVN_ERR_IO;
    } catch (const fvn::IntegrityError& e) {
        g_last_error = e.what();
        return FVN_ERR_INTEGRITY;
    } catch (const fvn::StateError& e) {
        g_last_error = e.what();
        return FVN_ERR_STATE;
    } catch (const fvn::ConfigError& e) {
        g_last_error = e.what();
        return FVN_ERR_CONFIG;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return FVN_ERR_UNKNOWN;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return FVN_ERR_UNKNOWN;
    } catch (...) {
        g_last_error = "unknown error";
        return FVN_ERR_UNKNOWN;
    }
}

// key<TAB>value summary lines shared by the command wrappers.
class Summary {
public:
    void add(const std::string& key, const std::string& value) { text_ += key + "\t" + value + "\n"; }
    void add(const std::string& key, int64_t value) { add(key, std::to_string(value)); }
    void add(const std::string& key, double value) { add(key, fvn::format_double(value)); }
    const std::string& text() const { return text_; }

private:
    std::string text_;
};

// Replace the `key = value` line in canonical config text, appending the line
// when the key is absent; the subsequent re-parse rejects unknown keys.
std::string override_line(std::string text, const std::string& key, const std::string& value) {
    if (key.empty() || key.find('\n') != std::string::npos) {
        throw fvn::ArgumentError("override key must be a single non-empty line");
    }
    if (value.find('\n') != std::string::npos) {
        throw fvn::ArgumentError("override value for '" + key + "' must be a single line");
    }
    const std::string prefix = key + " = ";
    size_t pos = 0;
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        if (text.compare(pos, std::min(prefix.size(), eol - pos), prefix) == 0) {
            return text.substr(0, pos) + prefix + value + text.substr(eol);
        }
        pos = eol + 1;
    }
    return text + prefix + value + "\n";
}

int column_index(const fvn::CsvTable& csv, const std::string& name) {
    for (size_t i = 0; i < csv.header.size(); ++i) {
        if (csv.header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

struct ConditionRows {
    std::vector<fvn::Cmr> cmrs;
    std::vector<std::optional<std::string>> styles;
};

// Parse a conditions CSV (header: mr[,personality][,ref]) with row numbers in
// every error message. Per-row requirements are checked up front so failures
// never surface from inside a worker thread.
ConditionRows read_conditions(const std::string& path, fvn::DatasetFormat format,
                              const fvn::CodeTables* tables) {
    fvn::CsvTable csv = fvn::read_csv(path);
    int mr_col = column_index(csv, "mr");
    if (mr_col < 0) throw fvn::ParseError("conditions CSV needs an 'mr' column: " + path);
    int style_col = column_index(csv, "personality");

    ConditionRows out;
    out.cmrs.reserve(csv.rows.size());
    out.styles.reserve(csv.rows.size());
    for (size_t i = 0; i < csv.rows.size(); ++i) {
        const std::string row = "conditions row " + std::to_string(i + 1);
        fvn::Cmr cmr;
        try {
            cmr = fvn::parse_cmr(csv.rows[i].at(mr_col));
        } catch (const fvn::ParseError& e) {
            throw fvn::ParseError(row + ": " + e.what());
        }
        std::optional<std::string> style;
        if (style_col >= 0 && !csv.rows[i].at(style_col).empty()) style = csv.rows[i].at(style_col);

        if (format == fvn::DatasetFormat::personage) {
            if (!style) throw fvn::ArgumentError(row + ": a personality label is required in personage mode");
            if (tables != nullptr && tables->style.find(*style) == tables->style.end()) {
                throw fvn::ArgumentError(row + ": unknown style label '" + *style + "'");
            }
        } else if (cmr.slots.empty()) {
            throw fvn::ArgumentError(row + ": e2e generation needs at least one slot");
        }
        out.cmrs.push_back(std::move(cmr));
        out.styles.push_back(std::move(style));
    }
    return out;
}

const fvn::CodeTables& tables_of(const fvn_model* m) {
    if (!m->ck.tables.has_value() || m->ck.tables->empty()) {
        throw fvn::StateError("checkpoint has no code tables; run build-codes first");
    }
    return *m->ck.tables;
}

} // namespace

extern "C" {

const char* fvn_version(void) { return "0.1.0"; }

const char* fvn_last_error(void) { return g_last_error.c_str(); }

void fvn_string_free(char* s) { std::free(s); }

fvn_status fvn_config_render(const char* config_path_or_null,
                             const char* const* override_keys,
                             const char* const* override_values,
                             int n_overrides,
                             char** out_text) {
    if (out_text != nullptr) *out_text = nullptr;
    return guarded([&] {
        require(out_text, "out_text");
        if (n_overrides < 0) throw fvn::ArgumentError("n_overrides must be non-negative");
        if (n_overrides > 0) {
            require(override_keys, "override_keys");
            require(override_values, "override_values");
        }
        fvn::TrainConfig base = config_path_or_null != nullptr
                                    ? fvn::parse_config_file(config_path_or_null)
                                    : fvn::TrainConfig{};
        std::string text = fvn::config_to_string(base);
        for (int i = 0; i < n_overrides; ++i) {
            require(override_keys[i], "override key");
            require(override_values[i], "override value");
            text = override_line(std::move(text), override_keys[i], override_values[i]);
        }
        fvn::TrainConfig cfg = fvn::parse_config_text(text);
        fvn::validate_config(cfg);
        *out_text = dup_string(fvn::config_to_string(cfg));
    });
}

fvn_status fvn_model_open(const char* checkpoint_path, fvn_model** out_model) {
    if (out_model != nullptr) *out_model = nullptr;
    return guarded([&] {
        require(checkpoint_path, "checkpoint_path");
        require(out_model, "out_model");
        auto m = std::make_unique<fvn_model>();
        m->ck = fvn::load_checkpoint(checkpoint_path);
        *out_model = m.release();
    });
}

void fvn_model_close(fvn_model* model) { delete model; }

fvn_status fvn_model_config(const fvn_model* model, char** out_text) {
    if (out_text != nullptr) *out_text = nullptr;
    return guarded([&] {
        require(model, "model");
        require(out_text, "out_text");
        *out_text = dup_string(fvn::config_to_string(model->ck.config));
    });
}

int fvn_model_has_tables(const fvn_model* model) {
    return model != nullptr && model->ck.tables.has_value() && !model->ck.tables->empty() ? 1 : 0;
}

fvn_status fvn_prepare(const char* train_csv,
                       const char* test_csv_or_null,
                       const char* mode,
                       const char* out_dir_or_null,
                       char** out_summary) {
    if (out_summary != nullptr) *out_summary = nullptr;
    return guarded([&] {
        require(train_csv, "train_csv");
        require(mode, "mode");
        fvn::DatasetFormat format = fvn::dataset_format(mode);

        fvn::LoadedDataset train = fvn::load_dataset(train_csv, format);
        Summary s;
        s.add("mode", std::string(mode));
        s.add("train_records", static_cast<int64_t>(train.examples.size()));
        s.add("train_vocab", static_cast<int64_t>(train.vocab.size()));
        s.add("train_slot_keys", static_cast<int64_t>(train.slot_key_inventory.size()));
        s.add("train_delex_slots", train.stats.total_slots);
        s.add("train_delex_missed", train.stats.missed_slots);
        s.add("train_delex_miss_rate", train.stats.miss_rate());

        std::optional<fvn::LoadedDataset> test;
        if (test_csv_or_null != nullptr) {
            test = fvn::load_dataset(test_csv_or_null, format, &train.vocab);
            s.add("test_records", static_cast<int64_t>(test->examples.size()));
            s.add("test_delex_slots", test->stats.total_slots);
            s.add("test_delex_missed", test->stats.missed_slots);
        }

        if (out_dir_or_null != nullptr) {
            namespace fs = std::filesystem;
            std::error_code ec;
            fs::create_directories(out_dir_or_null, ec);
            if (ec) {
                throw fvn::IoError("cannot create directory '" + std::string(out_dir_or_null) +
                                   "': " + ec.message());
            }
            fs::path dir(out_dir_or_null);
            fvn::write_dataset_jsonl((dir / "train.jsonl").string(), train);
            s.add("train_jsonl", (dir / "train.jsonl").string());
            if (test) {
                fvn::write_dataset_jsonl((dir / "test.jsonl").string(), *test);
                s.add("test_jsonl", (dir / "test.jsonl").string());
            }
        }
        if (out_summary != nullptr) *out_summary = dup_string(s.text());
    });
}

fvn_status fvn_train(const char* config_text,
                     const char* resume_checkpoint_or_null,
                     const char* best_out_or_null,
                     const char* latest_out_or_null,
                     const char* log_out_or_null,
                     char** out_summary) {
    if (out_summary != nullptr) *out_summary = nullptr;
    return guarded([&] {
        require(config_text, "config_text");
        fvn::TrainConfig cfg = fvn::parse_config_text(config_text);
        fvn::validate_config(cfg);
        if (cfg.train_csv.empty()) throw fvn::ConfigError("train_csv is required for training");

        fvn::DatasetFormat format = fvn::dataset_format(cfg.mode);
        fvn::LoadedDataset data = fvn::load_dataset(cfg.train_csv, format);

        fvn::Checkpoint ck;
        if (resume_checkpoint_or_null != nullptr) {
            ck = fvn::load_checkpoint(resume_checkpoint_or_null);
            fvn::TrainConfig want = ck.config;
            want.epochs = cfg.epochs;
            if (!(want == cfg)) {
                throw fvn::ConfigError(
                    "configuration does not match the resumed checkpoint (only 'epochs' may change)");
            }
            ck.config.epochs = cfg.epochs;
        } else {
            ck = fvn::init_training(cfg, data);
        }

        auto all = fvn::to_training_examples(data.examples, ck.vocab, format, ck.labels);
        fvn::TrainData split = fvn::split_train_val(std::move(all), ck.config.val_fraction, ck.config.seed);

        fvn::TrainOptions opt;
        if (best_out_or_null != nullptr) opt.best_path = best_out_or_null;
        if (latest_out_or_null != nullptr) opt.latest_path = latest_out_or_null;
        if (log_out_or_null != nullptr) opt.log_path = log_out_or_null;
        std::vector<fvn::EpochLog> logs = fvn::train_model(ck, split, opt);

        Summary s;
        s.add("epochs_done", ck.train.epochs_done);
        s.add("optimizer_steps", ck.adam.t);
        s.add("train_examples", static_cast<int64_t>(split.train.size()));
        s.add("val_examples", static_cast<int64_t>(split.val.size()));
        s.add("best_val_dec_per_token", ck.train.best_val_dec);
        if (!logs.empty()) {
            s.add("final_train_dec_per_token", logs.back().train_dec_per_token);
            s.add("final_train_total", logs.back().train_total);
        }
        s.add("log_lines", static_cast<int64_t>(logs.size()));
        if (!opt.best_path.empty()) s.add("best_checkpoint", opt.best_path);
        if (!opt.latest_path.empty()) s.add("latest_checkpoint", opt.latest_path);
        if (out_summary != nullptr) *out_summary = dup_string(s.text());
    });
}

fvn_status fvn_build_codes(fvn_model* model, const char* out_checkpoint, char** out_summary) {
    if (out_summary != nullptr) *out_summary = nullptr;
    return guarded([&] {
        require(model, "model");
        require(out_checkpoint, "out_checkpoint");
        fvn::DatasetFormat format = fvn::dataset_format(model->ck.config.mode);
        if (model->ck.config.train_csv.empty()) {
            throw fvn::ConfigError("the checkpoint's configuration names no train_csv to build tables from");
        }
        fvn::LoadedDataset data = fvn::load_dataset(model->ck.config.train_csv, format, &model->ck.vocab);
        model->ck.tables = fvn::build_tables(model->ck.model, data.examples, format);
        fvn::save_checkpoint(out_checkpoint, model->ck);

        Summary s;
        s.add("examples", static_cast<int64_t>(data.examples.size()));
        s.add("content_key_sets", static_cast<int64_t>(model->ck.tables->content.size()));
        s.add("style_keys", static_cast<int64_t>(model->ck.tables->style.size()));
        s.add("content_codes", static_cast<int64_t>(model->ck.tables->content_marginal.size()));
        s.add("style_codes", static_cast<int64_t>(model->ck.tables->style_marginal.size()));
        s.add("checkpoint", std::string(out_checkpoint));
        if (out_summary != nullptr) *out_summary = dup_string(s.text());
    });
}

fvn_status fvn_generate(const fvn_model* model,
                        const char* conditions_csv,
                        const char* out_path,
                        uint64_t seed,
                        const char* decode_mode,
                        double temperature,
                        int threads,
                        char** out_summary) {
    if (out_summary != nullptr) *out_summary = nullptr;
    return guarded([&] {
        require(model, "model");
        require(conditions_csv, "conditions_csv");
        require(out_path, "out_path");
        require(decode_mode, "decode_mode");
        const fvn::CodeTables& tables = tables_of(model);

        fvn::GenerationOptions opt;
        std::string decode(decode_mode);
        if (decode == "greedy") {
            opt.mode = fvn::DecodeMode::greedy;
        } else if (decode == "sample") {
            opt.mode = fvn::DecodeMode::sampled;
        } else {
            throw fvn::ArgumentError("decode must be 'greedy' or 'sample', got '" + decode + "'");
        }
        if (!(temperature > 0.0)) throw fvn::ArgumentError("temperature must be positive");
        opt.temperature = temperature;
        if (threads < 1) throw fvn::ArgumentError("threads must be at least 1");

        fvn::DatasetFormat format = fvn::dataset_format(model->ck.config.mode);
        ConditionRows rows = read_conditions(conditions_csv, format, &tables);
        const size_t n = rows.cmrs.size();
        if (n == 0) throw fvn::ArgumentError("conditions CSV has no rows: " + std::string(conditions_csv));

        // Each row draws from its own seed + row stream, so the output bytes
        // do not depend on how rows are spread over threads.
        std::vector<fvn::GenerationResult> results(n);
        auto run_rows = [&](size_t first, size_t stride) {
            for (size_t i = first; i < n; i += stride) {
                std::mt19937_64 rng(seed + i);
                results[i] = fvn::generate(model->ck.model, tables, model->ck.vocab, rows.cmrs[i],
                                           rows.styles[i], format, rng, opt);
            }
        };
        size_t n_workers = std::min<size_t>(static_cast<size_t>(threads), n);
        if (n_workers <= 1) {
            run_rows(0, 1);
        } else {
            std::vector<std::exception_ptr> errors(n_workers);
            std::vector<std::thread> pool;
            pool.reserve(n_workers);
            for (size_t w = 0; w < n_workers; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        run_rows(w, n_workers);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
            for (auto& t : pool) t.join();
            for (const auto& e : errors) {
                if (e) std::rethrow_exception(e);
            }
        }

        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw fvn::IoError("cannot write " + std::string(out_path));
        int64_t fallbacks = 0;
        for (const auto& r : results) {
            out << r.text << "\n";
            if (r.codes.content_fallback) ++fallbacks;
        }
        out.flush();
        if (!out) throw fvn::IoError("failed writing " + std::string(out_path));

        Summary s;
        s.add("rows", static_cast<int64_t>(n));
        s.add("decode", decode);
        if (opt.mode == fvn::DecodeMode::sampled) s.add("temperature", temperature);
        s.add("content_fallbacks", fallbacks);
        s.add("output", std::string(out_path));
        if (out_summary != nullptr) *out_summary = dup_string(s.text());
    });
}

fvn_status fvn_inspect_codes(const fvn_model* model,
                             const char* style_key_or_null,
                             int top_m,
                             uint64_t seed,
                             char** out_report) {
    if (out_report != nullptr) *out_report = nullptr;
    return guarded([&] {
        require(model, "model");
        require(out_report, "out_report");
        const fvn::CodeTables& tables = tables_of(model);
        fvn::DatasetFormat format = fvn::dataset_format(model->ck.config.mode);

        std::vector<std::string> keys;
        if (style_key_or_null != nullptr) {
            keys.emplace_back(style_key_or_null);
        } else {
            for (const auto& [key, probs] : tables.style) keys.push_back(key);
        }
        std::mt19937_64 rng(seed);
        std::string text;
        for (const auto& key : keys) {
            fvn::CodeReport report = fvn::inspect_codes(model->ck.model, tables, model->ck.vocab, key,
                                                        top_m, format, rng);
            if (!text.empty()) text += "\n";
            text += fvn::format_code_report(report);
        }
        *out_report = dup_string(text);
    });
}

fvn_status fvn_evaluate(const char* hyp_path,
                        const char* ref_path,
                        const char* cmr_csv_or_null,
                        const char* style_train_csv_or_null,
                        const char* mode,
                        uint64_t seed,
                        char** out_human,
                        char** out_machine) {
    if (out_human != nullptr) *out_human = nullptr;
    if (out_machine != nullptr) *out_machine = nullptr;
    return guarded([&] {
        require(hyp_path, "hyp_path");
        require(ref_path, "ref_path");
        require(mode, "mode");
        fvn::DatasetFormat format = fvn::dataset_format(mode);

        std::vector<fvn::TokenSeq> hyps = fvn::read_hypotheses_file(hyp_path);
        std::vector<fvn::RefSet> refs = fvn::read_references_file(ref_path);

        std::optional<std::vector<fvn::Cmr>> cmrs;
        std::optional<std::vector<std::string>> style_targets;
        if (cmr_csv_or_null != nullptr) {
            fvn::CsvTable csv = fvn::read_csv(cmr_csv_or_null);
            int mr_col = column_index(csv, "mr");
            if (mr_col < 0) {
                throw fvn::ParseError("conditions CSV needs an 'mr' column: " + std::string(cmr_csv_or_null));
            }
            int style_col = column_index(csv, "personality");
            cmrs.emplace();
            cmrs->reserve(csv.rows.size());
            if (style_col >= 0) style_targets.emplace();
            for (size_t i = 0; i < csv.rows.size(); ++i) {
                try {
                    cmrs->push_back(fvn::parse_cmr(csv.rows[i].at(mr_col)));
                } catch (const fvn::ParseError& e) {
                    throw fvn::ParseError("conditions row " + std::to_string(i + 1) + ": " + e.what());
                }
                if (style_targets) style_targets->push_back(csv.rows[i].at(style_col));
            }
        }

        std::optional<fvn::StyleClassifier> classifier;
        if (style_train_csv_or_null != nullptr) {
            if (!style_targets) {
                throw fvn::ArgumentError(
                    "style evaluation needs a conditions CSV with a personality column");
            }
            fvn::LoadedDataset style_data =
                fvn::load_dataset(style_train_csv_or_null, fvn::DatasetFormat::personage);
            fvn::StyleTrainConfig scfg;
            scfg.seed = seed;
            classifier = fvn::train_style_classifier(style_data.examples, style_data.vocab, scfg);
        }

        fvn::EvalReport report = fvn::evaluate_corpus(hyps, refs, cmrs ? &*cmrs : nullptr,
                                                      classifier ? &*classifier : nullptr,
                                                      style_targets ? &*style_targets : nullptr);

        // E2E hypotheses carry surface forms, not slot markers: delexicalize
        // each against its MR before slot counting so realized values score.
        if (format == fvn::DatasetFormat::e2e && cmrs && !cmrs->empty()) {
            std::vector<fvn::TokenSeq> slot_hyps(hyps.size());
            for (size_t i = 0; i < hyps.size(); ++i) {
                fvn::DelexResult d = fvn::delexicalize(join_tokens(hyps[i]), (*cmrs)[i],
                                                       fvn::DelexMode::all_slots);
                slot_hyps[i] = fvn::tokenize(d.text);
            }
            report.slots = fvn::slot_prf(slot_hyps, *cmrs);
            for (size_t i = 0; i < hyps.size(); ++i) {
                report.per_example[i].slots = fvn::slot_counts(slot_hyps[i], (*cmrs)[i]);
            }
        }

        if (out_human != nullptr) *out_human = dup_string(fvn::format_report(report));
        if (out_machine != nullptr) *out_machine = dup_string(fvn::report_machine_text(report));
    });
}

fvn_status fvn_selftest(char** out_report, int* out_passed) {
    if (out_report != nullptr) *out_report = nullptr;
    if (out_passed != nullptr) *out_passed = 0;
    return guarded([&] {
        require(out_passed, "out_passed");
        fvn::SelftestReport report = fvn::run_selftest();
        *out_passed = report.all_passed() ? 1 : 0;
        if (out_report != nullptr) *out_report = dup_string(fvn::format_selftest(report));
    });
}

fvn_status fvn_git_blob_hash_file(const char* path, char** out_hash) {
    if (out_hash != nullptr) *out_hash = nullptr;
    return guarded([&] {
        require(path, "path");
        require(out_hash, "out_hash");
        *out_hash = dup_string(fvn::git_blob_hash_file(path));
    });
}

fvn_status fvn_timestamp_utc(char** out_timestamp) {
    if (out_timestamp != nullptr) *out_timestamp = nullptr;
    return guarded([&] {
        require(out_timestamp, "out_timestamp");
        *out_timestamp = dup_string(fvn::iso8601_utc_now());
    });
}

fvn_status fvn_manifest_write(const char* path,
                              const char* command,
                              const char* config_text,
                              uint64_t seed,
                              const char* const* input_paths, int n_inputs,
                              const char* const* output_paths, int n_outputs,
                              const char* started_at,
                              const char* finished_at) {
    return guarded([&] {
        require(path, "path");
        require(command, "command");
        require(started_at, "started_at");
        require(finished_at, "finished_at");
        if (n_inputs < 0 || n_outputs < 0) throw fvn::ArgumentError("path counts must be non-negative");
        if (n_inputs > 0) require(input_paths, "input_paths");
        if (n_outputs > 0) require(output_paths, "output_paths");

        fvn::RunManifest m;
        m.command = command;
        m.config_text = config_text != nullptr ? config_text : "";
        m.seed = seed;
        for (int i = 0; i < n_inputs; ++i) {
            require(input_paths[i], "input path");
            m.inputs.emplace_back(input_paths[i], fvn::git_blob_hash_file(input_paths[i]));
        }
        for (int i = 0; i < n_outputs; ++i) {
            require(output_paths[i], "output path");
            m.outputs.emplace_back(output_paths[i]);
        }
        m.started_at = started_at;
        m.finished_at = finished_at;
        fvn::write_manifest(path, m);
    });
}

} // extern "C"
