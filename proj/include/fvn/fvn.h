#ifndef FVN_H
#define FVN_H

/*
 * C interface to the focused-variation generation library.
 *
 * Every function returns an fvn_status; FVN_OK means success and anything
 * else is an error whose human-readable message is available through
 * fvn_last_error() on the calling thread until its next call into the
 * library. Strings returned through char** out-parameters are heap
 * allocations owned by the caller; release them with fvn_string_free().
 * Out-parameters are set to NULL/0 on entry, so they only carry values
 * when the call succeeds.
 */

#include <stdint.h>

#if defined(_WIN32)
#define FVN_API __declspec(dllexport)
#else
#define FVN_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fvn_status {
    FVN_OK = 0,
    FVN_ERR_ARGUMENT = 1,  /* invalid argument or value */
    FVN_ERR_DIMENSION = 2, /* tensor/layer shape mismatch */
    FVN_ERR_NUMERIC = 3,   /* non-finite numbers where finite ones are required */
    FVN_ERR_PARSE = 4,     /* malformed text input (CSV, config, CMR) */
    FVN_ERR_FORMAT = 5,    /* unrecognized or unsupported binary format */
    FVN_ERR_IO = 6,        /* file unreadable/unwritable */
    FVN_ERR_INTEGRITY = 7, /* corrupt data: truncation, checksum, inconsistency */
    FVN_ERR_STATE = 8,     /* operation needs state the object does not have */
    FVN_ERR_CONFIG = 9,    /* invalid configuration key or value */
    FVN_ERR_UNKNOWN = 10   /* anything else */
} fvn_status;

/* Library version as "major.minor.patch". Static storage; do not free. */
FVN_API const char* fvn_version(void);

/* Message of the calling thread's most recent failure; empty string after a
 * success. The pointer stays valid until this thread's next library call. */
FVN_API const char* fvn_last_error(void);

/* Free a string returned through a char** out-parameter. NULL is a no-op. */
FVN_API void fvn_string_free(char* s);

/*
 * Configuration.
 *
 * Renders the effective `key = value` configuration text: defaults, then the
 * optional config file, then overrides applied in order. Unknown keys and
 * out-of-range values are rejected. The result is in canonical form (sorted
 * keys, one per line) and parses back to the identical configuration.
 */
FVN_API fvn_status fvn_config_render(const char* config_path_or_null,
                                     const char* const* override_keys,
                                     const char* const* override_values,
                                     int n_overrides,
                                     char** out_text);

/*
 * Model handle: one checkpoint loaded into memory (parameters, vocabulary,
 * label inventories, optimizer/trainer state, and code tables when present).
 */
typedef struct fvn_model fvn_model;

FVN_API fvn_status fvn_model_open(const char* checkpoint_path, fvn_model** out_model);
FVN_API void fvn_model_close(fvn_model* model);

/* Canonical configuration text stored in the checkpoint. */
FVN_API fvn_status fvn_model_config(const fvn_model* model, char** out_text);

/* 1 when the checkpoint carries code tables (after build-codes), else 0. */
FVN_API int fvn_model_has_tables(const fvn_model* model);

/*
 * Corpus preparation: load a training CSV (and optionally a test CSV sharing
 * the training vocabulary), delexicalize and tokenize it, and report corpus
 * statistics as "key<TAB>value" lines. When out_dir is given, canonical
 * train.jsonl / test.jsonl dumps are written there.
 * mode is "personage" or "e2e".
 */
FVN_API fvn_status fvn_prepare(const char* train_csv,
                               const char* test_csv_or_null,
                               const char* mode,
                               const char* out_dir_or_null,
                               char** out_summary);

/*
 * Train a model from configuration text (as produced by fvn_config_render).
 * With resume_checkpoint the stored trajectory continues exactly where it
 * stopped; the configuration must then match the checkpoint's except for
 * `epochs`, which may be raised. best_out receives the checkpoint with the
 * lowest validation decoder loss, latest_out the end-of-epoch checkpoint for
 * resuming, log_out the JSONL epoch log (appended). Any of the three may be
 * NULL to skip that file. Identical inputs and seed reproduce every logged
 * value bit for bit.
 */
FVN_API fvn_status fvn_train(const char* config_text,
                             const char* resume_checkpoint_or_null,
                             const char* best_out_or_null,
                             const char* latest_out_or_null,
                             const char* log_out_or_null,
                             char** out_summary);

/*
 * Build the conditional code-frequency tables over the model's training
 * corpus and save the augmented checkpoint to out_checkpoint. The corpus is
 * reloaded from the train_csv recorded in the model's configuration.
 */
FVN_API fvn_status fvn_build_codes(fvn_model* model,
                                   const char* out_checkpoint,
                                   char** out_summary);

/*
 * Generate one text per row of conditions_csv (header: mr[,personality]) and
 * write them to out_path, one text per line, aligned with the input rows.
 * decode_mode is "greedy" or "sample"; temperature scales sampled decoding.
 * Generation draws per-row randomness from seed, so results are identical
 * for any thread count. Requires code tables (see fvn_build_codes).
 */
FVN_API fvn_status fvn_generate(const fvn_model* model,
                                const char* conditions_csv,
                                const char* out_path,
                                uint64_t seed,
                                const char* decode_mode,
                                double temperature,
                                int threads,
                                char** out_summary);

/*
 * Report the top_m most probable codes for one style table entry — or for
 * every entry when style_key is NULL — with sample generations per code.
 */
FVN_API fvn_status fvn_inspect_codes(const fvn_model* model,
                                     const char* style_key_or_null,
                                     int top_m,
                                     uint64_t seed,
                                     char** out_report);

/*
 * Score hypotheses (one text per line) against references (blank-line
 * separated groups, aligned by order). cmr_csv adds slot precision/recall/F1
 * against each row's MR; with mode "e2e" hypotheses are delexicalized
 * against their MR before slot counting. style_train_csv additionally trains
 * a style classifier on that corpus and scores the hypotheses against the
 * personality column of cmr_csv (seed fixes the classifier). out_human is a
 * readable table, out_machine "key<TAB>value" lines; either may be NULL.
 */
FVN_API fvn_status fvn_evaluate(const char* hyp_path,
                                const char* ref_path,
                                const char* cmr_csv_or_null,
                                const char* style_train_csv_or_null,
                                const char* mode,
                                uint64_t seed,
                                char** out_human,
                                char** out_machine);

/*
 * Run the built-in self checks (hash pins, RNG stream pins, gradient checks,
 * quantizer identities, optimizer behavior, metric and chi-square oracles,
 * checkpoint round-trip, sampler table invariants). *out_passed is 1 when
 * every check passed. The report has one PASS/FAIL line per check; pass NULL
 * to skip it. Returns FVN_OK whenever the checks could be executed.
 */
FVN_API fvn_status fvn_selftest(char** out_report, int* out_passed);

/* Content hash of a file, identical to `git hash-object <file>`. */
FVN_API fvn_status fvn_git_blob_hash_file(const char* path, char** out_hash);

/* Current UTC time as ISO-8601 (e.g. "2026-01-31T12:34:56Z"). */
FVN_API fvn_status fvn_timestamp_utc(char** out_timestamp);

/*
 * Write a reproducibility manifest (JSON) describing one command run:
 * the command line label, the configuration snapshot, the seed, every input
 * path with its content hash, every output path, and the run's start/finish
 * timestamps. Input files are hashed by this call and must exist.
 */
FVN_API fvn_status fvn_manifest_write(const char* path,
                                      const char* command,
                                      const char* config_text,
                                      uint64_t seed,
                                      const char* const* input_paths, int n_inputs,
                                      const char* const* output_paths, int n_outputs,
                                      const char* started_at,
                                      const char* finished_at);

#ifdef __cplusplus
}
#endif

#endif /* FVN_H */
