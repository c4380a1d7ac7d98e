#pragma once

#include <functional>
#include <string>
#include <vector>

#include "checkpoint.hpp"

namespace fvn {

// "personage" | "e2e" -> DatasetFormat; anything else is a ConfigError.
DatasetFormat dataset_format(const std::string& mode);

// One line of the training log. epoch 0 is the evaluation-only pass over the
// freshly initialized model, before any parameter update.
struct EpochLog {
    int64_t epoch = 0;
    double train_total = 0.0; // per-example means over the epoch
    double train_dec = 0.0;
    double train_ctrl = 0.0;
    double train_vq_c = 0.0;
    double train_vq_s = 0.0;
    double train_vq_v = 0.0;
    double train_dec_per_token = 0.0;
    double val_dec_per_token = 0.0;
    double grad_norm = 0.0; // mean pre-clip global gradient norm; 0 for epoch 0
    bool improved = false;  // new best validation decoder loss
};

// One JSON object per line, fixed key order, shortest round-trip doubles:
// identical runs produce byte-identical logs.
std::string epoch_log_line(const EpochLog& log);

// One bias-corrected Adam update over every parameter, applied in place.
// `grads` is aligned with `params` (one flat vector each). A non-finite
// gradient raises NumericError naming the parameter, before any state (t, m,
// v, weights) changes. clip_norm > 0 rescales the whole gradient set when its
// global L2 norm exceeds the limit. Returns the pre-clip global norm.
double adam_step(const ParamList& params, const std::vector<std::vector<double>>& grads, AdamState& state,
                 double lr, double clip_norm, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

std::vector<TrainingExample> to_training_examples(const std::vector<Example>& examples, const Vocabulary& vocab,
                                                  DatasetFormat format, const LabelInventories& inv);

struct TrainData {
    std::vector<TrainingExample> train;
    std::vector<TrainingExample> val;
};

// Deterministic validation split: a dedicated RNG (seed + 1) shuffles the
// indices once; floor(fraction * n) of them — at least 1 and at most n - 1
// when fraction > 0 — become validation, both sides keeping dataset order.
// fraction <= 0 leaves validation empty (best tracking then falls back to the
// training decoder loss). Datasets with a provided dev split skip this and
// fill TrainData::val directly.
TrainData split_train_val(std::vector<TrainingExample> examples, double fraction, uint64_t seed);

// Fresh checkpoint: vocabulary and label inventories from the dataset, model
// initialized from cfg.seed (optionally with pretrained embeddings), zeroed
// optimizer state, and the post-init RNG stream stored for the first epoch's
// shuffle. Empty dataset -> ArgumentError.
Checkpoint init_training(const TrainConfig& cfg, const LoadedDataset& data);

struct TrainOptions {
    std::string best_path;   // best-by-validation checkpoint (empty: not written)
    std::string latest_path; // end-of-epoch checkpoint for resume (empty: not written)
    std::string log_path;    // JSONL epoch log, appended (empty: not written)
    std::function<void(const EpochLog&)> on_epoch;      // called for every emitted log line
    std::function<bool(int64_t epoch)> stop_after;      // return true to stop after this epoch
};

// Run (or resume) training to cfg.epochs, updating ck in place. Epochs
// [ck.train.epochs_done + 1, cfg.epochs] are executed; a fresh checkpoint
// first emits the epoch-0 evaluation line. Single-threaded by contract:
// (seed, config, dataset) fixes every logged value bit-for-bit, and resuming
// from latest_path continues the exact trajectory of an uninterrupted run.
// Returns the logs emitted by this call.
std::vector<EpochLog> train_model(Checkpoint& ck, const TrainData& data, const TrainOptions& opt = {});

// Mean teacher-forced decoder cross-entropy per token (EOS included), no
// gradients, no updates.
double eval_dec_per_token(const FvnParams& p, const std::vector<TrainingExample>& examples);

} // namespace fvn
