#pragma once

#include <cstdint>
#include <string>

#include "error.hpp"

namespace fvn {

// Training/model configuration. Parsed from `key = value` lines; `#` starts a
// comment. Unknown or duplicate keys and malformed values are ConfigErrors.
struct TrainConfig {
    std::string mode = "personage"; // "personage" | "e2e"
    std::string train_csv;          // required for training
    std::string embeddings_path;    // optional pretrained word vectors

    int embed_dim = 300;    // D: embedding width, decoder hidden is 2D
    int content_codes = 512; // K: content codebook rows
    double beta = 0.25;     // VQ commitment weight
    double learning_rate = 0.001;
    int batch_size = 32;
    int epochs = 10;
    int max_decode_len = 100;
    double val_fraction = 0.1;
    uint64_t seed = 1;
    bool block_control_grad = false; // stop control-head gradients at the o-sequence
    double clip_norm = 0.0;          // global gradient-norm clip; 0 disables

    bool operator==(const TrainConfig&) const = default;
};

TrainConfig parse_config_text(const std::string& text);
TrainConfig parse_config_file(const std::string& path);

// ConfigError when any field is out of range or inconsistent.
void validate_config(const TrainConfig& cfg);

// Canonical `key = value` serialization; parse_config_text inverts it exactly.
std::string config_to_string(const TrainConfig& cfg);

} // namespace fvn
