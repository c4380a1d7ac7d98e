#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "sampler.hpp"

namespace fvn {

// Optimizer state, aligned index-for-index with FvnParams::params().
struct AdamState {
    int64_t t = 0;                         // completed update steps
    std::vector<std::vector<double>> m, v; // first/second moment per parameter
};

// Everything the training loop needs to resume bit-exactly.
struct TrainState {
    int64_t epochs_done = 0;
    double best_val_dec = std::numeric_limits<double>::infinity(); // per-token validation loss
    std::string rng_state; // mt19937_64 stream state (operator<< text form)
};

// One self-contained model snapshot: a checkpoint file round-trips all of
// this bit-for-bit.
struct Checkpoint {
    TrainConfig config;
    Vocabulary vocab;
    LabelInventories labels;
    FvnParams model;
    AdamState adam;
    TrainState train;
    std::optional<CodeTables> tables; // present after build-codes
};

// Model dimensions are derived, not stored: config + vocabulary + label
// inventories determine them completely.
FvnDims dims_from(const TrainConfig& cfg, int64_t vocab_size, const LabelInventories& labels);

// Single binary file: 8-byte magic, u32 format version, then named sections,
// each with its payload length and CRC32. Little-endian throughout; doubles
// are raw IEEE-754 bits, so save -> load -> save is byte-identical. The write
// goes through a temp file + rename so an interrupted save never leaves a
// half-written checkpoint behind.
void save_checkpoint(const std::string& path, const Checkpoint& ck);

// Errors: IoError (unreadable), FormatError (not a checkpoint / unsupported
// version / unknown section), IntegrityError (truncation, checksum mismatch,
// or internally inconsistent contents).
Checkpoint load_checkpoint(const std::string& path);

// ConfigError when the checkpoint's mode differs from the requested one.
void require_mode(const Checkpoint& ck, const std::string& mode);

// CRC-32 (IEEE 802.3, reflected 0xEDB88320). Exposed for tests.
uint32_t crc32(const void* data, size_t n);

} // namespace fvn
