#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fvn {

// SHA-1 digest as lowercase hex. Hand-rolled (FIPS 180-1); verified against
// the standard test vectors in the unit tests.
std::string sha1_hex(const void* data, size_t n);
std::string sha1_hex(const std::string& s);

// Git-compatible content hash: sha1("blob <size>\0" + content). Matches
// `git hash-object` so input fingerprints can be cross-checked externally.
std::string git_blob_hash(const std::string& content);
std::string git_blob_hash_file(const std::string& path); // IoError when unreadable

// Reproducibility record written next to every command's outputs: what ran,
// with which configuration and seed, over which exact input bytes.
struct RunManifest {
    std::string command;
    std::string config_text; // full key = value snapshot
    uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> inputs; // path -> git blob hash
    std::vector<std::string> outputs;                        // paths written
    std::string started_at;  // ISO-8601 UTC
    std::string finished_at;
};

std::string manifest_to_json(const RunManifest& m);
void write_manifest(const std::string& path, const RunManifest& m);

std::string iso8601_utc_now();
std::string json_escape(const std::string& s);

} // namespace fvn
