#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "strings.hpp"

namespace fvn {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": not a boolean: '" + v + "'");
}

} // namespace

TrainConfig parse_config_text(const std::string& text) {
    TrainConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::set<std::string> seen;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value', got '" + line +
                              "'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (!seen.insert(key).second) {
            throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        if (key == "mode") cfg.mode = val;
        else if (key == "train_csv") cfg.train_csv = val;
        else if (key == "embeddings_path") cfg.embeddings_path = val;
        else if (key == "embed_dim") cfg.embed_dim = static_cast<int>(parse_int(val, key));
        else if (key == "content_codes") cfg.content_codes = static_cast<int>(parse_int(val, key));
        else if (key == "beta") cfg.beta = parse_double(val, key);
        else if (key == "learning_rate") cfg.learning_rate = parse_double(val, key);
        else if (key == "batch_size") cfg.batch_size = static_cast<int>(parse_int(val, key));
        else if (key == "epochs") cfg.epochs = static_cast<int>(parse_int(val, key));
        else if (key == "max_decode_len") cfg.max_decode_len = static_cast<int>(parse_int(val, key));
        else if (key == "val_fraction") cfg.val_fraction = parse_double(val, key);
        else if (key == "seed") cfg.seed = static_cast<uint64_t>(parse_int(val, key));
        else if (key == "block_control_grad") cfg.block_control_grad = parse_bool(val, key);
        else if (key == "clip_norm") cfg.clip_norm = parse_double(val, key);
        else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    return cfg;
}

TrainConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return parse_config_text(content);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void validate_config(const TrainConfig& cfg) {
    if (cfg.mode != "personage" && cfg.mode != "e2e") {
        throw ConfigError("mode must be 'personage' or 'e2e', got '" + cfg.mode + "'");
    }
    if (cfg.embed_dim <= 0) throw ConfigError("embed_dim must be positive");
    if (cfg.embed_dim % 2 != 0) {
        throw ConfigError("embed_dim must be even (bidirectional halves split it), got " +
                          std::to_string(cfg.embed_dim));
    }
    if (cfg.content_codes <= 0) throw ConfigError("content_codes must be positive");
    if (cfg.beta < 0) throw ConfigError("beta must be non-negative");
    if (cfg.learning_rate <= 0) throw ConfigError("learning_rate must be positive");
    if (cfg.batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (cfg.epochs < 0) throw ConfigError("epochs must be non-negative");
    if (cfg.max_decode_len < 1) throw ConfigError("max_decode_len must be at least 1");
    if (cfg.val_fraction < 0 || cfg.val_fraction >= 1) throw ConfigError("val_fraction must be in [0, 1)");
    if (cfg.clip_norm < 0) throw ConfigError("clip_norm must be non-negative (0 disables)");
}

std::string config_to_string(const TrainConfig& cfg) {
    std::string out;
    auto kv = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
    kv("batch_size", std::to_string(cfg.batch_size));
    kv("beta", format_double(cfg.beta));
    kv("block_control_grad", cfg.block_control_grad ? "true" : "false");
    kv("clip_norm", format_double(cfg.clip_norm));
    kv("content_codes", std::to_string(cfg.content_codes));
    kv("embed_dim", std::to_string(cfg.embed_dim));
    if (!cfg.embeddings_path.empty()) kv("embeddings_path", cfg.embeddings_path);
    kv("epochs", std::to_string(cfg.epochs));
    kv("learning_rate", format_double(cfg.learning_rate));
    kv("max_decode_len", std::to_string(cfg.max_decode_len));
    kv("mode", cfg.mode);
    kv("seed", std::to_string(cfg.seed));
    if (!cfg.train_csv.empty()) kv("train_csv", cfg.train_csv);
    kv("val_fraction", format_double(cfg.val_fraction));
    return out;
}

} // namespace fvn
