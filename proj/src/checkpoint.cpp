#include "checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

namespace fvn {

namespace {

constexpr char kMagic[8] = {'F', 'V', 'N', 'C', 'K', 'P', 'T', '\0'};
constexpr uint32_t kVersion = 1;

const std::set<std::string>& known_sections() {
    static const std::set<std::string> k = {"config", "vocab", "labels", "params", "adam", "train", "tables"};
    return k;
}

class ByteWriter {
public:
    void u32(uint32_t x) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
    }
    void u64(uint64_t x) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
    }
    void i64(int64_t x) { u64(static_cast<uint64_t>(x)); }
    void f64(double d) { u64(std::bit_cast<uint64_t>(d)); }
    void str(const std::string& s) {
        u64(s.size());
        buf_.append(s);
    }
    void f64v(const std::vector<double>& v) {
        u64(v.size());
        for (double d : v) f64(d);
    }
    void raw(const std::string& s) { buf_.append(s); }
    std::string take() { return std::move(buf_); }

private:
    std::string buf_;
};

class ByteReader {
public:
    ByteReader(const std::string& bytes, std::string what) : p_(bytes.data()), n_(bytes.size()), what_(std::move(what)) {}
    ByteReader(const char* p, size_t n, std::string what) : p_(p), n_(n), what_(std::move(what)) {}

    uint32_t u32() {
        need(4);
        uint32_t x = 0;
        for (int i = 0; i < 4; ++i) x |= static_cast<uint32_t>(static_cast<uint8_t>(p_[off_ + i])) << (8 * i);
        off_ += 4;
        return x;
    }
    uint64_t u64() {
        need(8);
        uint64_t x = 0;
        for (int i = 0; i < 8; ++i) x |= static_cast<uint64_t>(static_cast<uint8_t>(p_[off_ + i])) << (8 * i);
        off_ += 8;
        return x;
    }
    int64_t i64() { return static_cast<int64_t>(u64()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string bytes(uint64_t len) {
        need(len);
        std::string s(p_ + off_, static_cast<size_t>(len));
        off_ += static_cast<size_t>(len);
        return s;
    }
    std::string str() { return bytes(u64()); }
    std::vector<double> f64v() {
        uint64_t count = u64();
        if (count > (n_ - off_) / 8) throw IntegrityError(what_ + ": truncated");
        std::vector<double> v(static_cast<size_t>(count));
        for (auto& d : v) d = f64();
        return v;
    }
    void expect_done() const {
        if (off_ != n_) throw IntegrityError(what_ + ": trailing bytes");
    }

private:
    void need(uint64_t k) const {
        if (k > n_ - off_) throw IntegrityError(what_ + ": truncated");
    }

    const char* p_;
    size_t n_;
    size_t off_ = 0;
    std::string what_;
};

std::string vocab_payload(const Vocabulary& vocab) {
    ByteWriter w;
    const auto& toks = vocab.tokens();
    w.u64(toks.size());
    for (const auto& t : toks) w.str(t);
    return w.take();
}

std::string labels_payload(const LabelInventories& labels) {
    ByteWriter w;
    w.u64(labels.content_labels.size());
    for (const auto& s : labels.content_labels) w.str(s);
    w.u64(labels.style_labels.size());
    for (const auto& s : labels.style_labels) w.str(s);
    return w.take();
}

std::string params_payload(const FvnParams& model) {
    ByteWriter w;
    ParamList ps = model.params();
    w.u64(ps.size());
    for (const auto& [name, t] : ps) {
        w.str(name);
        w.u64(t.shape().size());
        for (int64_t d : t.shape()) w.i64(d);
        w.f64v(t.data());
    }
    return w.take();
}

std::string adam_payload(const AdamState& adam, size_t n_params) {
    if (adam.m.size() != n_params || adam.v.size() != n_params) {
        throw ArgumentError("optimizer state is not aligned with the model parameters");
    }
    ByteWriter w;
    w.i64(adam.t);
    w.u64(adam.m.size());
    for (size_t i = 0; i < adam.m.size(); ++i) {
        w.f64v(adam.m[i]);
        w.f64v(adam.v[i]);
    }
    return w.take();
}

std::string train_payload(const TrainState& train) {
    ByteWriter w;
    w.i64(train.epochs_done);
    w.f64(train.best_val_dec);
    w.str(train.rng_state);
    return w.take();
}

std::string tables_payload(const CodeTables& t) {
    ByteWriter w;
    w.u64(t.content.size());
    for (const auto& [key, entry] : t.content) {
        w.str(key);
        w.str(entry.representative_mr);
        w.f64v(entry.probs);
    }
    w.u64(t.style.size());
    for (const auto& [key, probs] : t.style) {
        w.str(key);
        w.f64v(probs);
    }
    w.f64v(t.content_marginal);
    w.f64v(t.style_marginal);
    return w.take();
}

Vocabulary parse_vocab(const std::string& payload) {
    ByteReader r(payload, "checkpoint section 'vocab'");
    uint64_t n = r.u64();
    Vocabulary vocab;
    if (n < static_cast<uint64_t>(vocab.size())) throw IntegrityError("vocabulary smaller than the reserved tokens");
    for (uint64_t i = 0; i < n; ++i) {
        std::string tok = r.str();
        if (i < static_cast<uint64_t>(Vocabulary::kUnk) + 1) {
            if (tok != vocab.token(static_cast<int>(i))) {
                throw IntegrityError("vocabulary reserved token mismatch at id " + std::to_string(i));
            }
        } else if (vocab.add(tok) != static_cast<int>(i)) {
            throw IntegrityError("duplicate vocabulary token '" + tok + "'");
        }
    }
    r.expect_done();
    return vocab;
}

LabelInventories parse_labels(const std::string& payload) {
    ByteReader r(payload, "checkpoint section 'labels'");
    LabelInventories labels;
    uint64_t nc = r.u64();
    labels.content_labels.reserve(static_cast<size_t>(nc));
    for (uint64_t i = 0; i < nc; ++i) labels.content_labels.push_back(r.str());
    uint64_t ns = r.u64();
    labels.style_labels.reserve(static_cast<size_t>(ns));
    for (uint64_t i = 0; i < ns; ++i) labels.style_labels.push_back(r.str());
    r.expect_done();
    return labels;
}

void parse_params_into(const std::string& payload, FvnParams& model) {
    ByteReader r(payload, "checkpoint section 'params'");
    ParamList ps = model.params();
    uint64_t n = r.u64();
    if (n != ps.size()) {
        throw IntegrityError("checkpoint stores " + std::to_string(n) + " parameters, the model has " +
                             std::to_string(ps.size()));
    }
    for (auto& [name, t] : ps) {
        std::string stored = r.str();
        if (stored != name) {
            throw IntegrityError("checkpoint parameter '" + stored + "' where '" + name + "' was expected");
        }
        uint64_t rank = r.u64();
        Shape shape(static_cast<size_t>(rank));
        for (auto& d : shape) d = r.i64();
        if (shape != t.shape()) {
            throw IntegrityError("checkpoint parameter '" + name + "' has shape " + shape_str(shape) +
                                 ", the model expects " + shape_str(t.shape()));
        }
        std::vector<double> data = r.f64v();
        if (data.size() != static_cast<size_t>(t.size())) {
            throw IntegrityError("checkpoint parameter '" + name + "' has the wrong element count");
        }
        t.mutable_data() = std::move(data);
    }
    r.expect_done();
}

AdamState parse_adam(const std::string& payload, const FvnParams& model) {
    ByteReader r(payload, "checkpoint section 'adam'");
    ParamList ps = model.params();
    AdamState adam;
    adam.t = r.i64();
    uint64_t n = r.u64();
    if (n != ps.size()) throw IntegrityError("optimizer state is not aligned with the model parameters");
    adam.m.resize(ps.size());
    adam.v.resize(ps.size());
    for (size_t i = 0; i < ps.size(); ++i) {
        adam.m[i] = r.f64v();
        adam.v[i] = r.f64v();
        auto want = static_cast<size_t>(ps[i].second.size());
        if (adam.m[i].size() != want || adam.v[i].size() != want) {
            throw IntegrityError("optimizer moments for '" + ps[i].first + "' have the wrong element count");
        }
    }
    r.expect_done();
    return adam;
}

TrainState parse_train(const std::string& payload) {
    ByteReader r(payload, "checkpoint section 'train'");
    TrainState ts;
    ts.epochs_done = r.i64();
    ts.best_val_dec = r.f64();
    ts.rng_state = r.str();
    r.expect_done();
    return ts;
}

CodeTables parse_tables(const std::string& payload, const FvnDims& dims) {
    ByteReader r(payload, "checkpoint section 'tables'");
    CodeTables t;
    uint64_t nc = r.u64();
    for (uint64_t i = 0; i < nc; ++i) {
        std::string key = r.str();
        ContentEntry entry;
        entry.representative_mr = r.str();
        entry.probs = r.f64v();
        if (entry.probs.size() != static_cast<size_t>(dims.content_codes)) {
            throw IntegrityError("content table entry '" + key + "' has the wrong width");
        }
        if (!t.content.emplace(key, std::move(entry)).second) {
            throw IntegrityError("duplicate content table key '" + key + "'");
        }
    }
    uint64_t ns = r.u64();
    for (uint64_t i = 0; i < ns; ++i) {
        std::string key = r.str();
        std::vector<double> probs = r.f64v();
        if (probs.size() != static_cast<size_t>(dims.vocab)) {
            throw IntegrityError("style table entry '" + key + "' has the wrong width");
        }
        if (!t.style.emplace(key, std::move(probs)).second) {
            throw IntegrityError("duplicate style table key '" + key + "'");
        }
    }
    t.content_marginal = r.f64v();
    t.style_marginal = r.f64v();
    if (t.content_marginal.size() != static_cast<size_t>(dims.content_codes) ||
        t.style_marginal.size() != static_cast<size_t>(dims.vocab)) {
        throw IntegrityError("code table marginals have the wrong width");
    }
    r.expect_done();
    return t;
}

} // namespace

uint32_t crc32(const void* data, size_t n) {
    static const std::array<uint32_t, 256> table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    uint32_t crc = 0xFFFFFFFFu;
    const auto* p = static_cast<const uint8_t*>(data);
    for (size_t i = 0; i < n; ++i) crc = table[(crc ^ p[i]) & 0xffu] ^ (crc >> 8);
    return ~crc;
}

FvnDims dims_from(const TrainConfig& cfg, int64_t vocab_size, const LabelInventories& labels) {
    FvnDims d;
    d.vocab = vocab_size;
    d.embed_dim = cfg.embed_dim;
    d.content_codes = cfg.content_codes;
    d.content_labels = static_cast<int64_t>(labels.content_labels.size());
    d.style_labels = static_cast<int64_t>(labels.style_labels.size());
    d.e2e = cfg.mode == "e2e";
    d.beta = cfg.beta;
    d.block_control_grad = cfg.block_control_grad;
    d.max_decode_len = cfg.max_decode_len;
    return d;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    std::vector<std::pair<std::string, std::string>> sections;
    sections.emplace_back("config", config_to_string(ck.config));
    sections.emplace_back("vocab", vocab_payload(ck.vocab));
    sections.emplace_back("labels", labels_payload(ck.labels));
    sections.emplace_back("params", params_payload(ck.model));
    sections.emplace_back("adam", adam_payload(ck.adam, ck.model.params().size()));
    sections.emplace_back("train", train_payload(ck.train));
    if (ck.tables) sections.emplace_back("tables", tables_payload(*ck.tables));

    ByteWriter w;
    w.raw(std::string(kMagic, sizeof(kMagic)));
    w.u32(kVersion);
    w.u32(static_cast<uint32_t>(sections.size()));
    for (const auto& [name, payload] : sections) {
        w.str(name);
        w.u64(payload.size());
        w.raw(payload);
        w.u32(crc32(payload.data(), payload.size()));
    }
    std::string bytes = w.take();

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write checkpoint: " + tmp);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw IoError("short write while saving checkpoint: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move checkpoint into place: " + path + " (" + ec.message() + ")");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("cannot read checkpoint: " + path);

    if (bytes.size() < sizeof(kMagic)) throw IntegrityError("checkpoint: truncated");
    if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        throw FormatError("not a checkpoint file (bad magic): " + path);
    }
    ByteReader r(bytes.data() + sizeof(kMagic), bytes.size() - sizeof(kMagic), "checkpoint");
    uint32_t version = r.u32();
    if (version != kVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version) + " (this build reads version " +
                          std::to_string(kVersion) + ")");
    }
    uint32_t count = r.u32();
    std::map<std::string, std::string> sections;
    for (uint32_t i = 0; i < count; ++i) {
        std::string name = r.str();
        std::string payload = r.bytes(r.u64());
        uint32_t stored = r.u32();
        if (crc32(payload.data(), payload.size()) != stored) {
            throw IntegrityError("checkpoint section '" + name + "' failed its checksum");
        }
        if (!known_sections().count(name)) throw FormatError("unknown checkpoint section '" + name + "'");
        if (!sections.emplace(name, std::move(payload)).second) {
            throw IntegrityError("duplicate checkpoint section '" + name + "'");
        }
    }
    r.expect_done();

    auto require = [&](const char* name) -> const std::string& {
        auto it = sections.find(name);
        if (it == sections.end()) throw IntegrityError(std::string("checkpoint missing section '") + name + "'");
        return it->second;
    };

    Checkpoint ck;
    ck.config = parse_config_text(require("config"));
    validate_config(ck.config);
    ck.vocab = parse_vocab(require("vocab"));
    ck.labels = parse_labels(require("labels"));

    FvnDims dims = dims_from(ck.config, ck.vocab.size(), ck.labels);
    std::mt19937_64 scratch(0);
    ck.model = make_fvn(dims, scratch);
    parse_params_into(require("params"), ck.model);
    ck.adam = parse_adam(require("adam"), ck.model);
    ck.train = parse_train(require("train"));
    if (auto it = sections.find("tables"); it != sections.end()) {
        ck.tables = parse_tables(it->second, dims);
    }
    return ck;
}

void require_mode(const Checkpoint& ck, const std::string& mode) {
    if (ck.config.mode != mode) {
        throw ConfigError("checkpoint was trained with mode=" + ck.config.mode + " but this run requested mode=" +
                          mode + "; use a matching checkpoint or change the mode");
    }
}

} // namespace fvn
