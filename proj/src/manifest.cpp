#include "manifest.hpp"

#include <array>
#include <bit>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace fvn {

namespace {

inline uint32_t rotl32(uint32_t x, int s) { return (x << s) | (x >> (32 - s)); }

struct Sha1 {
    std::array<uint32_t, 5> h = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};
    std::array<uint8_t, 64> block{};
    size_t fill = 0;
    uint64_t total = 0;

    void compress(const uint8_t* p) {
        uint32_t w[80];
        for (int i = 0; i < 16; ++i) {
            w[i] = (uint32_t(p[4 * i]) << 24) | (uint32_t(p[4 * i + 1]) << 16) | (uint32_t(p[4 * i + 2]) << 8) |
                   uint32_t(p[4 * i + 3]);
        }
        for (int i = 16; i < 80; ++i) w[i] = rotl32(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
        uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
        for (int i = 0; i < 80; ++i) {
            uint32_t f, k;
            if (i < 20) {
                f = (b & c) | (~b & d);
                k = 0x5A827999u;
            } else if (i < 40) {
                f = b ^ c ^ d;
                k = 0x6ED9EBA1u;
            } else if (i < 60) {
                f = (b & c) | (b & d) | (c & d);
                k = 0x8F1BBCDCu;
            } else {
                f = b ^ c ^ d;
                k = 0xCA62C1D6u;
            }
            uint32_t t = rotl32(a, 5) + f + e + k + w[i];
            e = d;
            d = c;
            c = rotl32(b, 30);
            b = a;
            a = t;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
    }

    void update(const void* data, size_t n) {
        const uint8_t* p = static_cast<const uint8_t*>(data);
        total += n;
        while (n > 0) {
            size_t take = std::min(n, block.size() - fill);
            std::memcpy(block.data() + fill, p, take);
            fill += take;
            p += take;
            n -= take;
            if (fill == block.size()) {
                compress(block.data());
                fill = 0;
            }
        }
    }

    std::string finish() {
        const uint64_t bits = total * 8;
        const uint8_t one = 0x80;
        update(&one, 1);
        const uint8_t zero = 0;
        while (fill != 56) update(&zero, 1);
        uint8_t len[8];
        for (int i = 0; i < 8; ++i) len[i] = static_cast<uint8_t>(bits >> (56 - 8 * i));
        update(len, 8);
        static const char* hex = "0123456789abcdef";
        std::string out;
        out.reserve(40);
        for (uint32_t v : h) {
            for (int s = 28; s >= 0; s -= 4) out.push_back(hex[(v >> s) & 0xF]);
        }
        return out;
    }
};

} // namespace

std::string sha1_hex(const void* data, size_t n) {
    Sha1 s;
    s.update(data, n);
    return s.finish();
}

std::string sha1_hex(const std::string& s) { return sha1_hex(s.data(), s.size()); }

std::string git_blob_hash(const std::string& content) {
    Sha1 s;
    std::string header = "blob " + std::to_string(content.size());
    s.update(header.data(), header.size() + 1); // the terminating NUL is part of the header
    s.update(content.data(), content.size());
    return s.finish();
}

std::string git_blob_hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open input for hashing: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failed while hashing: " + path);
    return git_blob_hash(buf.str());
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 8);
    for (unsigned char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (ch < 0x20) {
                    static const char* hex = "0123456789abcdef";
                    out += "\\u00";
                    out.push_back(hex[ch >> 4]);
                    out.push_back(hex[ch & 0xF]);
                } else {
                    out.push_back(static_cast<char>(ch));
                }
        }
    }
    return out;
}

std::string manifest_to_json(const RunManifest& m) {
    std::ostringstream os;
    os << "{\n";
    os << "  \"command\": \"" << json_escape(m.command) << "\",\n";
    os << "  \"seed\": " << m.seed << ",\n";
    os << "  \"config\": \"" << json_escape(m.config_text) << "\",\n";
    os << "  \"inputs\": [";
    for (size_t i = 0; i < m.inputs.size(); ++i) {
        if (i) os << ",";
        os << "\n    {\"path\": \"" << json_escape(m.inputs[i].first) << "\", \"sha1\": \""
           << json_escape(m.inputs[i].second) << "\"}";
    }
    os << (m.inputs.empty() ? "],\n" : "\n  ],\n");
    os << "  \"outputs\": [";
    for (size_t i = 0; i < m.outputs.size(); ++i) {
        if (i) os << ",";
        os << "\n    \"" << json_escape(m.outputs[i]) << "\"";
    }
    os << (m.outputs.empty() ? "],\n" : "\n  ],\n");
    os << "  \"started_at\": \"" << json_escape(m.started_at) << "\",\n";
    os << "  \"finished_at\": \"" << json_escape(m.finished_at) << "\"\n";
    os << "}\n";
    return os.str();
}

void write_manifest(const std::string& path, const RunManifest& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write manifest: " + path);
    out << manifest_to_json(m);
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

std::string iso8601_utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace fvn
