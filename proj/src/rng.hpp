#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace fvn {

// All randomness in the library flows through these helpers on top of
// mt19937_64. std::uniform_real_distribution and friends are implementation
// defined, which would break the bit-exact reproducibility contract across
// standard libraries; these are pinned.

inline double canonical_double(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53; // [0,1), 53 bits
}

inline double uniform_double(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * canonical_double(g);
}

// Unbiased integer in [0,n) via rejection.
inline uint64_t uniform_u64(std::mt19937_64& g, uint64_t n) {
    uint64_t rem = (UINT64_MAX % n + 1) % n; // 2^64 mod n
    if (rem == 0) return g() % n;
    uint64_t limit = UINT64_MAX - rem + 1; // largest multiple of n representable
    for (;;) {
        uint64_t r = g();
        if (r < limit) return r % n;
    }
}

template <typename T>
void seeded_shuffle(std::vector<T>& v, std::mt19937_64& g) {
    for (size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[static_cast<size_t>(uniform_u64(g, i))]);
    }
}

// CDF inversion over a probability vector; assumes probs sum to ~1.
inline size_t sample_index(std::mt19937_64& g, const std::vector<double>& probs) {
    double u = canonical_double(g);
    double acc = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return probs.size() - 1; // rounding slack
}

} // namespace fvn
