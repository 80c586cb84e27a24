#pragma once

#include <cstdint>
#include <cmath>
#include <vector>

namespace mitig {

// Counter-based random streams. Every random field of a sample is drawn from
// a stream keyed by (seed, index, tag, entity), so the value does not depend
// on the order in which fields are first queried.

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t mix_key(uint64_t a, uint64_t b) {
    return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 1)));
}

inline uint64_t mix_key(uint64_t a, uint64_t b, uint64_t c) {
    return mix_key(mix_key(a, b), c);
}

inline uint64_t mix_key(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
    return mix_key(mix_key(a, b, c), d);
}

// Sequential generator over a keyed stream.
class Rng {
public:
    explicit Rng(uint64_t key) : state_(splitmix64(key)) {}
    Rng(uint64_t seed, uint64_t index, uint64_t tag, uint64_t entity)
        : state_(mix_key(seed, index, tag, entity)) {}

    uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Uniform in [0,1).
    double u01() { return (next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return u01() < p; }

    // Uniform integer in [0, n).
    uint64_t below(uint64_t n) {
        // Rejection-free multiply-shift; bias is < 2^-64 per draw.
        return (uint64_t)(((__uint128_t)next() * n) >> 64);
    }

    // Geometric on {1,2,...} with success probability m: Pr[h=t]=(1-m)^(t-1) m.
    int64_t geometric(double m) {
        if (m >= 1.0) return 1;
        double u = u01();
        // Inversion; u==0 maps to a huge but finite value.
        double v = std::log1p(-u) / std::log1p(-m);
        int64_t h = 1 + (int64_t)v;
        return h < 1 ? 1 : h;
    }

    // Fisher-Yates permutation of {0,...,k-1}.
    std::vector<uint32_t> permutation(uint32_t k) {
        std::vector<uint32_t> p(k);
        for (uint32_t i = 0; i < k; i++) p[i] = i;
        for (uint32_t i = k; i > 1; i--) {
            uint32_t j = (uint32_t)below(i);
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

private:
    uint64_t state_;
};

} // namespace mitig
