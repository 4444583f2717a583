#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace moco {

// SplitMix64 finalizer. Used to derive independent stream seeds from one
// master seed plus counters, so adding parallelism never reorders sampling.
inline uint64_t mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline uint64_t stream_tag(std::string_view name) {
    uint64_t h = 0xCBF29CE484222325ull;  // FNV-1a
    for (char c : name) {
        h ^= static_cast<uint8_t>(c);
        h *= 0x100000001B3ull;
    }
    return h;
}

inline uint64_t derive_seed(uint64_t master, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t s = mix64(master ^ 0xA0761D6478BD642Full);
    s = mix64(s ^ a);
    s = mix64(s ^ b);
    return mix64(s ^ c);
}

// Deterministic RNG: mt19937_64 (sequence fixed by the standard) with
// portable bit-level conversions, so equal seeds give equal draws anywhere.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // Uniform in [0,1), 53-bit resolution.
    double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    // Uniform integer in [lo, hi] inclusive, rejection sampling (no modulo bias).
    int64_t uniform_int(int64_t lo, int64_t hi) {
        uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
        if (range == 0) return static_cast<int64_t>(eng_());  // full 64-bit range
        uint64_t bound = UINT64_MAX - UINT64_MAX % range;
        uint64_t x;
        do {
            x = eng_();
        } while (x >= bound);
        return lo + static_cast<int64_t>(x % range);
    }

    // Index sampled proportionally to non-negative weights p[0..n).
    size_t categorical(const double* p, size_t n) {
        double total = 0.0;
        for (size_t i = 0; i < n; ++i) total += p[i];
        double target = u01() * total;
        double cum = 0.0;
        size_t last = 0;
        for (size_t i = 0; i < n; ++i) {
            if (p[i] <= 0.0) continue;
            cum += p[i];
            last = i;
            if (cum > target) return i;
        }
        return last;
    }

    // Uniform on the probability simplex: Dirichlet(1,...,1) via normalized
    // exponentials.
    void simplex(double* w, size_t k) {
        double sum = 0.0;
        do {
            sum = 0.0;
            for (size_t i = 0; i < k; ++i) {
                w[i] = -std::log(1.0 - u01());
                sum += w[i];
            }
        } while (sum <= 0.0);
        for (size_t i = 0; i < k; ++i) w[i] /= sum;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace moco
