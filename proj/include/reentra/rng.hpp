// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace reentra {

/// Deterministic splitmix64 generator. Used everywhere instead of the
/// standard distributions so that identical seeds give identical streams
/// on every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 bits of entropy.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double next_double(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Uniform integer in [0, n). Rejection-free modulo is fine here: n is
    /// tiny relative to 2^64, so the bias is far below anything observable.
    std::uint64_t next_below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

    bool next_bernoulli(double p) { return next_double() < p; }

    /// Fisher-Yates shuffle with draws from this generator.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

/// FNV-1a over a label, used to give each pipeline stage its own stream.
inline std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Fixed seed-splitting rule: every stage derives its own sub-seed from the
/// single user-facing seed, so stages are independently reproducible.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
    Rng mix(base ^ hash_tag(tag));
    return mix.next_u64();
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t index) {
    Rng mix(base ^ hash_tag(tag) ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
    return mix.next_u64();
}

}  // namespace reentra
