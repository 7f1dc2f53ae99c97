#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "lfld/errors.hpp"

namespace lfld {

// Portable, splittable counter-style PRNG used everywhere randomness matters
// (weight init, wiring, sampling, splits). We deliberately avoid std::mt19937 +
// std::*_distribution because the distributions are implementation-defined and
// would break run-to-run reproducibility across standard libraries.
//
// Core generator: SplitMix64 (Steele, Lea, Flood; public domain reference
// implementation). State advances by the 64-bit Weyl constant 0x9E3779B97F4A7C15
// and each output is a finalizing hash of the state:
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
//
// Derived generators: derive(stream) seeds a fresh SplitMix64 with a hash of
// (state-of-a-throwaway-step, stream), giving independent, order-insensitive
// substreams from one root seed.
//
// Frozen test vectors live in tests/test_rng.cpp; changing any formula here is
// a file-format-level break (checkpoints and datasets record the seeds that
// produced them).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). n == 0 is a contract violation.
    /// Uses the fixed-point multiply-high reduction, which is unbiased enough
    /// for our purposes (bias < 2^-64 per draw) and branch-free.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw ContractError("SplitMix64::below: n must be positive");
        const unsigned __int128 wide =
            static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n);
        return static_cast<std::uint64_t>(wide >> 64);
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Standard normal via one-branch Box-Muller (always consumes two draws,
    /// always takes the cosine branch, so the stream layout is fixed).
    double normal() {
        const double u1 = next_double();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));  // log(1-u1), u1 < 1 always
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Independent child stream. Distinct `stream` tags give (for practical
    /// purposes) uncorrelated generators; the parent is not advanced.
    SplitMix64 derive(std::uint64_t stream) const {
        SplitMix64 mixer(state_ ^ 0xA0761D6478BD642FULL);
        const std::uint64_t a = mixer.next_u64();
        SplitMix64 tag(stream);
        const std::uint64_t b = tag.next_u64();
        return SplitMix64(a ^ (b + 0x9E3779B97F4A7C15ULL));
    }

    /// In-place Fisher-Yates shuffle, descending index order.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// k distinct values from [0, n) (partial Fisher-Yates over an index pool).
    std::vector<std::size_t> choose_distinct(std::size_t n, std::size_t k) {
        if (k > n) throw ContractError("SplitMix64::choose_distinct: k > n");
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(below(n - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        return pool;
    }

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

}  // namespace lfld
