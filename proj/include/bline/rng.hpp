#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace bline {

// Reproducible random layer. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; every distribution here is hand-rolled
// on top of raw 64-bit draws so that streams are identical across platforms
// and standard-library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0,1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0,n), rejection sampled.
    std::uint64_t below(std::uint64_t n);

    // Standard Box-Muller; always consumes exactly two uniforms per call so
    // stream positions do not depend on the parameters.
    double normal(double mean, double sd);

    // Inverse-CDF exponential with the given mean.
    double exponential(double mean);

    // Knuth's product-of-uniforms method, split for large means so the
    // running product never underflows.
    std::uint64_t poisson(double mean);

private:
    std::mt19937_64 engine_;
};

// SplitMix64 finalizer, used to decorrelate derived seeds.
std::uint64_t splitmix64(std::uint64_t x);

// FNV-1a over the bytes of an identifier.
std::uint64_t hash_id(std::string_view id);

// Deterministic child seed for a named stream, e.g. one per annotator or
// one per bootstrap replicate. Adding streams never perturbs existing ones.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index = 0);

inline Rng derive_rng(std::uint64_t master, std::string_view label, std::uint64_t index = 0) {
    return Rng(derive_seed(master, label, index));
}

}  // namespace bline
