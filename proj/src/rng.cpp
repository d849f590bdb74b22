#include "bline/rng.hpp"

#include <cmath>
#include <numbers>

namespace bline {

std::uint64_t Rng::below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return v % n;
}

double Rng::normal(double mean, double sd) {
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double z = r * std::cos(2.0 * std::numbers::pi * u2);
    return mean + sd * z;
}

double Rng::exponential(double mean) {
    double u = uniform();
    if (u <= 0.0) u = 0x1.0p-53;
    return -mean * std::log(u);
}

std::uint64_t Rng::poisson(double mean) {
    std::uint64_t count = 0;
    // exp(-600) ~ 1e-261 stays clear of double underflow; larger means are
    // split into independent chunks.
    while (mean > 600.0) {
        count += poisson(600.0);
        mean -= 600.0;
    }
    if (mean <= 0.0) return count;
    const double threshold = std::exp(-mean);
    double product = 1.0;
    std::uint64_t k = 0;
    do {
        ++k;
        product *= uniform();
    } while (product > threshold);
    return count + (k - 1);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_id(std::string_view id) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const char c : id) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index) {
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ hash_id(label));
    s = splitmix64(s ^ index);
    return s;
}

}  // namespace bline
