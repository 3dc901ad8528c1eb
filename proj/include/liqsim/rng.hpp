#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace liqsim {

// splitmix64 finalizer, used to turn related seeds into unrelated ones
constexpr uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// FNV-1a over the label text
constexpr uint64_t hash_label(std::string_view label) {
    uint64_t h = 1469598103934665603ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

// Stable seed derivation: every consumer of randomness gets its own stream
// keyed by (parent seed, label, index).  The chain is pure arithmetic, so a
// run is reproducible from the master seed alone, and adding or removing one
// consumer never perturbs the draws seen by another.
constexpr uint64_t derive_seed(uint64_t parent, std::string_view label, uint64_t index = 0) {
    return mix64(mix64(parent ^ hash_label(label)) + index);
}

// Random source with explicit distribution code.  The engine (mt19937_64) is
// fully specified by the standard; the distribution algorithms live here so
// that draws do not change across standard library versions.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    // uniform on [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // uniform integer on [lo, hi], inclusive, rejection sampled so every
    // value is equally likely
    int64_t uniform_int(int64_t lo, int64_t hi) {
        assert(lo <= hi);
        const uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
        if (range == 0) return static_cast<int64_t>(eng_());  // full 64-bit span
        const uint64_t limit = UINT64_MAX - UINT64_MAX % range;
        uint64_t x = eng_();
        while (x >= limit) x = eng_();
        return lo + static_cast<int64_t>(x % range);
    }

    // Box-Muller; generates pairs and hands out the spare on the next call
    double normal(double mean, double stddev) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + stddev * spare_;
        }
        const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return mean + stddev * r * std::cos(a);
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace liqsim
