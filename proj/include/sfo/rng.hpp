#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sfo {

// splitmix64 step; used to derive decorrelated child seeds from a master seed.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d4a2ca9f13ae5dULL;
    return z ^ (z >> 31);
}

// Mixes a base seed with up to three stream indices. Distinct index tuples
// give statistically independent streams for the same base seed.
inline uint64_t mix_seed(uint64_t base, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t s = base;
    splitmix64(s);
    s ^= 0xa0761d6478bd642fULL + a;
    splitmix64(s);
    s ^= 0xe7037ed1a0b428dbULL + b;
    splitmix64(s);
    s ^= 0x8ebc6af09c88c6e3ULL + c;
    return splitmix64(s);
}

// Deterministic RNG wrapper. All draws go through explicit conversions so a
// fixed seed reproduces identical byte-level output run to run.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next() { return engine_(); }

    // uniform double in [0, 1) with 53-bit resolution
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // uniform integer in [0, n)
    int uniform_int(int n) { return static_cast<int>(engine_() % static_cast<uint64_t>(n)); }

    // standard normal via Box-Muller
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace sfo
