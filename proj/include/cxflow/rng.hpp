#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace cxflow {

// Deterministic splitmix64 generator. Every random draw in the project goes
// through one of these so runs replay bit-for-bit across platforms; the
// standard <random> distributions are implementation-defined and are avoided.
class Rng {
public:
    Rng() = default;
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // integer in [0, n)
    uint64_t uniform_int(uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

    bool bernoulli(double p) { return uniform() < p; }

    // exponential with given rate (mean 1/rate)
    double exponential(double rate) { return -std::log(1.0 - uniform()) / rate; }

private:
    uint64_t state_ = 0;
};

// FNV-1a, used to derive independent named substreams from one master seed.
constexpr uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Named substream: toggling one consumer (demand, comms, exploration, ...)
// never perturbs the draws seen by the others.
inline Rng substream(uint64_t seed, std::string_view name) {
    Rng mix(seed ^ fnv1a(name));
    return Rng(mix.next_u64());
}

} // namespace cxflow
