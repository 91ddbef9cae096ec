#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bpl {

// Reproducibility contract: every stochastic pipeline stage draws from its own
// substream, derived from (master seed, stage id) with splitmix64. Stages can
// then be generated in any order, or concurrently, without changing results.
// The engine is std::mt19937_64 (algorithm fixed by the standard); samplers
// below are hand-rolled because std::*_distribution is not bit-portable
// across standard library implementations.

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// stage ids; values are part of the reproducibility contract, append only
enum class rng_stage : uint64_t {
    pair_emission = 1,
    trigger_singles = 2,
    probe_singles = 3,
    pp_bunch = 4,
    tpp_cluster = 5,
    detector_trigger = 6,
    detector_probe = 7,
    detector_probe_1 = 8,
    detector_probe_2 = 9,
    hbt = 10,
    conversion_thin = 11,
    conversion_noise = 12,
    sweep_point = 13,
    // generic op-internal substreams (ops derive these from their seed arg)
    op_thin = 20,
    op_noise = 21,
    op_split = 22,
};

inline uint64_t derive_seed(uint64_t master, rng_stage stage) {
    uint64_t s = master;
    uint64_t a = splitmix64(s);
    s = master ^ (0x9e3779b97f4a7c15ULL * (static_cast<uint64_t>(stage) + 1));
    uint64_t b = splitmix64(s);
    return a ^ b;
}

// extra mixing level for per-point seeds (sweeps, grids)
inline uint64_t derive_seed(uint64_t master, rng_stage stage, uint64_t index) {
    uint64_t s = derive_seed(master, stage) ^ (index + 0x632be59bd9b4e019ULL);
    return splitmix64(s);
}

class rng {
public:
    explicit rng(uint64_t seed) : eng_(seed) {}
    rng(uint64_t master, rng_stage stage) : eng_(derive_seed(master, stage)) {}

    uint64_t next_u64() { return eng_(); }

    // uniform on [0, 1) with 53 random bits
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // uniform on (0, 1], safe as a log argument
    double uniform01_pos() { return 1.0 - uniform01(); }

    double exponential(double mean) { return -mean * std::log(uniform01_pos()); }

    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 eng_;
};

}  // namespace bpl
