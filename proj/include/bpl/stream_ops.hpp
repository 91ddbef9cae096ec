#pragma once

#include <cstdint>
#include <vector>

#include "bpl/rng.hpp"

namespace bpl {

// Shared primitives on raw tick vectors. All deterministic given the rng
// state; all outputs sorted when inputs are.

// Homogeneous Poisson arrivals on [0, duration), by exponential gaps.
std::vector<uint64_t> poisson_ticks(double rate_hz, double duration_s,
                                    double resolution_s, rng& r);

// Keep each tick independently with probability p.
std::vector<uint64_t> bernoulli_thin(const std::vector<uint64_t>& ticks,
                                     double p, rng& r);

// Two-way merge of sorted vectors.
std::vector<uint64_t> merge_sorted(const std::vector<uint64_t>& a,
                                   const std::vector<uint64_t>& b);

}  // namespace bpl
