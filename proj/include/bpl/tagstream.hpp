#pragma once

#include <cstdint>
#include <vector>

#include "bpl/errors.hpp"

namespace bpl {

struct TimeTag {
    uint8_t channel;
    uint64_t ticks;  // 1 tick = resolution seconds (1 ps throughout this project)
};

// Channel-labeled, nondecreasing detection times. The universal interchange
// object between simulator, converter and correlator.
struct TagStream {
    uint8_t channel_id = 0;
    double resolution_s = 1e-12;
    double duration_s = 0.0;
    std::vector<uint64_t> ticks;

    uint64_t duration_ticks() const {
        return static_cast<uint64_t>(duration_s / resolution_s + 0.5);
    }
    size_t size() const { return ticks.size(); }
};

// Ordering is a property of the data, not of the request, so a violation
// reports as a format problem (exit class 2).
inline void validate_sorted(const TagStream& s, const char* who) {
    for (size_t i = 1; i < s.ticks.size(); ++i)
        if (s.ticks[i] < s.ticks[i - 1])
            throw format_error(std::string(who) + ": input stream is not sorted");
}

inline void validate_bounds(const TagStream& s, const char* who) {
    if (!s.ticks.empty() && s.ticks.back() > s.duration_ticks())
        throw schema_error(std::string(who) + ": tag beyond stream duration");
}

}  // namespace bpl
