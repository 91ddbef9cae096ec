#pragma once

#include <string>
#include <vector>

#include "bpl/correlator.hpp"
#include "bpl/tagstream.hpp"

namespace bpl {

// Binary time-tag container, one file per acquisition:
//   "TTAG" | version u16 LE | resolution in femtoseconds u64 LE | channels u8
// followed by (channel u8, ticks u64 LE) records. Records are interleaved by
// (ticks, channel), so every per-channel subsequence is nondecreasing and the
// byte stream is a pure function of the tag content. The file carries no
// acquisition duration; callers track that through the run manifest.
inline constexpr uint16_t kTtagVersion = 1;

void write_ttag(const std::string& path, const std::vector<TagStream>& channels);

// Streams come back sorted by channel id, duration inferred from the last
// tick unless the caller overrides it afterwards.
std::vector<TagStream> read_ttag(const std::string& path);

// Plot-ready histogram dump: tau_s, counts, g2, g2_err rows, %.12g formatting
// so equal results are equal bytes.
void write_correlogram_csv(const std::string& path, const CorrelogramResult& r);

std::string format_double(double v);  // the CSV/report number format

}  // namespace bpl
