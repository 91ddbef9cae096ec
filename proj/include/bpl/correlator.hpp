#pragma once

#include <cstdint>
#include <vector>

#include "bpl/tagstream.hpp"

namespace bpl {

// Histogram layout for coincidence counting. Bin i covers
// [tau_min + i*w, tau_min + (i+1)*w), half open, and every edge must land on
// an integer number of ticks so binning is exact integer arithmetic.
struct BinningSpec {
    double tau_min_s = 0.0;
    double tau_max_s = 0.0;
    double bin_width_s = 0.0;
};

struct CorrelogramResult {
    BinningSpec binning;
    double resolution_s = 0.0;
    double duration_s = 0.0;
    uint64_t singles_a = 0;
    uint64_t singles_b = 0;
    std::vector<double> tau_s;  // bin centers
    std::vector<uint64_t> counts;
    std::vector<double> g2;     // counts[i]*duration / (singles_a*singles_b*w)
    std::vector<double> g2_err; // g2[i]/sqrt(counts[i]), 0 for empty bins
};

struct HeraldedResult {
    double tau_s = 0.0;
    double window_s = 0.0;
    uint64_t n_trigger = 0;
    uint64_t n_tp1 = 0;
    uint64_t n_tp2 = 0;
    uint64_t n_triple = 0;
    double g_conditional = 0.0;
    double g_err = 0.0;
    bool undefined = false;  // a denominator was zero; g fields are meaningless
};

struct PeakStats {
    double peak_g2 = 0.0;
    double peak_tau_s = 0.0;
    double fwhm_s = 0.0;
    double baseline_mean = 0.0;
    double baseline_sigma = 0.0;
};

// Histogram of arrival-time differences t_b - t_a, normalized so that
// uncorrelated streams read 1. Counting slides one pointer per stream, and
// with n_threads > 1 the a-stream is cut into contiguous chunks whose
// partial histograms are added bin-wise, which is bit-identical to the
// serial result.
CorrelogramResult cross_correlogram(const TagStream& a, const TagStream& b,
                                    const BinningSpec& binning,
                                    unsigned n_threads = 1);

// Three-fold conditional autocorrelation. A trigger at t scores a hit on a
// probe channel when that channel has at least one tag inside
// [t+tau-window/2, t+tau+window/2] (tick-inclusive ends); multiple tags in
// one window still count once. g = n_triple*n_trigger/(n_tp1*n_tp2).
HeraldedResult heralded_autocorr(const TagStream& trigger, const TagStream& p1,
                                 const TagStream& p2, double tau_s,
                                 double window_s);

// Peak height, position and interpolated FWHM of a correlogram. Refuses to
// report when the maximum does not clear the off-peak baseline by five
// baseline standard deviations (noise maxima are not peaks).
PeakStats peak_stats(const CorrelogramResult& result);

// All tags of all inputs in one sorted stream.
TagStream merge_streams(const std::vector<TagStream>& streams);

}  // namespace bpl
