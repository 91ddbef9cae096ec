#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "bpl/model.hpp"
#include "bpl/rng.hpp"
#include "bpl/tagstream.hpp"

namespace bpl {

struct DetectorSpec {
    double efficiency = 1.0;   // in [0, 1]
    double dark_rate_hz = 0.0;
    std::string label;
};

void validate(const DetectorSpec& det);

// Two ways to realize the same rates and waveform as an event stream:
//
//  poisson  independent pair emissions: a Poisson process of pairs plus
//           independent unpaired singles. Reproduces the cross-correlation
//           exactly; heralded (three-fold) statistics come out as those of
//           classical independent pairs.
//
//  thermal  a point process with the second AND third factorial cumulants
//           of a zero-mean Gaussian (thermal) photon field:
//             c_tp(tau)  = pair_rate * p(tau)
//             c_pp(d)    = probe_rate^2 * A(d)^2,  A = autocorrelation of sqrt(p)
//             c_tpp(x,y) = 2 * pair_rate * probe_rate * psi(x) psi(y) A(x-y)
//           built from superposed Poisson cluster layers (singles, pairs
//           with a compensated kernel, probe-probe bunch pairs, and
//           trigger+probe+probe triples). This is what makes heralded
//           autocorrelation measurements come out thermal-like. Requires
//           pair_rate <= probe_rate / 2; use detected-level (folded) rates
//           when the raw source is more strongly paired than that.
enum class SourceStatistics { poisson, thermal };

struct SourcePair {
    TagStream trigger;  // channel 0
    TagStream probe;    // channel 1
};

// Event-level realization of the source over [0, duration): for each pair,
// probe tag at t and trigger tag at t + tau with tau ~ waveform_pdf;
// unpaired singles fill the channel rates up to trigger_rate / probe_rate.
// Sorted outputs; bit-identical for identical (model, duration, seed).
SourcePair simulate_source(const BiphotonModel& model, double duration_s,
                           uint64_t seed,
                           SourceStatistics stats = SourceStatistics::poisson);

// Bernoulli thinning at det.efficiency plus merged Poisson dark counts.
TagStream apply_detector(const TagStream& stream, const DetectorSpec& det,
                         double duration_s, uint64_t seed);

// 50/50 beam-splitter routing; the two outputs partition the input.
// Output channel ids are input id and input id + 1.
std::pair<TagStream, TagStream> hbt_split(const TagStream& stream, uint64_t seed);

struct DelayResult {
    TagStream stream;
    uint64_t dropped_early = 0;  // shifted below t = 0 (negative delays)
    uint64_t dropped_late = 0;   // shifted past the stream duration
};

// Shifts every tag by round(delay / resolution) ticks, preserving order.
// Tags leaving [0, duration] are dropped and counted in the result.
DelayResult delay_stream(const TagStream& stream, double delay_s);

// Draws one trigger-probe delay from the model waveform.
double sample_waveform_delay(const BiphotonModel& model, rng& r);

}  // namespace bpl
