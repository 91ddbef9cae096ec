#include "bpl/simkit.hpp"

#include <algorithm>
#include <cmath>

#include "bpl/stream_ops.hpp"

namespace bpl {

std::vector<uint64_t> poisson_ticks(double rate_hz, double duration_s,
                                    double resolution_s, rng& r) {
    std::vector<uint64_t> out;
    if (rate_hz <= 0.0 || duration_s <= 0.0) return out;
    out.reserve(static_cast<size_t>(rate_hz * duration_s * 1.02) + 16);
    const double mean_gap = 1.0 / rate_hz;
    double t = r.exponential(mean_gap);
    while (t < duration_s) {
        out.push_back(static_cast<uint64_t>(std::llround(t / resolution_s)));
        t += r.exponential(mean_gap);
    }
    return out;
}

std::vector<uint64_t> bernoulli_thin(const std::vector<uint64_t>& ticks,
                                     double p, rng& r) {
    std::vector<uint64_t> out;
    out.reserve(static_cast<size_t>(ticks.size() * p * 1.05) + 16);
    for (uint64_t t : ticks)
        if (r.bernoulli(p)) out.push_back(t);
    return out;
}

std::vector<uint64_t> merge_sorted(const std::vector<uint64_t>& a,
                                   const std::vector<uint64_t>& b) {
    std::vector<uint64_t> out;
    out.resize(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), out.begin());
    return out;
}

void validate(const DetectorSpec& det) {
    if (!(det.efficiency >= 0.0 && det.efficiency <= 1.0))
        throw schema_error("detector: efficiency must lie in [0, 1]");
    if (det.dark_rate_hz < 0.0)
        throw schema_error("detector: dark rate must be nonnegative");
}

double sample_waveform_delay(const BiphotonModel& model, rng& r) {
    // rejection from an exponential proposal; the acceptance factor is the
    // ratio of the target shape to the bare decay
    const double lam = model.tau_decay_s;
    switch (model.waveform_kind) {
        case WaveformKind::exponential_decay: {
            if (model.tau_rise_s <= 0.0) return r.exponential(lam);
            for (;;) {
                double t = r.exponential(lam);
                double rise = std::min(t / model.tau_rise_s, 1.0);
                if (r.uniform01() < rise) return t;
            }
        }
        case WaveformKind::damped_oscillation: {
            for (;;) {
                double t = r.exponential(lam);
                double rise = (model.tau_rise_s > 0.0)
                                  ? std::min(t / model.tau_rise_s, 1.0) : 1.0;
                double s = std::sin(3.14159265358979323846 * model.oscillation_freq_hz * t);
                if (r.uniform01() < rise * s * s) return t;
            }
        }
        case WaveformKind::tabulated: {
            // inverse CDF, exact for the piecewise-linear density
            const auto& xs = model.tab_tau_s;
            const auto& ys = model.tab_density;
            double u = r.uniform01();
            double acc = 0.0;
            for (size_t i = 1; i < xs.size(); ++i) {
                double h = xs[i] - xs[i - 1];
                double cell = 0.5 * (ys[i] + ys[i - 1]) * h;
                if (acc + cell >= u || i + 1 == xs.size()) {
                    double rem = std::max(u - acc, 0.0);
                    double y0 = ys[i - 1], slope = (ys[i] - y0) / h;
                    if (std::abs(slope) * h < 1e-12 * std::max(y0, 1e-300)) {
                        return xs[i - 1] + (y0 > 0.0 ? rem / y0 : 0.0);
                    }
                    // solve y0*d + slope*d^2/2 = rem for d in [0, h]
                    double disc = y0 * y0 + 2.0 * slope * rem;
                    double d = (std::sqrt(std::max(disc, 0.0)) - y0) / slope;
                    return xs[i - 1] + std::clamp(d, 0.0, h);
                }
                acc += cell;
            }
            return xs.back();
        }
    }
    return 0.0;
}

namespace {

SourcePair simulate_poisson_source(const BiphotonModel& m, double duration_s,
                                   uint64_t seed) {
    const double res = 1e-12;
    SourcePair out;
    out.trigger.channel_id = 0;
    out.probe.channel_id = 1;
    out.trigger.resolution_s = out.probe.resolution_s = res;
    out.trigger.duration_s = out.probe.duration_s = duration_s;
    const uint64_t dur_ticks = out.trigger.duration_ticks();

    // pairs: probe at t, trigger at t + tau; the trigger list needs a sort
    // because tau varies per pair
    rng pair_rng(seed, rng_stage::pair_emission);
    std::vector<uint64_t> probe =
        poisson_ticks(m.pair_rate_hz, duration_s, res, pair_rng);
    std::vector<uint64_t> trig;
    trig.reserve(probe.size());
    for (uint64_t t : probe) {
        double tau = sample_waveform_delay(m, pair_rng);
        uint64_t shifted = t + static_cast<uint64_t>(std::llround(tau / res));
        if (shifted <= dur_ticks) trig.push_back(shifted);
    }
    std::sort(trig.begin(), trig.end());

    rng ts_rng(seed, rng_stage::trigger_singles);
    std::vector<uint64_t> trig_singles =
        poisson_ticks(m.trigger_rate_hz - m.pair_rate_hz, duration_s, res, ts_rng);
    rng ps_rng(seed, rng_stage::probe_singles);
    std::vector<uint64_t> probe_singles =
        poisson_ticks(m.probe_rate_hz - m.pair_rate_hz, duration_s, res, ps_rng);

    out.trigger.ticks = merge_sorted(trig, trig_singles);
    out.probe.ticks = merge_sorted(probe, probe_singles);
    return out;
}

}  // namespace

namespace detail {
SourcePair simulate_thermal_source(const BiphotonModel& m, double duration_s,
                                   uint64_t seed);  // thermal.cpp
}

SourcePair simulate_source(const BiphotonModel& model, double duration_s,
                           uint64_t seed, SourceStatistics stats) {
    if (!(duration_s > 0.0))
        throw schema_error("simulate_source: duration must be positive");
    if (model.pair_rate_hz > std::min(model.trigger_rate_hz, model.probe_rate_hz))
        throw schema_error("simulate_source: pair_rate exceeds a singles rate");
    if (!(model.norm > 0.0) && model.pair_rate_hz > 0.0)
        throw schema_error("simulate_source: model not initialized (use make_model)");
    if (stats == SourceStatistics::thermal)
        return detail::simulate_thermal_source(model, duration_s, seed);
    return simulate_poisson_source(model, duration_s, seed);
}

TagStream apply_detector(const TagStream& stream, const DetectorSpec& det,
                         double duration_s, uint64_t seed) {
    validate(det);
    validate_sorted(stream, "apply_detector");
    TagStream out;
    out.channel_id = stream.channel_id;
    out.resolution_s = stream.resolution_s;
    out.duration_s = duration_s;

    std::vector<uint64_t> kept;
    if (det.efficiency >= 1.0) {
        kept = stream.ticks;
    } else {
        rng thin_rng(seed, rng_stage::op_thin);
        kept = bernoulli_thin(stream.ticks, det.efficiency, thin_rng);
    }
    rng dark_rng(seed, rng_stage::op_noise);
    std::vector<uint64_t> dark =
        poisson_ticks(det.dark_rate_hz, duration_s, stream.resolution_s, dark_rng);
    out.ticks = merge_sorted(kept, dark);
    return out;
}

std::pair<TagStream, TagStream> hbt_split(const TagStream& stream, uint64_t seed) {
    validate_sorted(stream, "hbt_split");
    TagStream a, b;
    a.channel_id = stream.channel_id;
    b.channel_id = static_cast<uint8_t>(stream.channel_id + 1);
    a.resolution_s = b.resolution_s = stream.resolution_s;
    a.duration_s = b.duration_s = stream.duration_s;
    a.ticks.reserve(stream.ticks.size() / 2 + 16);
    b.ticks.reserve(stream.ticks.size() / 2 + 16);
    rng r(seed, rng_stage::op_split);
    for (uint64_t t : stream.ticks)
        (r.bernoulli(0.5) ? a.ticks : b.ticks).push_back(t);
    return {std::move(a), std::move(b)};
}

DelayResult delay_stream(const TagStream& stream, double delay_s) {
    validate_sorted(stream, "delay_stream");
    DelayResult res;
    res.stream.channel_id = stream.channel_id;
    res.stream.resolution_s = stream.resolution_s;
    res.stream.duration_s = stream.duration_s;
    const int64_t shift =
        static_cast<int64_t>(std::llround(delay_s / stream.resolution_s));
    const uint64_t dur_ticks = stream.duration_ticks();
    res.stream.ticks.reserve(stream.ticks.size());
    for (uint64_t t : stream.ticks) {
        int64_t shifted = static_cast<int64_t>(t) + shift;
        if (shifted < 0) { ++res.dropped_early; continue; }
        if (static_cast<uint64_t>(shifted) > dur_ticks) { ++res.dropped_late; continue; }
        res.stream.ticks.push_back(static_cast<uint64_t>(shifted));
    }
    return res;
}

}  // namespace bpl
