#include "bpl/correlator.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "bpl/errors.hpp"

namespace bpl {

namespace {

// binning reduced to exact tick arithmetic
struct TickBinning {
    int64_t tau_min = 0;
    int64_t width = 0;
    size_t nbins = 0;
};

int64_t to_ticks(double seconds, double resolution_s, const char* what) {
    double q = seconds / resolution_s;
    double r = std::nearbyint(q);
    if (std::abs(q - r) > std::max(1e-3, 1e-9 * std::abs(q)))
        throw schema_error(std::string("binning: ") + what +
                           " is not a whole number of resolution ticks");
    return static_cast<int64_t>(r);
}

TickBinning make_tick_binning(const BinningSpec& b, double resolution_s) {
    if (!(b.bin_width_s > 0.0))
        throw schema_error("binning: bin_width must be positive");
    if (!(b.tau_min_s < b.tau_max_s))
        throw schema_error("binning: tau_min must be below tau_max");
    double ratio = (b.tau_max_s - b.tau_min_s) / b.bin_width_s;
    double n = std::nearbyint(ratio);
    if (std::abs(ratio - n) > 1e-6 * ratio)
        throw schema_error("binning: span is not an integer number of bins");
    if (n > 1e7)
        throw schema_error("binning: more than 1e7 bins requested");
    TickBinning t;
    t.tau_min = to_ticks(b.tau_min_s, resolution_s, "tau_min");
    t.width = to_ticks(b.bin_width_s, resolution_s, "bin_width");
    if (t.width < 1)
        throw schema_error("binning: bin_width is below the tag resolution");
    t.nbins = static_cast<size_t>(n);
    return t;
}

void require_same_resolution(double ra, double rb, const char* who) {
    if (ra != rb)
        throw schema_error(std::string(who) + ": streams have different resolutions");
}

// coincidence counts for a ticks in [a_begin, a_end)
std::vector<uint64_t> count_chunk(const std::vector<uint64_t>& a,
                                  const std::vector<uint64_t>& b,
                                  size_t a_begin, size_t a_end,
                                  const TickBinning& tb) {
    std::vector<uint64_t> counts(tb.nbins, 0);
    const int64_t lo_off = tb.tau_min;
    const int64_t hi_off = tb.tau_min + tb.width * static_cast<int64_t>(tb.nbins);
    size_t j0 = 0;
    for (size_t i = a_begin; i < a_end; ++i) {
        const int64_t at = static_cast<int64_t>(a[i]);
        while (j0 < b.size() && static_cast<int64_t>(b[j0]) < at + lo_off) ++j0;
        for (size_t j = j0; j < b.size(); ++j) {
            const int64_t d = static_cast<int64_t>(b[j]) - at;
            if (d >= hi_off) break;
            counts[static_cast<size_t>((d - lo_off) / tb.width)]++;
        }
    }
    return counts;
}

}  // namespace

CorrelogramResult cross_correlogram(const TagStream& a, const TagStream& b,
                                    const BinningSpec& binning,
                                    unsigned n_threads) {
    validate_sorted(a, "cross_correlogram");
    validate_sorted(b, "cross_correlogram");
    require_same_resolution(a.resolution_s, b.resolution_s, "cross_correlogram");
    if (std::abs(a.duration_s - b.duration_s) >
        1e-9 * std::max(a.duration_s, b.duration_s))
        throw schema_error("cross_correlogram: streams have different durations");

    const TickBinning tb = make_tick_binning(binning, a.resolution_s);

    CorrelogramResult r;
    r.binning = binning;
    r.resolution_s = a.resolution_s;
    r.duration_s = a.duration_s;
    r.singles_a = a.size();
    r.singles_b = b.size();

    if (n_threads < 1) n_threads = 1;
    size_t chunks = std::min<size_t>(n_threads, std::max<size_t>(a.size(), 1));
    if (chunks <= 1) {
        r.counts = count_chunk(a.ticks, b.ticks, 0, a.size(), tb);
    } else {
        std::vector<std::vector<uint64_t>> partial(chunks);
        std::vector<std::thread> pool;
        pool.reserve(chunks);
        const size_t step = (a.size() + chunks - 1) / chunks;
        for (size_t c = 0; c < chunks; ++c) {
            size_t lo = c * step, hi = std::min(a.size(), lo + step);
            pool.emplace_back([&, c, lo, hi] {
                partial[c] = count_chunk(a.ticks, b.ticks, lo, hi, tb);
            });
        }
        for (auto& t : pool) t.join();
        r.counts.assign(tb.nbins, 0);
        for (const auto& p : partial)
            for (size_t i = 0; i < tb.nbins; ++i) r.counts[i] += p[i];
    }

    r.tau_s.resize(tb.nbins);
    r.g2.resize(tb.nbins);
    r.g2_err.resize(tb.nbins);
    const double denom = static_cast<double>(r.singles_a) *
                         static_cast<double>(r.singles_b) * binning.bin_width_s;
    const double factor = denom > 0.0 ? r.duration_s / denom : 0.0;
    for (size_t i = 0; i < tb.nbins; ++i) {
        r.tau_s[i] = (static_cast<double>(tb.tau_min) +
                      (static_cast<double>(i) + 0.5) * static_cast<double>(tb.width)) *
                     r.resolution_s;
        r.g2[i] = static_cast<double>(r.counts[i]) * factor;
        r.g2_err[i] =
            r.counts[i] > 0 ? r.g2[i] / std::sqrt(static_cast<double>(r.counts[i])) : 0.0;
    }
    return r;
}

HeraldedResult heralded_autocorr(const TagStream& trigger, const TagStream& p1,
                                 const TagStream& p2, double tau_s,
                                 double window_s) {
    if (!(window_s > 0.0))
        throw schema_error("heralded_autocorr: window must be positive");
    validate_sorted(trigger, "heralded_autocorr");
    validate_sorted(p1, "heralded_autocorr");
    validate_sorted(p2, "heralded_autocorr");
    require_same_resolution(trigger.resolution_s, p1.resolution_s, "heralded_autocorr");
    require_same_resolution(trigger.resolution_s, p2.resolution_s, "heralded_autocorr");

    const double res = trigger.resolution_s;
    const int64_t off = static_cast<int64_t>(std::nearbyint(tau_s / res));
    const int64_t half = static_cast<int64_t>(std::nearbyint(window_s / (2.0 * res)));

    HeraldedResult r;
    r.tau_s = tau_s;
    r.window_s = window_s;
    r.n_trigger = trigger.size();

    size_t i1 = 0, i2 = 0;
    for (uint64_t t : trigger.ticks) {
        const int64_t lo = static_cast<int64_t>(t) + off - half;
        const int64_t hi = static_cast<int64_t>(t) + off + half;
        while (i1 < p1.size() && static_cast<int64_t>(p1.ticks[i1]) < lo) ++i1;
        while (i2 < p2.size() && static_cast<int64_t>(p2.ticks[i2]) < lo) ++i2;
        const bool hit1 = i1 < p1.size() && static_cast<int64_t>(p1.ticks[i1]) <= hi;
        const bool hit2 = i2 < p2.size() && static_cast<int64_t>(p2.ticks[i2]) <= hi;
        if (hit1) ++r.n_tp1;
        if (hit2) ++r.n_tp2;
        if (hit1 && hit2) ++r.n_triple;
    }

    if (r.n_trigger == 0 || r.n_tp1 == 0 || r.n_tp2 == 0) {
        r.undefined = true;
        return r;
    }
    r.g_conditional = static_cast<double>(r.n_triple) * static_cast<double>(r.n_trigger) /
                      (static_cast<double>(r.n_tp1) * static_cast<double>(r.n_tp2));
    if (r.n_triple > 0)
        r.g_err = r.g_conditional *
                  std::sqrt(1.0 / static_cast<double>(r.n_triple) +
                            1.0 / static_cast<double>(r.n_trigger) +
                            1.0 / static_cast<double>(r.n_tp1) +
                            1.0 / static_cast<double>(r.n_tp2));
    return r;
}

PeakStats peak_stats(const CorrelogramResult& result) {
    const size_t n = result.g2.size();
    bool any = false;
    for (uint64_t c : result.counts) any = any || c > 0;
    if (n == 0 || !any)
        throw runtime_fault("peak_stats: no coincidences in the correlogram");

    size_t ip = 0;
    for (size_t i = 1; i < n; ++i)
        if (result.g2[i] > result.g2[ip]) ip = i;  // ties keep the earliest tau

    // off-peak bins estimate the baseline noise level
    PeakStats s;
    {
        const size_t guard = n / 4;
        double sum = 0.0, sum2 = 0.0;
        size_t nb = 0;
        for (size_t i = 0; i < n; ++i) {
            size_t dist = i > ip ? i - ip : ip - i;
            if (dist <= guard) continue;
            sum += result.g2[i];
            sum2 += result.g2[i] * result.g2[i];
            ++nb;
        }
        if (nb >= 2) {
            s.baseline_mean = sum / static_cast<double>(nb);
            double var = (sum2 - sum * sum / static_cast<double>(nb)) /
                         static_cast<double>(nb - 1);
            s.baseline_sigma = std::sqrt(std::max(var, 0.0));
        }
    }

    s.peak_g2 = result.g2[ip];
    s.peak_tau_s = result.tau_s[ip];
    if (!(s.peak_g2 > 1.0 + 5.0 * s.baseline_sigma))
        throw runtime_fault("peak_stats: maximum does not stand out from the baseline");

    const double half_height = 1.0 + (s.peak_g2 - 1.0) / 2.0;
    double x_left = 0.0, x_right = 0.0;
    bool found = false;
    for (size_t i = ip; i-- > 0;) {
        if (result.g2[i] < half_height) {
            x_left = result.tau_s[i] + (half_height - result.g2[i]) /
                                           (result.g2[i + 1] - result.g2[i]) *
                                           (result.tau_s[i + 1] - result.tau_s[i]);
            found = true;
            break;
        }
    }
    if (!found)
        throw runtime_fault("peak_stats: half maximum not bracketed on the left");
    found = false;
    for (size_t i = ip + 1; i < n; ++i) {
        if (result.g2[i] < half_height) {
            x_right = result.tau_s[i - 1] + (result.g2[i - 1] - half_height) /
                                                (result.g2[i - 1] - result.g2[i]) *
                                                (result.tau_s[i] - result.tau_s[i - 1]);
            found = true;
            break;
        }
    }
    if (!found)
        throw runtime_fault("peak_stats: half maximum not bracketed on the right");

    // a lone hot bin cannot resolve a width below the bin itself
    s.fwhm_s = std::max(x_right - x_left, result.binning.bin_width_s);
    return s;
}

TagStream merge_streams(const std::vector<TagStream>& streams) {
    if (streams.empty())
        throw schema_error("merge_streams: need at least one input stream");
    for (const auto& s : streams) {
        require_same_resolution(streams.front().resolution_s, s.resolution_s,
                                "merge_streams");
        validate_sorted(s, "merge_streams");
    }
    TagStream out;
    out.channel_id = streams.front().channel_id;
    out.resolution_s = streams.front().resolution_s;
    size_t total = 0;
    for (const auto& s : streams) {
        out.duration_s = std::max(out.duration_s, s.duration_s);
        total += s.size();
    }
    out.ticks.reserve(total);
    for (const auto& s : streams)
        out.ticks.insert(out.ticks.end(), s.ticks.begin(), s.ticks.end());
    std::sort(out.ticks.begin(), out.ticks.end());
    return out;
}

}  // namespace bpl
