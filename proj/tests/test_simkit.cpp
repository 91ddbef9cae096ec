#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "bpl/correlator.hpp"
#include "bpl/model.hpp"
#include "bpl/simkit.hpp"
#include "doctest.h"

using namespace bpl;

namespace {

BiphotonModel source_model(double pair, double trig, double probe,
                           double tau_decay = 2e-8) {
    BiphotonModel m;
    m.waveform_kind = WaveformKind::exponential_decay;
    m.tau_decay_s = tau_decay;
    m.pair_rate_hz = pair;
    m.trigger_rate_hz = trig;
    m.probe_rate_hz = probe;
    return make_model(m);
}

// ordered pairs (i, j) with b[j] - a[i] in [lo, hi] ticks
uint64_t count_pairs(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b,
                     int64_t lo, int64_t hi) {
    uint64_t n = 0;
    size_t j0 = 0;
    for (uint64_t ta : a) {
        const auto t = static_cast<int64_t>(ta);
        while (j0 < b.size() && static_cast<int64_t>(b[j0]) < t + lo) ++j0;
        for (size_t j = j0; j < b.size() && static_cast<int64_t>(b[j]) <= t + hi; ++j)
            ++n;
    }
    return n;
}

void check_stream_wellformed(const TagStream& s) {
    CHECK(std::is_sorted(s.ticks.begin(), s.ticks.end()));
    if (!s.ticks.empty()) CHECK(s.ticks.back() <= s.duration_ticks());
}

}  // namespace

TEST_CASE("singles rates reproduce within counting noise") {
    const BiphotonModel m = source_model(7.3e5, 1.4e6, 8.9e5);
    const double T = 2.0;
    const SourcePair sp = simulate_source(m, T, 21);
    check_stream_wellformed(sp.trigger);
    check_stream_wellformed(sp.probe);
    CHECK(std::abs(static_cast<double>(sp.trigger.size()) - 1.4e6 * T) <
          5.0 * std::sqrt(1.4e6 * T));
    CHECK(std::abs(static_cast<double>(sp.probe.size()) - 8.9e5 * T) <
          5.0 * std::sqrt(8.9e5 * T));
}

TEST_CASE("identical seeds reproduce streams bit for bit") {
    const BiphotonModel m = source_model(8e4, 2e5, 2e5);
    for (SourceStatistics stats : {SourceStatistics::poisson, SourceStatistics::thermal}) {
        const SourcePair a = simulate_source(m, 0.05, 77, stats);
        const SourcePair b = simulate_source(m, 0.05, 77, stats);
        CHECK(a.trigger.ticks == b.trigger.ticks);
        CHECK(a.probe.ticks == b.probe.ticks);
        const SourcePair c = simulate_source(m, 0.05, 78, stats);
        CHECK(a.probe.ticks != c.probe.ticks);
    }
}

TEST_CASE("waveform delay sampler has the right mean and sign") {
    const BiphotonModel m = source_model(1e5, 2e5, 2e5);
    rng r(5);
    const int n = 300000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = sample_waveform_delay(m, r);
        REQUIRE(d >= 0.0);
        sum += d;
    }
    CHECK(std::abs(sum / n - 2e-8) < 5.0 * 2e-8 / std::sqrt(double(n)));
}

TEST_CASE("beam splitter partitions the stream") {
    const BiphotonModel m = source_model(7.3e5, 1.4e6, 8.9e5);
    const TagStream probe = simulate_source(m, 1.0, 3).probe;
    const auto [a, b] = hbt_split(probe, 99);
    CHECK(a.channel_id == probe.channel_id);
    CHECK(b.channel_id == probe.channel_id + 1);
    check_stream_wellformed(a);
    check_stream_wellformed(b);
    REQUIRE(a.size() + b.size() == probe.size());
    // the union restores the input exactly
    std::vector<uint64_t> merged(a.ticks);
    merged.insert(merged.end(), b.ticks.begin(), b.ticks.end());
    std::sort(merged.begin(), merged.end());
    CHECK(merged == probe.ticks);
    // and the routing is balanced
    const double n = static_cast<double>(probe.size());
    CHECK(std::abs(static_cast<double>(a.size()) - n / 2) < 5.0 * std::sqrt(n / 4));
    // deterministic
    const auto [a2, b2] = hbt_split(probe, 99);
    CHECK(a2.ticks == a.ticks);
    CHECK(b2.ticks == b.ticks);
}

TEST_CASE("delay shifts ticks and truncates at the edges") {
    TagStream s;
    s.resolution_s = 1e-12;
    s.duration_s = 1e-6;
    s.ticks = {0, 100, 10000, 900000};

    const DelayResult plus = delay_stream(s, 1e-7);
    CHECK(plus.stream.ticks == std::vector<uint64_t>{100000, 100100, 110000, 1000000});
    CHECK(plus.dropped_early == 0);
    CHECK(plus.dropped_late == 0);

    const DelayResult zero = delay_stream(s, 0.0);
    CHECK(zero.stream.ticks == s.ticks);

    const DelayResult minus = delay_stream(s, -1e-10);
    CHECK(minus.stream.ticks == std::vector<uint64_t>{0, 9900, 899900});
    CHECK(minus.dropped_early == 1);

    const DelayResult late = delay_stream(s, 2e-7);
    CHECK(late.dropped_late == 1);
    CHECK(late.stream.ticks.back() == 210000);
}

TEST_CASE("thermal statistics need headroom in the probe channel") {
    const BiphotonModel tight = source_model(1.2e5, 2e5, 2e5);
    CHECK_THROWS_AS(simulate_source(tight, 0.01, 1, SourceStatistics::thermal),
                    schema_error);
    // the boundary itself is allowed
    const BiphotonModel edge = source_model(1e5, 2e5, 2e5);
    CHECK_NOTHROW(simulate_source(edge, 0.001, 1, SourceStatistics::thermal));
}

// Second- and third-order moment validation of the two source statistics.
// One long realization each; every prediction below is analytic for the
// exponential waveform (density e^{-d/tau}/tau, amplitude autocorrelation
// A(d) = e^{-|d|/(2 tau)}).
TEST_CASE("source statistics produce the advertised correlations") {
    const double tau = 2e-8, rt = 2e5, rp = 2e5, rc = 8e3, T = 50.0;
    const BiphotonModel m = source_model(rc, rt, rp, tau);
    const double w = 2e-8;  // counting window, one decay time
    const int64_t wt = 20000;

    const SourcePair th = simulate_source(m, T, 2024, SourceStatistics::thermal);
    const SourcePair po = simulate_source(m, T, 2024, SourceStatistics::poisson);
    check_stream_wellformed(th.trigger);
    check_stream_wellformed(th.probe);
    CHECK(std::abs(static_cast<double>(th.trigger.size()) - rt * T) <
          5.0 * std::sqrt(rt * T));
    CHECK(std::abs(static_cast<double>(th.probe.size()) - rp * T) <
          5.5 * std::sqrt(rp * T));  // probe-probe bunching inflates the variance

    SUBCASE("trigger-probe pairing (both statistics)") {
        // trigger trails its probe: forward pairs carry the genuine signal
        const double genuine = rc * T * (1.0 - std::exp(-w / tau));
        const double accidental = rt * rp * T * w;
        for (const SourcePair* sp : {&th, &po}) {
            const double fwd = static_cast<double>(
                count_pairs(sp->probe.ticks, sp->trigger.ticks, 1, wt));
            const double rev = static_cast<double>(
                count_pairs(sp->trigger.ticks, sp->probe.ticks, 1, wt));
            CHECK(std::abs(fwd - (genuine + accidental)) <
                  5.0 * std::sqrt(genuine + accidental));
            CHECK(std::abs(rev - accidental) < 5.0 * std::sqrt(accidental));
        }
    }

    SUBCASE("probe-probe bunching separates the two statistics") {
        const double flat = rp * rp * T * w;
        const double bunched = flat + rp * rp * T * tau * (1.0 - std::exp(-w / tau));
        const double n_th = static_cast<double>(
            count_pairs(th.probe.ticks, th.probe.ticks, 1, wt));
        const double n_po = static_cast<double>(
            count_pairs(po.probe.ticks, po.probe.ticks, 1, wt));
        CHECK(std::abs(n_th - bunched) < 6.0 * std::sqrt(bunched));
        CHECK(std::abs(n_po - flat) < 5.0 * std::sqrt(flat));
    }

    SUBCASE("heralded autocorrelation: thermal vs independent pairs") {
        // window [-w, 0] relative to the trigger catches the partner probes
        const double ghat = m.peak_g2;
        const double we = 20001e-12;  // inclusive tick window
        const double kappa = (tau / we) * (1.0 - std::exp(-we / tau));
        const double a2w =
            2.0 * (tau / we) * (tau / we) * (we / tau - 1.0 + std::exp(-we / tau));
        const double mu = (2.0 / (we * we)) * tau * tau *
                          (1.0 - std::exp(-we / tau) * (1.0 + we / tau));
        const double gbar = 1.0 + (ghat - 1.0) * kappa;
        const double pred_th =
            (1.0 + a2w + 2.0 * (ghat - 1.0) * (kappa + mu)) / (gbar * gbar);
        const double pred_po = (2.0 * gbar - 1.0) / (gbar * gbar);

        for (const SourcePair* sp : {&th, &po}) {
            const auto [p1, p2] = hbt_split(sp->probe, 31);
            const HeraldedResult h =
                heralded_autocorr(sp->trigger, p1, p2, -1e-8, 2e-8);
            REQUIRE_FALSE(h.undefined);
            const double pred = sp == &th ? pred_th : pred_po;
            CHECK(std::abs(h.g_conditional - pred) < 4.0 * h.g_err);
            // the two models sit far apart; make sure each rejects the other
            const double other = sp == &th ? pred_po : pred_th;
            CHECK(std::abs(h.g_conditional - other) > 6.0 * h.g_err);
        }
    }
}
