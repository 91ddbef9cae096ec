// Thermal-statistics source generator.
//
// A zero-mean Gaussian photon field is fully described by its first and
// second order field correlations; for the detected intensities that means
// the factorial cumulant densities
//
//   c_tp(tau)  = pair_rate  * p(tau)                       (pair coincidences)
//   c_pp(d)    = probe_rate^2 * A(d)^2                     (probe bunching)
//   c_tpp(x,y) = 2 pair_rate probe_rate psi(x) psi(y) A(x-y)
//
// with psi = sqrt(p) and A the autocorrelation of psi (A(0) = 1). A
// superposition of independent Poisson cluster processes realizes exactly
// these cumulants:
//
//   L1  trigger singles, rate chosen so the channel totals trigger_rate
//   L2  probe singles, likewise for probe_rate
//   L3  probe+trigger pairs with the *compensated* delay kernel
//         c3(tau) = pair_rate * [ p(tau) - 2 probe_rate psi(tau) B(tau) ]+
//       (B = psi convolved with A); the subtraction removes exactly the
//       pair coincidences that the L5 triples already supply
//   L4  probe pairs at rate probe_rate(probe_rate - 2 pair_rate) W2/2,
//       separation density A^2/W2, supplying the remaining probe bunching
//   L5  trigger+probe+probe triples at rate pair_rate*probe_rate*I5 with
//       probe offsets (x, y) ~ psi(x) psi(y) A(x-y) / I5
//
// where W2 = integral of A^2 over the whole axis and I5 the double integral
// of psi psi A. Existence needs pair_rate <= probe_rate/2 (L4 rate must be
// nonnegative); more strongly paired sources have no Gaussian realization
// with these marginals. Fourth and higher cumulants of a true Gaussian field
// are not matched; two- and three-fold coincidence *means* are exact.
//
// All kernels are tabulated on a uniform grid over the waveform support and
// sampled through trapezoid cumulative tables, so any waveform family works.

#include <algorithm>
#include <cmath>

#include "bpl/fft.hpp"
#include "bpl/simkit.hpp"
#include "bpl/stream_ops.hpp"

namespace bpl {
namespace detail {

namespace {

// inverse-CDF sampler over [0, (n-1)*dt]; cell masses follow the trapezoid
// rule, positions interpolate linearly inside a cell
struct CdfTable {
    double dt = 0.0;
    double total = 0.0;  // mass before normalization
    std::vector<double> cdf;

    double sample(double u) const {
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.begin()) return 0.0;
        size_t i = static_cast<size_t>(it - cdf.begin());
        if (i >= cdf.size()) return dt * static_cast<double>(cdf.size() - 1);
        double c0 = cdf[i - 1], c1 = cdf[i];
        double f = (c1 > c0) ? (u - c0) / (c1 - c0) : 0.0;
        return dt * (static_cast<double>(i - 1) + f);
    }
};

CdfTable build_cdf(const std::vector<double>& density, double dt) {
    CdfTable t;
    t.dt = dt;
    t.cdf.resize(density.size());
    t.cdf[0] = 0.0;
    for (size_t i = 1; i < density.size(); ++i)
        t.cdf[i] = t.cdf[i - 1] + 0.5 * (density[i] + density[i - 1]) * dt;
    t.total = t.cdf.back();
    if (t.total > 0.0)
        for (double& c : t.cdf) c /= t.total;
    return t;
}

double trapz(const std::vector<double>& y, double dt) {
    double acc = 0.0;
    for (size_t i = 1; i < y.size(); ++i) acc += 0.5 * (y[i] + y[i - 1]);
    return acc * dt;
}

struct ThermalKernels {
    double dt = 0.0;
    std::vector<double> A;            // autocorrelation of psi, A[0] = 1
    CdfTable c3_cdf, sep_cdf, psi_cdf;
    double rate_l1 = 0.0, rate_l2 = 0.0;  // top-up singles
    double rate_l3 = 0.0, rate_l4 = 0.0, rate_l5 = 0.0;
    double cutoff = 0.0;

    double A_at(double x) const {
        double ax = std::abs(x) / dt;
        size_t i = static_cast<size_t>(ax);
        if (i + 1 >= A.size()) return 0.0;
        double f = ax - static_cast<double>(i);
        return A[i] + f * (A[i + 1] - A[i]);
    }
};

ThermalKernels build_kernels(const BiphotonModel& m) {
    const double rp = m.probe_rate_hz, rt = m.trigger_rate_hz, rc = m.pair_rate_hz;
    if (rc > 0.5 * rp)
        throw schema_error(
            "thermal source: pair_rate must not exceed probe_rate/2 "
            "(no Gaussian-statistics realization exists; fold detection "
            "efficiencies into the rates and retry)");

    ThermalKernels k;
    const int n = 1 << 14;
    k.cutoff = waveform_support_cutoff(m);
    k.dt = k.cutoff / static_cast<double>(n - 1);
    const double dt = k.dt;

    std::vector<double> p(n), psi(n);
    for (int i = 0; i < n; ++i) {
        p[i] = waveform_pdf(m, i * dt);
        psi[i] = std::sqrt(p[i]);
    }

    // A[j] = integral psi(u) psi(u+j dt) du, pinned to A[0] = 1 so the
    // Cauchy-Schwarz bound survives discretization
    k.A = autocorrelate(psi);
    double a0 = k.A[0];
    for (double& a : k.A) a /= a0;

    // B[j] = integral psi(y) A(j dt - y) dy, via two linear convolutions
    std::vector<double> psiR(psi.rbegin(), psi.rend());
    std::vector<double> c1 = convolve_trunc(psi, k.A);
    std::vector<double> c2 = convolve_trunc(psiR, k.A);
    std::vector<double> B(n);
    for (int j = 0; j < n; ++j)
        B[j] = (c1[j] + c2[n - 1 - j] - psi[j] * k.A[0]) * dt;

    std::vector<double> a2(n), psiB(n);
    for (int i = 0; i < n; ++i) {
        a2[i] = k.A[i] * k.A[i];
        psiB[i] = psi[i] * B[i];
    }
    double W2 = 2.0 * trapz(a2, dt);
    double I5 = trapz(psiB, dt);

    // compensated pair kernel; the clamp only ever acts in the far tail
    // where p has decayed below the subtraction term
    std::vector<double> c3(n);
    for (int i = 0; i < n; ++i)
        c3[i] = std::max(rc * p[i] - 2.0 * rc * rp * psiB[i], 0.0);
    k.c3_cdf = build_cdf(c3, dt);
    k.rate_l3 = k.c3_cdf.total;

    k.sep_cdf = build_cdf(a2, dt);
    k.psi_cdf = build_cdf(psi, dt);

    k.rate_l4 = rp * (rp - 2.0 * rc) * W2 / 2.0;
    k.rate_l5 = rc * rp * I5;

    k.rate_l1 = rt - k.rate_l3 - k.rate_l5;
    k.rate_l2 = rp - k.rate_l3 - 2.0 * k.rate_l4 - 2.0 * k.rate_l5;
    if (k.rate_l1 < 0.0 || k.rate_l2 < 0.0)
        throw schema_error(
            "thermal source: cluster layers exceed the channel rates "
            "(rates too low or waveform too long for these pairing ratios)");
    return k;
}

// Poisson anchors over [t0, t1), returned in seconds
std::vector<double> poisson_times(double rate, double t0, double t1, rng& r) {
    std::vector<double> out;
    if (rate <= 0.0 || t1 <= t0) return out;
    out.reserve(static_cast<size_t>(rate * (t1 - t0) * 1.02) + 16);
    double t = t0 + r.exponential(1.0 / rate);
    while (t < t1) {
        out.push_back(t);
        t += r.exponential(1.0 / rate);
    }
    return out;
}

}  // namespace

SourcePair simulate_thermal_source(const BiphotonModel& m, double duration_s,
                                   uint64_t seed) {
    if (!(m.norm > 0.0))
        throw schema_error("simulate_source: model not initialized (use make_model)");
    ThermalKernels k = build_kernels(m);

    const double res = 1e-12;
    SourcePair out;
    out.trigger.channel_id = 0;
    out.probe.channel_id = 1;
    out.trigger.resolution_s = out.probe.resolution_s = res;
    out.trigger.duration_s = out.probe.duration_s = duration_s;

    std::vector<double> trig_t, probe_t;
    auto keep = [&](std::vector<double>& dst, double t) {
        if (t >= 0.0 && t <= duration_s) dst.push_back(t);
    };
    const double margin = k.cutoff;

    // L3: probe anchor, trigger trails by the compensated kernel delay
    {
        rng r(seed, rng_stage::pair_emission);
        for (double t : poisson_times(k.rate_l3, -margin, duration_s, r)) {
            keep(probe_t, t);
            keep(trig_t, t + k.c3_cdf.sample(r.uniform01()));
        }
    }
    // L4: bunched probe pair, symmetric separation
    {
        rng r(seed, rng_stage::pp_bunch);
        for (double t : poisson_times(k.rate_l4, -margin, duration_s + margin, r)) {
            keep(probe_t, t);
            double d = k.sep_cdf.sample(r.uniform01());
            keep(probe_t, r.bernoulli(0.5) ? t + d : t - d);
        }
    }
    // L5: trigger anchor with two earlier probes; (x, y) drawn by rejection
    // from the psi marginal with acceptance A(|x-y|) <= A(0) = 1
    {
        rng r(seed, rng_stage::tpp_cluster);
        for (double t : poisson_times(k.rate_l5, 0.0, duration_s + margin, r)) {
            double x, y;
            do {
                x = k.psi_cdf.sample(r.uniform01());
                y = k.psi_cdf.sample(r.uniform01());
            } while (!r.bernoulli(k.A_at(x - y)));
            keep(trig_t, t);
            keep(probe_t, t - x);
            keep(probe_t, t - y);
        }
    }
    // L1/L2: independent singles topping the channels up to their rates
    {
        rng r(seed, rng_stage::trigger_singles);
        for (double t : poisson_times(k.rate_l1, 0.0, duration_s, r)) trig_t.push_back(t);
    }
    {
        rng r(seed, rng_stage::probe_singles);
        for (double t : poisson_times(k.rate_l2, 0.0, duration_s, r)) probe_t.push_back(t);
    }

    std::sort(trig_t.begin(), trig_t.end());
    std::sort(probe_t.begin(), probe_t.end());
    out.trigger.ticks.reserve(trig_t.size());
    out.probe.ticks.reserve(probe_t.size());
    for (double t : trig_t)
        out.trigger.ticks.push_back(static_cast<uint64_t>(std::llround(t / res)));
    for (double t : probe_t)
        out.probe.ticks.push_back(static_cast<uint64_t>(std::llround(t / res)));
    return out;
}

}  // namespace detail
}  // namespace bpl
