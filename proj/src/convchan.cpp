#include "bpl/convchan.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bpl/rng.hpp"
#include "bpl/stream_ops.hpp"

namespace bpl {

namespace {

constexpr double kLn2 = std::numbers::ln2;

double lerp_table(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front() || x >= xs.back()) {
        if (x == xs.front()) return ys.front();
        if (x == xs.back()) return ys.back();
        return 0.0;
    }
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    size_t i = static_cast<size_t>(it - xs.begin());
    double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + t * (ys[i] - ys[i - 1]);
}

template <typename F>
double simpson(F f, double a, double b, int n) {
    double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * ((i & 1) ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// detuning beyond which the window transmits less than ~1e-16 of peak
double window_support(const ConversionChannelSpec& spec) {
    double expo = 37.0 / kLn2;
    double halfwidths = std::pow(expo, 1.0 / (2.0 * spec.window_order));
    return 0.5 * spec.window_fwhm_hz * halfwidths + std::abs(spec.window_center_offset_hz);
}

}  // namespace

void validate(const ConversionChannelSpec& spec) {
    if (!(spec.window_fwhm_hz > 0.0))
        throw schema_error("conversion: window_fwhm must be positive");
    if (!(spec.window_order >= 1.0))
        throw schema_error("conversion: window_order must be >= 1");
    if (!(spec.peak_efficiency > 0.0 && spec.peak_efficiency <= 1.0))
        throw schema_error("conversion: peak_efficiency must lie in (0, 1]");
    if (spec.added_noise_rate_hz < 0.0)
        throw schema_error("conversion: added_noise_rate must be nonnegative");
}

SpectralDensity SpectralDensity::delta(double center_hz) {
    SpectralDensity s;
    s.shape = Shape::delta;
    s.center_hz = center_hz;
    return s;
}

SpectralDensity SpectralDensity::gaussian(double fwhm_hz, double center_hz) {
    if (!(fwhm_hz > 0.0)) throw schema_error("spectrum: fwhm must be positive");
    SpectralDensity s;
    s.shape = Shape::gaussian;
    s.fwhm_hz = fwhm_hz;
    s.center_hz = center_hz;
    return s;
}

SpectralDensity SpectralDensity::lorentzian(double fwhm_hz, double center_hz) {
    if (!(fwhm_hz > 0.0)) throw schema_error("spectrum: fwhm must be positive");
    SpectralDensity s;
    s.shape = Shape::lorentzian;
    s.fwhm_hz = fwhm_hz;
    s.center_hz = center_hz;
    return s;
}

SpectralDensity SpectralDensity::tabulated(std::vector<double> freq_hz,
                                           std::vector<double> density) {
    if (freq_hz.size() < 2 || freq_hz.size() != density.size())
        throw schema_error("spectrum: tabulated arrays must match and hold >= 2 samples");
    if (!std::is_sorted(freq_hz.begin(), freq_hz.end()))
        throw schema_error("spectrum: tabulated frequency grid must be sorted");
    SpectralDensity s;
    s.shape = Shape::tabulated;
    s.freq_hz = std::move(freq_hz);
    s.density = std::move(density);
    return s;
}

double spectral_value(const SpectralDensity& s, double freq_hz) {
    const double x = freq_hz - s.center_hz;
    switch (s.shape) {
        case SpectralDensity::Shape::gaussian: {
            double w = s.fwhm_hz;
            double u = 2.0 * x / w;
            return (2.0 / w) * std::sqrt(kLn2 / std::numbers::pi) *
                   std::exp(-kLn2 * u * u);
        }
        case SpectralDensity::Shape::lorentzian: {
            double g = 0.5 * s.fwhm_hz;
            return g / (std::numbers::pi * (x * x + g * g));
        }
        case SpectralDensity::Shape::tabulated:
            return lerp_table(s.freq_hz, s.density, freq_hz);
        case SpectralDensity::Shape::delta:
            throw schema_error("spectrum: delta density has no point value");
    }
    return 0.0;
}

double acceptance_transmission(const ConversionChannelSpec& spec, double detuning_hz) {
    validate(spec);
    const double u = std::abs(2.0 * (detuning_hz - spec.window_center_offset_hz) /
                              spec.window_fwhm_hz);
    // |u|^(2*order) rather than u^2 raised later: fractional orders need the
    // absolute value to stay real
    return spec.peak_efficiency * std::exp(-kLn2 * std::pow(u, 2.0 * spec.window_order));
}

double conversion_efficiency(const ConversionChannelSpec& spec,
                             const SpectralDensity& photon_spectrum) {
    validate(spec);
    auto T = [&](double f) { return acceptance_transmission(spec, f); };

    if (photon_spectrum.shape == SpectralDensity::Shape::delta)
        return T(photon_spectrum.center_hz);

    if (photon_spectrum.shape == SpectralDensity::Shape::tabulated) {
        const auto& xs = photon_spectrum.freq_hz;
        const auto& ys = photon_spectrum.density;
        double area = 0.0, overlap = 0.0;
        for (size_t i = 1; i < xs.size(); ++i) {
            double h = xs[i] - xs[i - 1];
            area += 0.5 * (ys[i] + ys[i - 1]) * h;
            overlap += 0.5 * (ys[i] * T(xs[i]) + ys[i - 1] * T(xs[i - 1])) * h;
        }
        if (std::abs(area - 1.0) > 1e-4)
            throw schema_error("conversion_efficiency: spectrum integrates to " +
                               std::to_string(area) + ", expected 1 within 1e-4");
        return overlap;
    }

    auto ST = [&](double f) { return spectral_value(photon_spectrum, f) * T(f); };

    // one fine piece across the spectral line, two across the rest of the
    // window; handles bandwidths from hertz to gigahertz at fixed cost
    const double wspec = 8.0 * photon_spectrum.fwhm_hz;
    const double c = photon_spectrum.center_hz;
    const double L = std::max(window_support(spec), std::abs(c) + wspec);
    double lo = std::max(-L, c - wspec), hi = std::min(L, c + wspec);
    double acc = simpson(ST, lo, hi, 1 << 16);
    if (lo > -L) acc += simpson(ST, -L, lo, 1 << 16);
    if (hi < L) acc += simpson(ST, hi, L, 1 << 16);
    return acc;
}

ConversionChannelSpec calibrate_window_shape(double narrowband_target,
                                             double broadband_target,
                                             const SpectralDensity& broadband_spectrum) {
    if (!(broadband_target > 0.0) || !(narrowband_target <= 1.0) ||
        !(broadband_target < narrowband_target || broadband_target == narrowband_target))
        throw schema_error("calibrate_window_shape: need 0 < broadband_target <= narrowband_target <= 1");
    if (broadband_target > narrowband_target)
        throw schema_error("calibrate_window_shape: broadband target exceeds narrowband target");

    constexpr double kTol = 1e-3;
    ConversionChannelSpec spec;
    spec.peak_efficiency = narrowband_target;

    auto overlap_at = [&](double order) {
        ConversionChannelSpec s = spec;
        s.window_order = order;
        return conversion_efficiency(s, broadband_spectrum);
    };

    double f_lo = overlap_at(1.0);
    if (std::abs(f_lo - broadband_target) <= kTol) {
        spec.window_order = 1.0;
        return spec;
    }
    double f_hi = overlap_at(8.0);
    if (std::abs(f_hi - broadband_target) <= kTol) {
        spec.window_order = 8.0;
        return spec;
    }
    // overlap grows with order (flatter top passes more of the wings)
    if (broadband_target < f_lo || broadband_target > f_hi)
        throw schema_error(
            "calibrate_window_shape: target " + std::to_string(broadband_target) +
            " unreachable; orders [1, 8] span overlaps [" + std::to_string(f_lo) +
            ", " + std::to_string(f_hi) + "]");

    double lo = 1.0, hi = 8.0;
    for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        if (overlap_at(mid) < broadband_target) lo = mid; else hi = mid;
    }
    spec.window_order = 0.5 * (lo + hi);
    return spec;
}

TagStream transform_stream(const ConversionChannelSpec& spec, const TagStream& probe_tags,
                           double efficiency, double duration_s, uint64_t seed) {
    validate(spec);
    if (!(efficiency >= 0.0 && efficiency <= 1.0))
        throw schema_error("transform_stream: efficiency must lie in [0, 1]");
    validate_sorted(probe_tags, "transform_stream");

    TagStream out;
    out.channel_id = probe_tags.channel_id;
    out.resolution_s = probe_tags.resolution_s;
    out.duration_s = duration_s;
    const uint64_t dur_ticks =
        static_cast<uint64_t>(duration_s / probe_tags.resolution_s + 0.5);
    const int64_t shift =
        static_cast<int64_t>(std::llround(spec.group_delay_s / probe_tags.resolution_s));

    rng thin_rng(seed, rng_stage::conversion_thin);
    std::vector<uint64_t> surv;
    surv.reserve(static_cast<size_t>(probe_tags.ticks.size() * efficiency * 1.05) + 16);
    for (uint64_t t : probe_tags.ticks) {
        if (!thin_rng.bernoulli(efficiency)) continue;
        int64_t shifted = static_cast<int64_t>(t) + shift;
        if (shifted < 0 || static_cast<uint64_t>(shifted) > dur_ticks) continue;
        surv.push_back(static_cast<uint64_t>(shifted));
    }

    rng noise_rng(seed, rng_stage::conversion_noise);
    std::vector<uint64_t> noise =
        poisson_ticks(spec.added_noise_rate_hz, duration_s, probe_tags.resolution_s, noise_rng);

    out.ticks = merge_sorted(surv, noise);
    return out;
}

}  // namespace bpl
