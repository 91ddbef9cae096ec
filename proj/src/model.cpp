#include "bpl/model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "bpl/fft.hpp"

namespace bpl {

namespace {

constexpr double kPi = std::numbers::pi;

// un-normalized density of the analytic families
double shape_value(const BiphotonModel& m, double tau) {
    if (tau < 0.0) return 0.0;
    double rise = (m.tau_rise_s > 0.0) ? std::min(tau / m.tau_rise_s, 1.0) : 1.0;
    double v = rise * std::exp(-tau / m.tau_decay_s);
    if (m.waveform_kind == WaveformKind::damped_oscillation) {
        double s = std::sin(kPi * m.oscillation_freq_hz * tau);
        v *= s * s;
    }
    return v;
}

double tabulated_value(const BiphotonModel& m, double tau) {
    const auto& xs = m.tab_tau_s;
    const auto& ys = m.tab_density;
    if (tau < xs.front() || tau > xs.back()) return 0.0;
    auto it = std::upper_bound(xs.begin(), xs.end(), tau);
    if (it == xs.begin()) return ys.front();
    size_t i = static_cast<size_t>(it - xs.begin());
    if (i >= xs.size()) return ys.back();
    double t = (tau - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + t * (ys[i] - ys[i - 1]);
}

double trapezoid_area(const std::vector<double>& xs, const std::vector<double>& ys) {
    double acc = 0.0;
    for (size_t i = 1; i < xs.size(); ++i)
        acc += 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
    return acc;
}

// composite Simpson over [a, b] with n (even) intervals
template <typename F>
double simpson(F f, double a, double b, int n) {
    double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * ((i & 1) ? 4.0 : 2.0);
    return acc * h / 3.0;
}

}  // namespace

BiphotonModel make_model(BiphotonModel m) {
    if (m.waveform_kind != WaveformKind::tabulated) {
        if (!(m.tau_decay_s > 0.0))
            throw schema_error("invalid model: tau_decay must be positive");
        if (m.tau_rise_s < 0.0)
            throw schema_error("invalid model: tau_rise must be nonnegative");
    }
    if (m.waveform_kind == WaveformKind::damped_oscillation &&
        !(m.oscillation_freq_hz > 0.0))
        throw schema_error("invalid model: oscillation frequency must be positive");
    if (m.pair_rate_hz < 0.0 || m.trigger_rate_hz < 0.0 || m.probe_rate_hz < 0.0)
        throw schema_error("invalid model: rates must be nonnegative");
    if (m.pair_rate_hz > std::min(m.trigger_rate_hz, m.probe_rate_hz))
        throw schema_error("invalid model: pair_rate exceeds a singles rate");

    switch (m.waveform_kind) {
        case WaveformKind::exponential_decay: {
            const double lam = m.tau_decay_s, a = m.tau_rise_s;
            double z = (a > 0.0) ? (lam * lam / a) * (1.0 - std::exp(-a / lam)) : lam;
            m.norm = 1.0 / z;
            // rising-then-decaying shape peaks exactly where the rise saturates
            m.pdf_peak_tau_s = a;
            m.pdf_peak_value = shape_value(m, a) * m.norm;
            break;
        }
        case WaveformKind::damped_oscillation: {
            const double hi = m.tau_rise_s + 45.0 * m.tau_decay_s;
            double z = simpson([&](double t) { return shape_value(m, t); }, 0.0, hi, 1 << 16);
            if (!(z > 0.0)) throw schema_error("invalid model: waveform has zero area");
            m.norm = 1.0 / z;
            // grid argmax, then ternary refinement inside the winning bracket
            const int n = 1 << 15;
            double best = 0.0, best_t = 0.0, h = hi / n;
            for (int i = 0; i <= n; ++i) {
                double v = shape_value(m, i * h);
                if (v > best) { best = v; best_t = i * h; }
            }
            double lo = std::max(0.0, best_t - h), hi2 = best_t + h;
            for (int it = 0; it < 200; ++it) {
                double m1 = lo + (hi2 - lo) / 3.0, m2 = hi2 - (hi2 - lo) / 3.0;
                if (shape_value(m, m1) < shape_value(m, m2)) lo = m1; else hi2 = m2;
            }
            double t_star = 0.5 * (lo + hi2);
            m.pdf_peak_tau_s = t_star;
            m.pdf_peak_value = shape_value(m, t_star) * m.norm;
            break;
        }
        case WaveformKind::tabulated: {
            if (m.tab_tau_s.size() < 2 || m.tab_tau_s.size() != m.tab_density.size())
                throw schema_error("invalid model: tabulated waveform needs matching tau/density arrays");
            if (!std::is_sorted(m.tab_tau_s.begin(), m.tab_tau_s.end()))
                throw schema_error("invalid model: tabulated tau grid must be sorted");
            if (m.tab_tau_s.front() < 0.0)
                throw schema_error("invalid model: tabulated waveform must live on tau >= 0");
            for (double y : m.tab_density)
                if (y < 0.0) throw schema_error("invalid model: tabulated density must be nonnegative");
            double z = trapezoid_area(m.tab_tau_s, m.tab_density);
            if (!(z > 0.0)) throw schema_error("invalid model: waveform has zero area");
            for (double& y : m.tab_density) y /= z;
            m.norm = 1.0;
            size_t imax = 0;
            for (size_t i = 1; i < m.tab_density.size(); ++i)
                if (m.tab_density[i] > m.tab_density[imax]) imax = i;
            m.pdf_peak_tau_s = m.tab_tau_s[imax];
            m.pdf_peak_value = m.tab_density[imax];
            if (m.tau_decay_s <= 0.0)  // effective scale for binning/grid heuristics
                m.tau_decay_s = std::max(m.tab_tau_s.back() / 4.0, 1e-12);
            break;
        }
    }

    if (m.trigger_rate_hz > 0.0 && m.probe_rate_hz > 0.0)
        m.peak_g2 = 1.0 + m.pair_rate_hz * m.pdf_peak_value /
                              (m.trigger_rate_hz * m.probe_rate_hz);
    else
        m.peak_g2 = 1.0;
    return m;
}

double waveform_pdf(const BiphotonModel& m, double tau_s) {
    if (!std::isfinite(tau_s)) throw schema_error("waveform_pdf: tau must be finite");
    if (!(m.norm > 0.0)) throw schema_error("waveform_pdf: model not initialized (use make_model)");
    if (tau_s < 0.0) return 0.0;
    if (m.waveform_kind == WaveformKind::tabulated) return tabulated_value(m, tau_s);
    return shape_value(m, tau_s) * m.norm;
}

double eval_cross_correlation(const BiphotonModel& m, double tau_s) {
    if (!(m.trigger_rate_hz > 0.0) || !(m.probe_rate_hz > 0.0))
        throw schema_error("eval_cross_correlation: singles rates must be positive");
    return 1.0 + m.pair_rate_hz * waveform_pdf(m, tau_s) /
                     (m.trigger_rate_hz * m.probe_rate_hz);
}

double eval_conditional_autocorr(double g2_cross) {
    if (!(g2_cross >= 1.0))
        throw schema_error("eval_conditional_autocorr: cross-correlation must be >= 1");
    return (4.0 * g2_cross - 2.0) / (g2_cross * g2_cross);
}

std::pair<double, double> pairing_ratios(const BiphotonModel& m) {
    if (!(m.probe_rate_hz > 0.0) || !(m.trigger_rate_hz > 0.0))
        throw schema_error("pairing_ratios: rates must be positive");
    return {m.pair_rate_hz / m.probe_rate_hz, m.pair_rate_hz / m.trigger_rate_hz};
}

double waveform_support_cutoff(const BiphotonModel& m) {
    if (m.waveform_kind == WaveformKind::tabulated) return m.tab_tau_s.back();
    return m.tau_rise_s + 35.0 * m.tau_decay_s;
}

namespace {

// amplitude samples, spectrum power and its frequency step, shared by the
// FWHM extraction and the exported spectrum table
void spectrum_power(const BiphotonModel& m, std::vector<double>& power, double& df) {
    if (m.waveform_kind == WaveformKind::tabulated && m.tab_tau_s.size() < 16)
        throw schema_error("waveform_spectrum_fwhm: tabulated waveform has too few samples to resolve a spectrum (need >= 16)");

    const size_t n = 1 << 16;
    const double span = (m.waveform_kind == WaveformKind::tabulated)
                            ? m.tab_tau_s.back()
                            : 64.0 * m.tau_decay_s;
    const double dt = span / static_cast<double>(n);
    std::vector<std::complex<double>> amp(n);
    for (size_t j = 0; j < n; ++j)
        amp[j] = std::sqrt(waveform_pdf(m, static_cast<double>(j) * dt));
    fft_pow2(amp);
    power.resize(n / 2 + 1);
    for (size_t k = 0; k <= n / 2; ++k) power[k] = std::norm(amp[k]);
    df = 1.0 / (static_cast<double>(n) * dt);
}

}  // namespace

double waveform_spectrum_fwhm(const BiphotonModel& m) {
    std::vector<double> power;
    double df = 0.0;
    spectrum_power(m, power, df);

    size_t kmax = 0;
    for (size_t k = 1; k < power.size(); ++k)
        if (power[k] > power[kmax]) kmax = k;
    const double half = 0.5 * power[kmax];

    // right crossing
    size_t r = kmax;
    while (r + 1 < power.size() && power[r + 1] >= half) ++r;
    if (r + 1 >= power.size())
        throw runtime_fault("waveform_spectrum_fwhm: spectrum wider than the grid Nyquist range (waveform too narrow for this grid)");
    double right = (static_cast<double>(r) +
                    (power[r] - half) / (power[r] - power[r + 1])) * df;

    double left;
    if (kmax == 0) {
        left = -right;  // real amplitude: power spectrum is even in frequency
    } else {
        size_t l = kmax;
        while (l > 0 && power[l - 1] >= half) --l;
        if (l == 0 && power[0] >= half)
            left = -right;
        else
            left = (static_cast<double>(l) -
                    (power[l] - half) / (power[l] - power[l - 1])) * df;
    }

    double fwhm = right - left;
    if (fwhm < 2.0 * df)
        throw runtime_fault("waveform_spectrum_fwhm: width below grid resolution");
    return fwhm;
}

void waveform_power_spectrum(const BiphotonModel& m,
                             std::vector<double>& freq_hz,
                             std::vector<double>& density) {
    std::vector<double> power;
    double df = 0.0;
    spectrum_power(m, power, df);
    // normalize so that the two-sided density integrates to 1
    double area = 0.0;
    for (size_t k = 1; k < power.size(); ++k)
        area += 0.5 * (power[k] + power[k - 1]) * df;
    area *= 2.0;
    freq_hz.resize(power.size());
    density.resize(power.size());
    for (size_t k = 0; k < power.size(); ++k) {
        freq_hz[k] = static_cast<double>(k) * df;
        density[k] = power[k] / area;
    }
}

}  // namespace bpl
