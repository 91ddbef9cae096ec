#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bpl/errors.hpp"

namespace bpl {

enum class WaveformKind { exponential_decay, damped_oscillation, tabulated };

// Knobs of the physical source that parameterize experiments but enter no
// computation here; carried through configs and manifests as metadata.
struct SourceSettings {
    double optical_depth = 0.0;
    double omega_1 = 0.0;       // pump Rabi frequencies, units of Gamma
    double omega_2 = 0.0;
    double delta_1 = 0.0;       // pump detuning, units of Gamma
    double gamma_21 = 0.0;      // ground-state decoherence, units of Gamma
    double Gamma_hz = 2.0 * 3.14159265358979323846 * 6.0e6;
};

// Analytic description of a photon-pair source: the temporal density p(tau)
// of the trigger delay relative to its partner probe photon, and the three
// generation rates. All correlation formulas below live on top of these.
//
// p(tau) families:
//   exponential_decay   p ~ min(tau/tau_rise, 1) * exp(-tau/tau_decay)
//   damped_oscillation  p ~ min(tau/tau_rise, 1) * exp(-tau/tau_decay) * sin^2(pi*f*tau)
//   tabulated           linear interpolation of caller-supplied samples
// All are zero for tau < 0 (the probe photon is emitted first) and
// normalized to unit area on construction.
struct BiphotonModel {
    WaveformKind waveform_kind = WaveformKind::exponential_decay;
    double tau_rise_s = 0.0;
    double tau_decay_s = 0.0;
    double oscillation_freq_hz = 0.0;  // damped_oscillation only
    double pair_rate_hz = 0.0;
    double trigger_rate_hz = 0.0;
    double probe_rate_hz = 0.0;
    std::vector<double> tab_tau_s;      // tabulated only
    std::vector<double> tab_density;    // tabulated only
    SourceSettings settings;

    // derived caches filled by make_model
    double peak_g2 = 0.0;        // 1 + pair_rate * max p / (trigger_rate * probe_rate)
    double norm = 0.0;           // 1/Z of the declared family
    double pdf_peak_value = 0.0; // max_tau p(tau), after normalization
    double pdf_peak_tau_s = 0.0;
};

// Validates fields, normalizes the waveform and fills the derived caches.
// Throws schema_error on non-positive tau_decay, rate ordering violations
// (pair_rate must not exceed either singles rate) or a degenerate waveform.
BiphotonModel make_model(BiphotonModel m);

// Temporal density of the trigger-probe delay, 1/seconds; zero for tau < 0.
double waveform_pdf(const BiphotonModel& m, double tau_s);

// Normalized cross-correlation between the trigger and probe channels:
//   g2(tau) = 1 + pair_rate * p(tau) / (trigger_rate * probe_rate).
// Equals 1 for uncorrelated channels, peaks at model.peak_g2.
double eval_cross_correlation(const BiphotonModel& m, double tau_s);

// Conditional (heralded) autocorrelation implied by a cross-correlation
// value g for a thermal-statistics pair source: (4g - 2) / g^2.
// Decreasing in g for g >= 2; approaches 2 (thermal) at g = 1 and 0 as
// g grows. Throws schema_error for g < 1.
double eval_conditional_autocorr(double g2_cross);

// FWHM of the waveform's power spectrum |FT(sqrt(p))|^2, in hertz.
// Convention (fixed, documented): amplitude sampled on 2^16 points covering
// [0, 64 * tau_decay] (tabulated waveforms: their own span), transform by
// FFT, half-maximum crossings located by linear interpolation.
// Throws schema_error for tabulated input with fewer than 16 samples and
// runtime_fault when the grid cannot resolve the width.
double waveform_spectrum_fwhm(const BiphotonModel& m);

// Power spectrum table of the waveform amplitude on the convention above:
// frequencies (hertz, nonnegative side) and density normalized to unit area
// over the full symmetric axis. Used as a conversion-channel input.
void waveform_power_spectrum(const BiphotonModel& m,
                             std::vector<double>& freq_hz,
                             std::vector<double>& density);

// (pair_rate/probe_rate, pair_rate/trigger_rate); each in (0, 1].
// Throws schema_error if a rate is zero.
std::pair<double, double> pairing_ratios(const BiphotonModel& m);

// Delay beyond which the waveform density is negligible (< 1e-15 of peak);
// simulation and quadrature grids stop here.
double waveform_support_cutoff(const BiphotonModel& m);

}  // namespace bpl
