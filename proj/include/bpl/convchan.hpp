#pragma once

#include <cstdint>
#include <vector>

#include "bpl/errors.hpp"
#include "bpl/tagstream.hpp"

namespace bpl {

// Converter knobs that parameterize experiments but enter no computation;
// carried through configs and manifests only.
struct ConverterSettings {
    double optical_depth = 0.0;
    double omega_c = 0.0, omega_d = 0.0;          // coupling/driving Rabi, units of Gamma
    double delta_p = 0.0, delta_c = 0.0, delta_d = 0.0;
};

// Spectral acceptance model of the frequency converter plus its stream-level
// side effects (group delay, added noise). The transmission profile is a
// flat-top super-Gaussian in detuning:
//   T(d) = peak_efficiency * exp(-ln2 * |2 d / window_fwhm|^(2 * window_order))
// so window_fwhm is the full width at half maximum of the *efficiency* curve
// and window_order morphs the shape from Gaussian-like (1) to flat-top (8).
struct ConversionChannelSpec {
    double window_fwhm_hz = 40.0e6;
    double window_order = 1.0;          // >= 1
    double window_center_offset_hz = 0.0;
    double peak_efficiency = 0.794;     // in (0, 1]
    double group_delay_s = 55.0e-9;
    double added_noise_rate_hz = 0.0;
    ConverterSettings settings;
};

void validate(const ConversionChannelSpec& spec);

// Photon spectral density over detuning from the window center. Analytic
// shapes are normalized over the whole axis by construction; tabulated
// densities must come in normalized (checked to 1e-4).
struct SpectralDensity {
    enum class Shape { delta, gaussian, lorentzian, tabulated };
    Shape shape = Shape::gaussian;
    double fwhm_hz = 0.0;      // ignored for delta
    double center_hz = 0.0;    // offset of the line center from zero detuning
    std::vector<double> freq_hz;   // tabulated: sorted detunings
    std::vector<double> density;   // tabulated: values, 1/Hz

    static SpectralDensity delta(double center_hz = 0.0);
    static SpectralDensity gaussian(double fwhm_hz, double center_hz = 0.0);
    static SpectralDensity lorentzian(double fwhm_hz, double center_hz = 0.0);
    static SpectralDensity tabulated(std::vector<double> freq_hz,
                                     std::vector<double> density);
};

// Point value of the spectral density (not defined for delta).
double spectral_value(const SpectralDensity& s, double freq_hz);

// Transmission at a given detuning, in [0, peak_efficiency].
double acceptance_transmission(const ConversionChannelSpec& spec, double detuning_hz);

// Ensemble conversion efficiency: the overlap integral of the photon
// spectrum with the acceptance window. Approaches peak_efficiency for
// vanishing bandwidth at window center; decreases as the spectrum spills
// past the window. Tabulated spectra failing unit normalization are
// rejected with a schema_error.
double conversion_efficiency(const ConversionChannelSpec& spec,
                             const SpectralDensity& photon_spectrum);

// Finds a window order in [1, 8] whose overlap with broadband_spectrum hits
// broadband_target (bisection, 1e-3 tolerance; the overlap is monotone
// increasing in the order). peak_efficiency is set to narrowband_target.
// When the target lies within tolerance of an endpoint the endpoint order is
// returned; beyond that a schema_error reports the reachable bracket.
ConversionChannelSpec calibrate_window_shape(double narrowband_target,
                                             double broadband_target,
                                             const SpectralDensity& broadband_spectrum);

// Stream-level action of the converter: survival with probability
// `efficiency` per tag (spectrally ensemble-averaged thinning), shift by
// group_delay, and an independent Poisson background of converted-band
// noise at added_noise_rate. Output sorted; deterministic given seed.
// Tags shifted beyond the duration are dropped.
TagStream transform_stream(const ConversionChannelSpec& spec, const TagStream& probe_tags,
                           double efficiency, double duration_s, uint64_t seed);

}  // namespace bpl
