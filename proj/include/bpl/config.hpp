#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bpl/convchan.hpp"
#include "bpl/correlator.hpp"
#include "bpl/model.hpp"
#include "bpl/simkit.hpp"

namespace bpl {

// Everything make_model needs, in plain input form, plus the statistics mode.
struct SourceConfig {
    WaveformKind waveform = WaveformKind::exponential_decay;
    double tau_rise_s = 0.0;
    double tau_decay_s = 0.0;
    double oscillation_freq_hz = 0.0;
    double pair_rate_hz = 0.0;
    double trigger_rate_hz = 0.0;
    double probe_rate_hz = 0.0;
    SourceStatistics statistics = SourceStatistics::poisson;
    std::vector<double> tabulated_tau_s;
    std::vector<double> tabulated_density;
    SourceSettings settings;
};

struct ConversionConfig {
    ConversionChannelSpec channel;
    // spectrum the overlap integral runs against; when absent the pipeline
    // derives a tabulated spectrum from the source waveform itself
    std::optional<SpectralDensity> source_spectrum;
};

// One experiment, end to end. Parsed from JSON with unknown keys rejected;
// serialization is canonical (all keys, stable order) so parse -> serialize
// -> parse is the identity.
struct PipelineConfig {
    SourceConfig source;
    double fiber_delay_s = 0.0;
    DetectorSpec det_trigger;
    DetectorSpec det_probe_1;
    DetectorSpec det_probe_2;
    std::optional<ConversionConfig> conversion;
    double duration_s = 0.0;
    double duty_cycle = 1.0;  // scales wall-clock bookkeeping only
    uint64_t seed = 1;
    // multiply detector/conversion efficiencies into the generation rates and
    // skip the thinning stages (additive noise and delays unchanged); needs
    // equal probe-arm efficiencies
    bool fold_efficiencies = false;
    BinningSpec binning;
    double herald_window_s = 0.0;
    std::string output_dir = "out";
};

PipelineConfig parse_config(const nlohmann::json& j);
PipelineConfig parse_config_text(const std::string& text);
PipelineConfig load_config_file(const std::string& path);
nlohmann::json serialize_config(const PipelineConfig& cfg);

// "fig2-source" (unconverted source run) or "fig3-conversion" (telecom
// conversion run with noise levels tuned to the published channel purities)
PipelineConfig preset_config(const std::string& name);

BiphotonModel build_model(const SourceConfig& source);

// FNV-1a 64 over the canonical serialization, as a hex string
std::string config_hash(const PipelineConfig& cfg);

}  // namespace bpl
