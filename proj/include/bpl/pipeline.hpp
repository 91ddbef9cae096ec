#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bpl/config.hpp"
#include "bpl/correlator.hpp"

namespace bpl {

// Physical output channels of one simulated run (ids 0, 1, 2).
struct ChannelSet {
    TagStream trigger;
    TagStream probe_1;
    TagStream probe_2;
};

struct RunInfo {
    uint64_t fiber_dropped_early = 0;
    uint64_t fiber_dropped_late = 0;
    double conversion_efficiency_used = 1.0;  // overlap integral, 1 when unconverted
};

// Full generation chain: source, fiber delay on the partner path, optional
// frequency conversion, detectors, HBT split. Deterministic per (config,
// seed); every stochastic stage draws from its own derived seed stream.
ChannelSet run_pipeline(const PipelineConfig& cfg, RunInfo* info = nullptr);

// Genuine detected rates (trigger, probe, pair) after all efficiencies,
// darks and converter noise excluded. What Eq.-style predictions and noise
// tuning are computed from.
struct DetectedRates {
    double trigger_hz = 0.0;
    double probe_hz = 0.0;
    double pair_hz = 0.0;
};
DetectedRates detected_rates(const PipelineConfig& cfg);

// Worker-thread cap: BIPHOTON_LAB_THREADS when set, else the hardware count.
unsigned thread_cap();

// Command bodies behind the CLI subcommands. Each writes its artifacts under
// out_dir and returns the primary result for in-process callers.

// tag files plus manifest.json; returns the manifest
nlohmann::json cmd_simulate(const PipelineConfig& cfg);

// correlogram.csv plus summary.json from 2 or 3 tag files (3 files: first is
// the herald, the other two are merged as the partner side)
CorrelogramResult cmd_correlate(const std::vector<std::string>& files,
                                const BinningSpec& binning,
                                std::optional<double> duration_s,
                                const std::string& out_dir, unsigned n_threads,
                                nlohmann::json* summary_out = nullptr);

// herald.json: the windowed three-fold result plus theory columns inferred
// from the measured window-averaged cross-correlation
nlohmann::json cmd_herald(const std::vector<std::string>& files, double tau_s,
                          double window_s, double p_trigger, double p_partner,
                          const std::string& out_dir);

// sweep.csv over one axis; rows are deterministic per (seed, point index)
enum class SweepAxis { bandwidth, purity, efficiency };
SweepAxis sweep_axis_from_string(const std::string& s);
std::string cmd_sweep(const PipelineConfig& cfg, SweepAxis axis,
                      const nlohmann::json& grid, const std::string& out_dir,
                      unsigned n_threads);

// purity calculator: forward/inverse correlation arithmetic in one place
nlohmann::json cmd_purity(double g_ideal, double p_trigger, double p_partner,
                          std::optional<double> total_counts,
                          std::optional<double> background_counts);

// consolidated report over whatever artifacts out_dir contains
nlohmann::json cmd_report(const std::string& dir, const std::string& format,
                          std::string* text_out = nullptr);

}  // namespace bpl
