#include "bpl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "bpl/errors.hpp"
#include "bpl/purity.hpp"
#include "bpl/rng.hpp"
#include "bpl/ttag_io.hpp"

namespace fs = std::filesystem;

namespace bpl {

namespace {

using nlohmann::json;

// spectrum the conversion overlap runs against: the configured one, or the
// source waveform's own power spectrum mirrored onto the full axis
SpectralDensity resolve_spectrum(const PipelineConfig& cfg, const BiphotonModel& model) {
    if (cfg.conversion->source_spectrum) return *cfg.conversion->source_spectrum;
    std::vector<double> f, d;
    waveform_power_spectrum(model, f, d);
    std::vector<double> f2, d2;
    f2.reserve(2 * f.size());
    d2.reserve(2 * d.size());
    for (size_t i = f.size(); i-- > 1;) {
        f2.push_back(-f[i]);
        d2.push_back(d[i]);
    }
    for (size_t i = 0; i < f.size(); ++i) {
        f2.push_back(f[i]);
        d2.push_back(d[i]);
    }
    return SpectralDensity::tabulated(std::move(f2), std::move(d2));
}

double arm_mean_efficiency(const PipelineConfig& cfg) {
    return 0.5 * (cfg.det_probe_1.efficiency + cfg.det_probe_2.efficiency);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw runtime_fault("cannot open '" + path + "' for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw runtime_fault("short write to '" + path + "'");
}

json load_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw runtime_fault("cannot open '" + path + "'");
    json j;
    try {
        f >> j;
    } catch (const json::parse_error& e) {
        throw format_error("'" + path + "' is not valid JSON: " + e.what());
    }
    return j;
}

// all channels of the given files, in file order
std::vector<TagStream> load_streams(const std::vector<std::string>& files) {
    std::vector<TagStream> all;
    for (const auto& path : files) {
        auto streams = read_ttag(path);
        for (auto& s : streams) all.push_back(std::move(s));
    }
    return all;
}

// --duration flag beats the manifest next to the first file, which beats
// inference from the last tag
double resolve_duration(const std::vector<std::string>& files,
                        std::optional<double> duration_s,
                        std::vector<TagStream>& streams, bool* inferred) {
    *inferred = false;
    if (duration_s) return *duration_s;
    if (!files.empty()) {
        fs::path manifest = fs::path(files.front()).parent_path() / "manifest.json";
        std::error_code ec;
        if (fs::exists(manifest, ec)) {
            json m = load_json_file(manifest.string());
            if (m.contains("duration_s") && m.at("duration_s").is_number())
                return m.at("duration_s").get<double>();
        }
    }
    double last = 0.0;
    for (const auto& s : streams)
        if (!s.ticks.empty())
            last = std::max(last, static_cast<double>(s.ticks.back()) * s.resolution_s);
    *inferred = true;
    return last;
}

double default_herald_tau(const PipelineConfig& cfg) {
    double delay = cfg.fiber_delay_s;
    if (cfg.conversion) delay += cfg.conversion->channel.group_delay_s;
    return delay - cfg.herald_window_s / 2.0;
}

// window-averaged cross-correlation over exactly the heralding tick window:
// a single histogram bin spanning [tau-w/2, tau+w/2] inclusive
CorrelogramResult window_average_g2(const TagStream& trigger, const TagStream& probes,
                                    double tau_s, double window_s) {
    const double res = trigger.resolution_s;
    const auto off = static_cast<int64_t>(std::nearbyint(tau_s / res));
    const auto half = static_cast<int64_t>(std::nearbyint(window_s / (2.0 * res)));
    BinningSpec one_bin;
    one_bin.tau_min_s = static_cast<double>(off - half) * res;
    one_bin.tau_max_s = static_cast<double>(off + half + 1) * res;
    one_bin.bin_width_s = one_bin.tau_max_s - one_bin.tau_min_s;
    return cross_correlogram(trigger, probes, one_bin);
}

json heralded_to_json(const HeraldedResult& h) {
    json j;
    j["tau_s"] = h.tau_s;
    j["window_s"] = h.window_s;
    j["n_trigger"] = h.n_trigger;
    j["n_tp1"] = h.n_tp1;
    j["n_tp2"] = h.n_tp2;
    j["n_triple"] = h.n_triple;
    j["undefined"] = h.undefined;
    if (h.undefined) {
        j["g_conditional"] = nullptr;
        j["g_err"] = nullptr;
    } else {
        j["g_conditional"] = h.g_conditional;
        j["g_err"] = h.g_err;
    }
    return j;
}

}  // namespace

unsigned thread_cap() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("BIPHOTON_LAB_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw schema_error("BIPHOTON_LAB_THREADS must be a positive integer");
        return static_cast<unsigned>(v);
    }
    return hw;
}

ChannelSet run_pipeline(const PipelineConfig& cfg, RunInfo* info) {
    if (!(cfg.duration_s > 0.0))
        throw schema_error("config.duration_s: must be positive to simulate");

    BiphotonModel model = build_model(cfg.source);
    double conv_eff = 1.0;
    if (cfg.conversion)
        conv_eff = conversion_efficiency(cfg.conversion->channel,
                                         resolve_spectrum(cfg, model));

    DetectorSpec det_t = cfg.det_trigger;
    DetectorSpec det_1 = cfg.det_probe_1;
    DetectorSpec det_2 = cfg.det_probe_2;
    double stream_eff = conv_eff;
    if (cfg.fold_efficiencies) {
        if (det_1.efficiency != det_2.efficiency)
            throw schema_error(
                "config.fold_efficiencies: probe arms must have equal efficiencies");
        const double e_t = det_t.efficiency;
        const double e_p = det_1.efficiency * conv_eff;
        BiphotonModel folded = model;
        folded.pair_rate_hz *= e_t * e_p;
        folded.trigger_rate_hz *= e_t;
        folded.probe_rate_hz *= e_p;
        model = make_model(std::move(folded));
        det_t.efficiency = det_1.efficiency = det_2.efficiency = 1.0;
        stream_eff = 1.0;
    }

    SourcePair src =
        simulate_source(model, cfg.duration_s, cfg.seed, cfg.source.statistics);

    DelayResult delayed = delay_stream(src.probe, cfg.fiber_delay_s);
    if (info) {
        info->fiber_dropped_early = delayed.dropped_early;
        info->fiber_dropped_late = delayed.dropped_late;
        info->conversion_efficiency_used = conv_eff;
    }
    TagStream probe = std::move(delayed.stream);
    if (cfg.conversion)
        probe = transform_stream(cfg.conversion->channel, probe, stream_eff,
                                 cfg.duration_s, cfg.seed);

    ChannelSet out;
    out.trigger = apply_detector(src.trigger, det_t, cfg.duration_s,
                                 derive_seed(cfg.seed, rng_stage::detector_trigger));
    auto arms = hbt_split(probe, derive_seed(cfg.seed, rng_stage::hbt));
    out.probe_1 = apply_detector(arms.first, det_1, cfg.duration_s,
                                 derive_seed(cfg.seed, rng_stage::detector_probe_1));
    out.probe_2 = apply_detector(arms.second, det_2, cfg.duration_s,
                                 derive_seed(cfg.seed, rng_stage::detector_probe_2));
    out.trigger.channel_id = 0;
    out.probe_1.channel_id = 1;
    out.probe_2.channel_id = 2;
    return out;
}

DetectedRates detected_rates(const PipelineConfig& cfg) {
    BiphotonModel model = build_model(cfg.source);
    double conv_eff = 1.0;
    if (cfg.conversion)
        conv_eff = conversion_efficiency(cfg.conversion->channel,
                                         resolve_spectrum(cfg, model));
    DetectedRates r;
    const double e_p = arm_mean_efficiency(cfg) * conv_eff;
    r.trigger_hz = cfg.det_trigger.efficiency * cfg.source.trigger_rate_hz;
    r.probe_hz = e_p * cfg.source.probe_rate_hz;
    r.pair_hz = cfg.det_trigger.efficiency * e_p * cfg.source.pair_rate_hz;
    return r;
}

nlohmann::json cmd_simulate(const PipelineConfig& cfg) {
    RunInfo info;
    ChannelSet ch = run_pipeline(cfg, &info);

    fs::create_directories(cfg.output_dir);
    const fs::path dir(cfg.output_dir);
    write_ttag((dir / "trigger.ttag").string(), {ch.trigger});
    write_ttag((dir / "probe_1.ttag").string(), {ch.probe_1});
    write_ttag((dir / "probe_2.ttag").string(), {ch.probe_2});

    json manifest;
    manifest["format"] = "biphoton-lab-manifest";
    manifest["version"] = 1;
    manifest["config"] = serialize_config(cfg);
    manifest["config_hash"] = config_hash(cfg);
    manifest["seed"] = cfg.seed;
    manifest["duration_s"] = cfg.duration_s;
    manifest["wall_clock_s"] = cfg.duration_s / cfg.duty_cycle;
    manifest["counts"] = json{{"trigger", ch.trigger.size()},
                              {"probe_1", ch.probe_1.size()},
                              {"probe_2", ch.probe_2.size()}};
    manifest["dropped"] = json{{"fiber_delay_early", info.fiber_dropped_early},
                               {"fiber_delay_late", info.fiber_dropped_late}};
    if (cfg.conversion)
        manifest["conversion"] =
            json{{"efficiency_used", info.conversion_efficiency_used}};
    manifest["files"] = json{{"trigger", "trigger.ttag"},
                             {"probe_1", "probe_1.ttag"},
                             {"probe_2", "probe_2.ttag"}};
    write_text_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
    return manifest;
}

CorrelogramResult cmd_correlate(const std::vector<std::string>& files,
                                const BinningSpec& binning,
                                std::optional<double> duration_s,
                                const std::string& out_dir, unsigned n_threads,
                                nlohmann::json* summary_out) {
    if (files.size() < 2)
        throw schema_error("correlate: need at least two tag files");
    std::vector<TagStream> streams = load_streams(files);
    if (streams.size() < 2) {
        // channels with no tags leave no records behind, so with two or more
        // input files the only way to land here is empty input channels
        throw runtime_fault("correlate: no coincidences (input channels are empty)");
    }

    bool inferred = false;
    const double duration = resolve_duration(files, duration_s, streams, &inferred);
    if (!(duration > 0.0))
        throw runtime_fault("correlate: no coincidences (empty streams, zero duration)");
    for (auto& s : streams) s.duration_s = duration;

    const TagStream& a = streams.front();
    TagStream b;
    if (streams.size() == 2)
        b = streams[1];
    else
        b = merge_streams(std::vector<TagStream>(streams.begin() + 1, streams.end()));

    CorrelogramResult r = cross_correlogram(a, b, binning, n_threads);
    uint64_t total = 0;
    for (uint64_t c : r.counts) total += c;
    if (total == 0)
        throw runtime_fault("correlate: no coincidences in the requested delay range");

    json summary;
    summary["binning"] = json{{"tau_min_s", binning.tau_min_s},
                              {"tau_max_s", binning.tau_max_s},
                              {"bin_width_s", binning.bin_width_s}};
    summary["duration_s"] = duration;
    summary["duration_inferred"] = inferred;
    summary["totals"] = json{{"singles_a", r.singles_a},
                             {"singles_b", r.singles_b},
                             {"coincidences", total}};
    try {
        PeakStats p = peak_stats(r);
        summary["peak"] = json{{"peak_g2", p.peak_g2},
                               {"peak_tau_s", p.peak_tau_s},
                               {"fwhm_s", p.fwhm_s},
                               {"baseline_mean", p.baseline_mean},
                               {"baseline_sigma", p.baseline_sigma}};
    } catch (const runtime_fault& e) {
        summary["peak"] = nullptr;
        summary["peak_error"] = e.what();
    }

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    write_correlogram_csv((dir / "correlogram.csv").string(), r);
    write_text_file((dir / "summary.json").string(), summary.dump(2) + "\n");
    if (summary_out) *summary_out = std::move(summary);
    return r;
}

nlohmann::json cmd_herald(const std::vector<std::string>& files, double tau_s,
                          double window_s, double p_trigger, double p_partner,
                          const std::string& out_dir) {
    std::vector<TagStream> streams = load_streams(files);
    if (streams.size() != 3)
        throw schema_error("herald: need exactly three channels (trigger, two arms), got " +
                           std::to_string(streams.size()));
    bool inferred = false;
    const double duration = resolve_duration(files, std::nullopt, streams, &inferred);
    if (!(duration > 0.0))
        throw runtime_fault("herald: empty channels, nothing to correlate");
    for (auto& s : streams) s.duration_s = duration;
    const TagStream& trigger = streams[0];
    const TagStream& p1 = streams[1];
    const TagStream& p2 = streams[2];

    HeraldedResult h = heralded_autocorr(trigger, p1, p2, tau_s, window_s);
    json out = heralded_to_json(h);
    out["duration_s"] = duration;
    out["duration_inferred"] = inferred;

    TagStream probes = merge_streams({p1, p2});
    CorrelogramResult w = window_average_g2(trigger, probes, tau_s, window_s);
    out["g_window_avg"] = w.g2[0];
    out["g_window_avg_err"] = w.g2_err[0];

    json theory = nullptr;
    if (w.g2[0] > 1.0) {
        PurityParams purity{p_trigger, p_partner};
        const double g_ideal = invert_purity_cross(w.g2[0], purity);
        theory = json{{"p_trigger", p_trigger},
                      {"p_partner", p_partner},
                      {"g_ideal_inferred", g_ideal},
                      {"conditional_pure", eval_conditional_autocorr(g_ideal)},
                      {"conditional_noisy", apply_purity_conditional(g_ideal, purity)}};
    }
    out["theory"] = std::move(theory);

    fs::create_directories(out_dir);
    write_text_file((fs::path(out_dir) / "herald.json").string(), out.dump(2) + "\n");
    return out;
}

SweepAxis sweep_axis_from_string(const std::string& s) {
    if (s == "bandwidth") return SweepAxis::bandwidth;
    if (s == "purity") return SweepAxis::purity;
    if (s == "efficiency") return SweepAxis::efficiency;
    throw schema_error("sweep: unknown axis '" + s +
                       "' (expected bandwidth, purity or efficiency)");
}

std::string cmd_sweep(const PipelineConfig& cfg, SweepAxis axis,
                      const nlohmann::json& grid, const std::string& out_dir,
                      unsigned n_threads) {
    if (!grid.is_array())
        throw schema_error("sweep: grid must be a JSON array");
    if ((axis == SweepAxis::bandwidth || axis == SweepAxis::efficiency) &&
        !cfg.conversion)
        throw schema_error("sweep: this axis varies the conversion channel, "
                           "but the config has none");

    std::string csv;
    switch (axis) {
        case SweepAxis::bandwidth:
            csv = "index,bandwidth_hz,shape,efficiency_predicted";
            break;
        case SweepAxis::purity:
            csv = "index,p_trigger,p_partner,peak_g2_predicted,efficiency_predicted";
            break;
        case SweepAxis::efficiency:
            csv = "index,peak_efficiency,efficiency_predicted";
            break;
    }
    csv += ",peak_g2,heralded_g,heralded_err\n";

    const bool simulate = cfg.duration_s > 0.0;
    for (size_t i = 0; i < grid.size(); ++i) {
        const json& entry = grid[i];
        PipelineConfig pc = cfg;
        pc.seed = derive_seed(cfg.seed, rng_stage::sweep_point, i);

        double predicted_eff = 1.0;
        std::string lead;
        if (axis == SweepAxis::bandwidth) {
            SpectralDensity sp;
            if (entry.is_number()) {
                sp = SpectralDensity::gaussian(entry.get<double>());
            } else if (entry.is_object()) {
                if (!entry.contains("fwhm_hz") || !entry.at("fwhm_hz").is_number())
                    throw schema_error("sweep: grid[" + std::to_string(i) +
                                       "] needs a numeric fwhm_hz");
                const double fwhm = entry.at("fwhm_hz").get<double>();
                std::string shape = entry.value("shape", std::string("gaussian"));
                if (shape == "gaussian")
                    sp = SpectralDensity::gaussian(fwhm);
                else if (shape == "lorentzian")
                    sp = SpectralDensity::lorentzian(fwhm);
                else
                    throw schema_error("sweep: grid[" + std::to_string(i) +
                                       "]: unknown shape '" + shape + "'");
            } else {
                throw schema_error("sweep: grid[" + std::to_string(i) +
                                   "] must be a number or {fwhm_hz, shape}");
            }
            pc.conversion->source_spectrum = sp;
            predicted_eff = conversion_efficiency(pc.conversion->channel, sp);
            lead = format_double(sp.fwhm_hz) + "," +
                   (sp.shape == SpectralDensity::Shape::gaussian ? "gaussian"
                                                                 : "lorentzian");
        } else if (axis == SweepAxis::purity) {
            if (!entry.is_object() || !entry.contains("p_trigger") ||
                !entry.contains("p_partner"))
                throw schema_error("sweep: grid[" + std::to_string(i) +
                                   "] must be {p_trigger, p_partner}");
            PurityParams purity{entry.at("p_trigger").get<double>(),
                                entry.at("p_partner").get<double>()};
            validate(purity);
            DetectedRates dr = detected_rates(pc);
            pc.det_trigger.dark_rate_hz +=
                dr.trigger_hz * (1.0 - purity.p_trigger) / purity.p_trigger;
            const double arm_noise =
                0.5 * dr.probe_hz * (1.0 - purity.p_partner) / purity.p_partner;
            pc.det_probe_1.dark_rate_hz += arm_noise;
            pc.det_probe_2.dark_rate_hz += arm_noise;
            const double peak_pred =
                apply_purity_cross(build_model(pc.source).peak_g2, purity);
            if (pc.conversion)
                predicted_eff = conversion_efficiency(
                    pc.conversion->channel, resolve_spectrum(pc, build_model(pc.source)));
            lead = format_double(purity.p_trigger) + "," +
                   format_double(purity.p_partner) + "," + format_double(peak_pred);
        } else {
            if (!entry.is_number())
                throw schema_error("sweep: grid[" + std::to_string(i) +
                                   "] must be a number");
            pc.conversion->channel.peak_efficiency = entry.get<double>();
            validate(pc.conversion->channel);
            predicted_eff = conversion_efficiency(
                pc.conversion->channel, resolve_spectrum(pc, build_model(pc.source)));
            lead = format_double(entry.get<double>());
        }

        csv += std::to_string(i) + "," + lead + "," + format_double(predicted_eff);

        if (simulate) {
            ChannelSet ch = run_pipeline(pc);
            TagStream probes = merge_streams({ch.probe_1, ch.probe_2});
            CorrelogramResult r =
                cross_correlogram(ch.trigger, probes, pc.binning, n_threads);
            std::string peak_col, herald_col, herald_err_col;
            try {
                peak_col = format_double(peak_stats(r).peak_g2);
            } catch (const runtime_fault&) {
                // flat histogram: leave the column empty rather than fail the row
            }
            if (pc.herald_window_s > 0.0) {
                HeraldedResult h =
                    heralded_autocorr(ch.trigger, ch.probe_1, ch.probe_2,
                                      default_herald_tau(pc), pc.herald_window_s);
                if (!h.undefined) {
                    herald_col = format_double(h.g_conditional);
                    herald_err_col = format_double(h.g_err);
                }
            }
            csv += "," + peak_col + "," + herald_col + "," + herald_err_col;
        } else {
            csv += ",,,";
        }
        csv += "\n";
    }

    fs::create_directories(out_dir);
    write_text_file((fs::path(out_dir) / "sweep.csv").string(), csv);
    return csv;
}

nlohmann::json cmd_purity(double g_ideal, double p_trigger, double p_partner,
                          std::optional<double> total_counts,
                          std::optional<double> background_counts) {
    PurityParams purity{p_trigger, p_partner};
    validate(purity);
    json out;
    out["g_ideal"] = g_ideal;
    out["p_trigger"] = p_trigger;
    out["p_partner"] = p_partner;
    out["g_measured_predicted"] = apply_purity_cross(g_ideal, purity);
    out["conditional_pure"] = eval_conditional_autocorr(g_ideal);
    out["conditional_noisy"] = apply_purity_conditional(g_ideal, purity);
    if (total_counts && background_counts) {
        if (*total_counts < 0.0 || *background_counts < 0.0)
            throw schema_error("purity: counts must be nonnegative");
        out["purity_estimated"] =
            estimate_purity(static_cast<uint64_t>(std::llround(*total_counts)),
                            static_cast<uint64_t>(std::llround(*background_counts)));
    }
    return out;
}

nlohmann::json cmd_report(const std::string& dir, const std::string& format,
                          std::string* text_out) {
    if (format != "json" && format != "csv")
        throw schema_error("report: format must be 'json' or 'csv'");
    const fs::path d(dir);
    std::error_code ec;
    if (!fs::is_directory(d, ec))
        throw runtime_fault("report: '" + dir + "' is not a directory");

    json report;
    report["directory"] = dir;
    std::string text = "biphoton-lab report: " + dir + "\n";
    std::vector<std::pair<std::string, std::string>> rows;
    rows.emplace_back("directory", dir);

    auto maybe = [&](const char* name) -> json {
        const fs::path p = d / name;
        std::error_code e2;
        if (!fs::exists(p, e2)) return nullptr;
        return load_json_file(p.string());
    };

    json manifest = maybe("manifest.json");
    report["manifest"] = manifest;
    if (!manifest.is_null()) {
        const std::string hash = manifest.value("config_hash", std::string("?"));
        const auto seed = manifest.value("seed", 0ull);
        const double dur = manifest.value("duration_s", 0.0);
        text += "  run " + hash + ", seed " + std::to_string(seed) + ", duration " +
                format_double(dur) + " s\n";
        rows.emplace_back("config_hash", hash);
        rows.emplace_back("seed", std::to_string(seed));
        rows.emplace_back("duration_s", format_double(dur));
        if (manifest.contains("counts")) {
            const json& c = manifest["counts"];
            text += "  counts: trigger " + std::to_string(c.value("trigger", 0ull)) +
                    ", probe_1 " + std::to_string(c.value("probe_1", 0ull)) +
                    ", probe_2 " + std::to_string(c.value("probe_2", 0ull)) + "\n";
            for (const char* k : {"trigger", "probe_1", "probe_2"})
                rows.emplace_back(std::string("counts_") + k,
                                  std::to_string(c.value(k, 0ull)));
        }
    }

    json summary = maybe("summary.json");
    report["correlate"] = summary;
    if (!summary.is_null() && summary.contains("peak") && !summary["peak"].is_null()) {
        const json& p = summary["peak"];
        text += "  correlogram peak g2 " + format_double(p.value("peak_g2", 0.0)) +
                " at " + format_double(p.value("peak_tau_s", 0.0)) + " s, FWHM " +
                format_double(p.value("fwhm_s", 0.0)) + " s\n";
        rows.emplace_back("peak_g2", format_double(p.value("peak_g2", 0.0)));
        rows.emplace_back("peak_tau_s", format_double(p.value("peak_tau_s", 0.0)));
        rows.emplace_back("fwhm_s", format_double(p.value("fwhm_s", 0.0)));
    }

    json herald = maybe("herald.json");
    report["herald"] = herald;
    if (!herald.is_null() && herald.contains("g_conditional") &&
        !herald["g_conditional"].is_null()) {
        text += "  heralded g " + format_double(herald.value("g_conditional", 0.0)) +
                " +- " + format_double(herald.value("g_err", 0.0));
        rows.emplace_back("heralded_g", format_double(herald.value("g_conditional", 0.0)));
        rows.emplace_back("heralded_err", format_double(herald.value("g_err", 0.0)));
        if (herald.contains("theory") && !herald["theory"].is_null()) {
            const double noisy = herald["theory"].value("conditional_noisy", 0.0);
            text += " (theory " + format_double(noisy) + ")";
            rows.emplace_back("heralded_theory", format_double(noisy));
        }
        text += "\n";
    }

    size_t sweep_rows = 0;
    {
        const fs::path p = d / "sweep.csv";
        std::error_code e2;
        if (fs::exists(p, e2)) {
            std::ifstream f(p);
            std::string line;
            while (std::getline(f, line))
                if (!line.empty()) ++sweep_rows;
            if (sweep_rows > 0) --sweep_rows;  // header
            text += "  sweep: " + std::to_string(sweep_rows) + " points\n";
            rows.emplace_back("sweep_points", std::to_string(sweep_rows));
        }
    }
    report["sweep_points"] = sweep_rows;

    if (format == "json") {
        write_text_file((d / "report.json").string(), report.dump(2) + "\n");
    } else {
        std::string csv = "key,value\n";
        for (const auto& [k, v] : rows) csv += k + "," + v + "\n";
        write_text_file((d / "report.csv").string(), csv);
    }
    if (text_out) *text_out = text;
    return report;
}

}  // namespace bpl
