// biphoton-lab: simulate a heralded photon-pair source through fiber delay,
// frequency conversion and detection, then analyze the resulting tag streams.
//
// Exit codes: 0 success, 1 usage or config schema, 2 data format, 3 runtime.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bpl/config.hpp"
#include "bpl/errors.hpp"
#include "bpl/pipeline.hpp"
#include "bpl/ttag_io.hpp"

namespace {

struct ConfigArgs {
    std::string config_path;
    std::string preset;
    std::optional<uint64_t> seed;
    std::string out_dir;
};

void add_config_options(CLI::App* cmd, ConfigArgs& a) {
    cmd->add_option("--config", a.config_path, "pipeline config JSON file");
    cmd->add_option("--preset", a.preset, "named built-in config (fig2-source, fig3-conversion)");
    cmd->add_option("--seed", a.seed, "override the config seed");
    cmd->add_option("--out", a.out_dir, "override the config output directory");
}

bpl::PipelineConfig resolve_config(const ConfigArgs& a) {
    if (a.config_path.empty() == a.preset.empty())
        throw bpl::schema_error("provide exactly one of --config or --preset");
    bpl::PipelineConfig cfg = a.config_path.empty()
                                  ? bpl::preset_config(a.preset)
                                  : bpl::load_config_file(a.config_path);
    if (a.seed) cfg.seed = *a.seed;
    if (!a.out_dir.empty()) cfg.output_dir = a.out_dir;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and correlation toolkit for heralded photon-pair sources"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "run the source pipeline and write tag files");
    ConfigArgs sim_args;
    add_config_options(sim, sim_args);

    // correlate
    auto* cor = app.add_subcommand("correlate", "histogram delays between two channels");
    std::vector<std::string> cor_files;
    double cor_tau_min = -6e-7, cor_tau_max = 6e-7, cor_bin = 1e-9;
    std::optional<double> cor_duration;
    std::string cor_out = "out";
    std::optional<unsigned> cor_threads;
    cor->add_option("files", cor_files, "TTAG files; first is one side, the rest merge into the other")
        ->required()
        ->expected(-2);
    cor->add_option("--tau-min", cor_tau_min, "left histogram edge, seconds");
    cor->add_option("--tau-max", cor_tau_max, "right histogram edge, seconds");
    cor->add_option("--bin-width", cor_bin, "bin width, seconds");
    cor->add_option("--duration", cor_duration,
                    "acquisition time, seconds (default: manifest beside the first file, else last tag)");
    cor->add_option("--out", cor_out, "output directory");
    cor->add_option("--threads", cor_threads, "worker threads (default: BIPHOTON_LAB_THREADS or hardware)");

    // herald
    auto* her = app.add_subcommand("herald", "conditional autocorrelation from trigger + two arms");
    std::vector<std::string> her_files;
    double her_tau = 0.0, her_window = 0.0;
    double her_pt = 1.0, her_pp = 1.0;
    std::string her_out = "out";
    her->add_option("files", her_files, "trigger, arm 1, arm 2 TTAG files")->required()->expected(-1);
    her->add_option("--tau", her_tau, "window center offset from the trigger, seconds")->required();
    her->add_option("--window", her_window, "coincidence window width, seconds")->required();
    her->add_option("--p-trigger", her_pt, "trigger channel purity for the theory columns");
    her->add_option("--p-partner", her_pp, "partner channel purity for the theory columns");
    her->add_option("--out", her_out, "output directory");

    // purity
    auto* pur = app.add_subcommand("purity", "purity algebra without any simulation");
    double pur_g = 0.0, pur_pt = 1.0, pur_pp = 1.0;
    std::optional<double> pur_total, pur_background;
    pur->add_option("--g-ideal", pur_g, "ideal cross-correlation peak")->required();
    pur->add_option("--p-trigger", pur_pt, "trigger channel purity");
    pur->add_option("--p-partner", pur_pp, "partner channel purity");
    pur->add_option("--total", pur_total, "total counts, for estimating a purity");
    pur->add_option("--background", pur_background, "background counts, for estimating a purity");

    // sweep
    auto* swe = app.add_subcommand("sweep", "scan one axis over a grid, one CSV row per point");
    ConfigArgs swe_args;
    add_config_options(swe, swe_args);
    std::string swe_axis;
    std::string swe_grid;
    std::optional<unsigned> swe_threads;
    swe->add_option("--axis", swe_axis, "bandwidth, purity or efficiency")->required();
    swe->add_option("--grid", swe_grid, "grid as a JSON array")->required();
    swe->add_option("--threads", swe_threads, "worker threads for per-point correlation");

    // report
    auto* rep = app.add_subcommand("report", "summarize the artifacts of a run directory");
    std::string rep_dir, rep_format = "json";
    rep->add_option("dir", rep_dir, "run directory")->required();
    rep->add_option("--format", rep_format, "json or csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) {
            bpl::PipelineConfig cfg = resolve_config(sim_args);
            nlohmann::json manifest = bpl::cmd_simulate(cfg);
            std::printf("%s\n", manifest.dump(2).c_str());
        } else if (cor->parsed()) {
            bpl::BinningSpec binning;
            binning.tau_min_s = cor_tau_min;
            binning.tau_max_s = cor_tau_max;
            binning.bin_width_s = cor_bin;
            unsigned threads = cor_threads ? *cor_threads : bpl::thread_cap();
            if (threads == 0) throw bpl::schema_error("--threads must be positive");
            nlohmann::json summary;
            bpl::cmd_correlate(cor_files, binning, cor_duration, cor_out, threads, &summary);
            std::printf("%s\n", summary.dump(2).c_str());
        } else if (her->parsed()) {
            nlohmann::json out =
                bpl::cmd_herald(her_files, her_tau, her_window, her_pt, her_pp, her_out);
            std::printf("%s\n", out.dump(2).c_str());
        } else if (pur->parsed()) {
            nlohmann::json out =
                bpl::cmd_purity(pur_g, pur_pt, pur_pp, pur_total, pur_background);
            std::printf("%s\n", out.dump(2).c_str());
        } else if (swe->parsed()) {
            bpl::PipelineConfig cfg = resolve_config(swe_args);
            nlohmann::json grid;
            try {
                grid = nlohmann::json::parse(swe_grid);
            } catch (const nlohmann::json::parse_error& e) {
                throw bpl::schema_error(std::string("sweep: --grid is not valid JSON: ") + e.what());
            }
            unsigned threads = swe_threads ? *swe_threads : bpl::thread_cap();
            if (threads == 0) throw bpl::schema_error("--threads must be positive");
            std::string csv = bpl::cmd_sweep(cfg, bpl::sweep_axis_from_string(swe_axis),
                                             grid, cfg.output_dir, threads);
            std::fputs(csv.c_str(), stdout);
        } else if (rep->parsed()) {
            std::string text;
            bpl::cmd_report(rep_dir, rep_format, &text);
            std::fputs(text.c_str(), stdout);
        }
    } catch (const bpl::error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return bpl::exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
