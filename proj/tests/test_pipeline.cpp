#include <sys/wait.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "bpl/config.hpp"
#include "bpl/errors.hpp"
#include "bpl/pipeline.hpp"
#include "bpl/purity.hpp"
#include "bpl/ttag_io.hpp"
#include "doctest.h"

using namespace bpl;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string temp_dir(const char* name) {
    fs::path p = fs::path("/tmp") / (std::string("bpl_pipe_test_") + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    return std::string(std::istreambuf_iterator<char>(f), {});
}

void spit(const std::string& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start < text.size()) {
        size_t nl = text.find('\n', start);
        if (nl == std::string::npos) nl = text.size();
        out.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return out;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t c = line.find(',', start);
        if (c == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, c - start));
        start = c + 1;
    }
}

std::vector<std::string> sim_files(const std::string& dir) {
    return {dir + "/trigger.ttag", dir + "/probe_1.ttag", dir + "/probe_2.ttag"};
}

// restores (or clears) one environment variable when leaving scope
struct EnvGuard {
    std::string key;
    std::optional<std::string> old;
    explicit EnvGuard(const char* k) : key(k) {
        if (const char* v = std::getenv(k)) old = v;
    }
    ~EnvGuard() {
        if (old)
            setenv(key.c_str(), old->c_str(), 1);
        else
            unsetenv(key.c_str());
    }
};

int run_cli(const std::string& args) {
    REQUIRE(fs::exists("biphoton-lab"));  // tests run from the build directory
    const std::string cmd = "./biphoton-lab " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

// small thermal configuration used for the efficiency-folding comparison
PipelineConfig thermal_config(bool folded) {
    PipelineConfig c;
    c.source.waveform = WaveformKind::exponential_decay;
    c.source.tau_decay_s = 2e-8;
    c.source.pair_rate_hz = 8e4;
    c.source.trigger_rate_hz = 2e5;
    c.source.probe_rate_hz = 2e5;
    c.source.statistics = SourceStatistics::thermal;
    c.fiber_delay_s = 5e-8;
    c.det_trigger.efficiency = 0.5;
    c.det_probe_1.efficiency = 0.4;
    c.det_probe_2.efficiency = 0.4;
    c.duration_s = 6.0;
    c.seed = 77;
    c.fold_efficiencies = folded;
    c.binning = BinningSpec{-2e-7, 2e-7, 1e-9};
    c.herald_window_s = 4e-8;
    c.output_dir = "/tmp/bpl_pipe_test_unused";
    return c;
}

}  // namespace

TEST_CASE("thread cap follows the environment override") {
    EnvGuard guard("BIPHOTON_LAB_THREADS");

    setenv("BIPHOTON_LAB_THREADS", "3", 1);
    CHECK(thread_cap() == 3);
    setenv("BIPHOTON_LAB_THREADS", "1", 1);
    CHECK(thread_cap() == 1);

    for (const char* bad : {"0", "-2", "abc", "2x", ""}) {
        setenv("BIPHOTON_LAB_THREADS", bad, 1);
        CHECK_THROWS_AS(thread_cap(), schema_error);
    }

    unsetenv("BIPHOTON_LAB_THREADS");
    CHECK(thread_cap() >= 1);
}

TEST_CASE("error categories map onto the documented exit codes") {
    CHECK(exit_code_for(schema_error("x")) == 1);
    CHECK(exit_code_for(format_error("x")) == 2);
    CHECK(exit_code_for(runtime_fault("x")) == 3);
}

TEST_CASE("simulation output is reproducible from the manifest alone") {
    PipelineConfig cfg = preset_config("fig2-source");
    cfg.duration_s = 0.1;
    cfg.seed = 424242;

    const std::string dir_a = temp_dir("repro_a");
    const std::string dir_b = temp_dir("repro_b");
    const std::string dir_c = temp_dir("repro_c");

    cfg.output_dir = dir_a;
    json manifest = cmd_simulate(cfg);
    cfg.output_dir = dir_b;
    cmd_simulate(cfg);

    for (const char* f : {"trigger.ttag", "probe_1.ttag", "probe_2.ttag"}) {
        INFO(f);
        CHECK(slurp(dir_a + "/" + f) == slurp(dir_b + "/" + f));
    }
    {
        // the manifests may differ only in where they point
        json ma = json::parse(slurp(dir_a + "/manifest.json"));
        json mb = json::parse(slurp(dir_b + "/manifest.json"));
        for (json* m : {&ma, &mb}) {
            m->at("config").erase("output_dir");
            m->erase("config_hash");
        }
        CHECK(ma == mb);
    }

    // a third run configured purely from the stored manifest matches too
    PipelineConfig replay = parse_config(manifest.at("config"));
    CHECK(config_hash(replay) == manifest.at("config_hash").get<std::string>());
    replay.output_dir = dir_c;
    cmd_simulate(replay);
    for (const char* f : {"trigger.ttag", "probe_1.ttag", "probe_2.ttag"})
        CHECK(slurp(dir_a + "/" + f) == slurp(dir_c + "/" + f));

    // manifest counts describe the actual files
    auto trig = read_ttag(dir_a + "/trigger.ttag");
    REQUIRE(trig.size() == 1);
    CHECK(manifest.at("counts").at("trigger").get<uint64_t>() == trig[0].size());

    const double expected = cfg.source.trigger_rate_hz * cfg.duration_s;
    CHECK(std::abs(static_cast<double>(trig[0].size()) - expected) <
          5.0 * std::sqrt(expected));

    CHECK(manifest.at("format") == "biphoton-lab-manifest");
    CHECK(manifest.at("duration_s").get<double>() == 0.1);
    CHECK(manifest.at("dropped").contains("fiber_delay_late"));
}

TEST_CASE("pipeline validation rejects bad run setups") {
    PipelineConfig cfg = preset_config("fig2-source");

    SUBCASE("zero duration cannot be simulated") {
        cfg.duration_s = 0.0;
        CHECK_THROWS_AS(run_pipeline(cfg), schema_error);
        CHECK_THROWS_AS(cmd_simulate(cfg), schema_error);
    }

    SUBCASE("folding requires equal probe-arm efficiencies") {
        cfg.duration_s = 0.01;
        cfg.fold_efficiencies = true;
        cfg.det_probe_1.efficiency = 0.5;
        cfg.det_probe_2.efficiency = 0.4;
        CHECK_THROWS_AS(run_pipeline(cfg), schema_error);
    }
}

TEST_CASE("folding efficiencies into the rates preserves the statistics") {
    RunInfo info_f, info_u;
    ChannelSet folded = run_pipeline(thermal_config(true), &info_f);
    ChannelSet unfolded = run_pipeline(thermal_config(false), &info_u);

    // same detected singles up to counting noise
    auto close_counts = [](uint64_t a, uint64_t b) {
        const double sigma = std::sqrt(static_cast<double>(a + b));
        return std::abs(static_cast<double>(a) - static_cast<double>(b)) <
               5.0 * sigma;
    };
    CHECK(close_counts(folded.trigger.size(), unfolded.trigger.size()));
    CHECK(close_counts(folded.probe_1.size() + folded.probe_2.size(),
                       unfolded.probe_1.size() + unfolded.probe_2.size()));

    // same correlogram peak, and both match the rate prediction: the ideal
    // peak height is invariant under moving efficiencies into the rates
    PipelineConfig ref = thermal_config(false);
    const double g_ideal = build_model(ref.source).peak_g2;
    const double w = ref.binning.bin_width_s;
    const double tau = ref.source.tau_decay_s;
    const double kappa = (tau / w) * (1.0 - std::exp(-w / tau));
    const double g_bin = 1.0 + (g_ideal - 1.0) * kappa;

    PeakStats pf, pu;
    {
        TagStream bf = merge_streams({folded.probe_1, folded.probe_2});
        TagStream bu = merge_streams({unfolded.probe_1, unfolded.probe_2});
        pf = peak_stats(cross_correlogram(folded.trigger, bf, ref.binning));
        pu = peak_stats(cross_correlogram(unfolded.trigger, bu, ref.binning));
    }
    CHECK(std::abs(pf.peak_g2 / g_bin - 1.0) < 0.08);
    CHECK(std::abs(pu.peak_g2 / g_bin - 1.0) < 0.08);
    CHECK(std::abs(pf.peak_g2 / pu.peak_g2 - 1.0) < 0.10);

    // partner tail points toward earlier delays, so the top bin sits just
    // below the fiber delay
    CHECK(pf.peak_tau_s == doctest::Approx(ref.fiber_delay_s - w / 2).epsilon(1e-6));
    CHECK(pu.peak_tau_s == doctest::Approx(ref.fiber_delay_s - w / 2).epsilon(1e-6));

    // heralded autocorrelation agrees within joint statistics
    const double htau = ref.fiber_delay_s - ref.herald_window_s / 2;
    HeraldedResult hf = heralded_autocorr(folded.trigger, folded.probe_1,
                                          folded.probe_2, htau, ref.herald_window_s);
    HeraldedResult hu = heralded_autocorr(unfolded.trigger, unfolded.probe_1,
                                          unfolded.probe_2, htau, ref.herald_window_s);
    REQUIRE_FALSE(hf.undefined);
    REQUIRE_FALSE(hu.undefined);
    const double joint = std::sqrt(hf.g_err * hf.g_err + hu.g_err * hu.g_err);
    CHECK(std::abs(hf.g_conditional - hu.g_conditional) < 4.0 * joint);

    CHECK(info_f.conversion_efficiency_used == 1.0);
    CHECK(info_u.conversion_efficiency_used == 1.0);
}

TEST_CASE("correlate command writes the artifacts and infers duration") {
    PipelineConfig cfg = preset_config("fig2-source");
    cfg.duration_s = 0.5;
    cfg.seed = 31337;
    const std::string dir = temp_dir("correlate");
    cfg.output_dir = dir;
    cmd_simulate(cfg);

    BinningSpec binning{-3e-7, 3e-7, 1e-9};
    json summary;
    CorrelogramResult r =
        cmd_correlate(sim_files(dir), binning, std::nullopt, dir, 1, &summary);

    CHECK(fs::exists(dir + "/correlogram.csv"));
    CHECK(fs::exists(dir + "/summary.json"));

    // duration came from the manifest sitting next to the tag files
    CHECK(summary.at("duration_s").get<double>() == 0.5);
    CHECK(summary.at("duration_inferred").get<bool>() == false);
    CHECK(summary.at("totals").at("singles_a").get<uint64_t>() == r.singles_a);

    // the partner runs through 100 ns of fiber, tail toward earlier delays
    REQUIRE_FALSE(summary.at("peak").is_null());
    const double peak_tau = summary.at("peak").at("peak_tau_s").get<double>();
    CHECK(peak_tau == doctest::Approx(cfg.fiber_delay_s - 0.5e-9).epsilon(1e-6));
    const double peak_g2 = summary.at("peak").at("peak_g2").get<double>();
    CHECK(peak_g2 > 10.0);
    CHECK(peak_g2 < 25.0);

    SUBCASE("thread count does not change the written bytes") {
        const std::string csv_serial = slurp(dir + "/correlogram.csv");
        const std::string dir4 = temp_dir("correlate_t4");
        cmd_correlate(sim_files(dir), binning, std::nullopt, dir4, 4);
        CHECK(slurp(dir4 + "/correlogram.csv") == csv_serial);
    }

    SUBCASE("explicit duration beats the manifest") {
        const std::string dir_d = temp_dir("correlate_dur");
        json s2;
        cmd_correlate(sim_files(dir), binning, 2.0, dir_d, 1, &s2);
        CHECK(s2.at("duration_s").get<double>() == 2.0);
        CHECK(s2.at("duration_inferred").get<bool>() == false);
    }

    SUBCASE("without a manifest the duration comes from the last tag") {
        const std::string bare = temp_dir("correlate_bare");
        fs::copy_file(dir + "/trigger.ttag", bare + "/trigger.ttag");
        fs::copy_file(dir + "/probe_1.ttag", bare + "/probe_1.ttag");
        json s2;
        cmd_correlate({bare + "/trigger.ttag", bare + "/probe_1.ttag"}, binning,
                      std::nullopt, bare, 1, &s2);
        CHECK(s2.at("duration_inferred").get<bool>() == true);
        const double d = s2.at("duration_s").get<double>();
        CHECK(d > 0.4);
        CHECK(d <= 0.5);
    }

    SUBCASE("fewer than two files is a usage error") {
        CHECK_THROWS_AS(cmd_correlate({dir + "/trigger.ttag"}, binning,
                                      std::nullopt, dir, 1),
                        schema_error);
    }

    SUBCASE("empty channels cannot produce coincidences") {
        const std::string empty_dir = temp_dir("correlate_empty");
        TagStream none;
        none.channel_id = 0;
        none.resolution_s = 1e-12;
        write_ttag(empty_dir + "/a.ttag", {none});
        write_ttag(empty_dir + "/b.ttag", {none});
        CHECK_THROWS_AS(cmd_correlate({empty_dir + "/a.ttag", empty_dir + "/b.ttag"},
                                      binning, std::nullopt, empty_dir, 1),
                        runtime_fault);
    }

    SUBCASE("disjoint tags in the scanned range is a runtime fault") {
        const std::string far_dir = temp_dir("correlate_far");
        TagStream a, b;
        a.channel_id = 0;
        b.channel_id = 1;
        a.resolution_s = b.resolution_s = 1e-12;
        a.duration_s = b.duration_s = 10.0;
        a.ticks = {1000};
        b.ticks = {5000000000000};  // 5 s away, far outside +-300 ns
        write_ttag(far_dir + "/a.ttag", {a});
        write_ttag(far_dir + "/b.ttag", {b});
        CHECK_THROWS_AS(cmd_correlate({far_dir + "/a.ttag", far_dir + "/b.ttag"},
                                      binning, 10.0, far_dir, 1),
                        runtime_fault);
    }
}

TEST_CASE("herald command reports windowed triple statistics with theory") {
    PipelineConfig cfg = preset_config("fig2-source");
    cfg.duration_s = 0.5;
    cfg.seed = 977;
    const std::string dir = temp_dir("herald");
    cfg.output_dir = dir;
    json manifest = cmd_simulate(cfg);

    const double window = cfg.herald_window_s;
    const double tau = cfg.fiber_delay_s - window / 2;
    json out = cmd_herald(sim_files(dir), tau, window, 1.0, 1.0, dir);
    CHECK(fs::exists(dir + "/herald.json"));

    CHECK(out.at("duration_s").get<double>() == 0.5);
    CHECK(out.at("duration_inferred").get<bool>() == false);
    CHECK(out.at("n_trigger").get<uint64_t>() ==
          manifest.at("counts").at("trigger").get<uint64_t>());
    REQUIRE(out.at("undefined").get<bool>() == false);

    // window-averaged cross-correlation around the fiber delay is high
    const double g_win = out.at("g_window_avg").get<double>();
    const double g_ideal = build_model(cfg.source).peak_g2;
    const double wt = window / cfg.source.tau_decay_s;
    const double kappa = (1.0 - std::exp(-wt)) / wt;
    CHECK(std::abs(g_win / (1.0 + (g_ideal - 1.0) * kappa) - 1.0) < 0.05);

    // at unit purities the inferred ideal peak is the measurement itself
    REQUIRE_FALSE(out.at("theory").is_null());
    const json& th = out.at("theory");
    CHECK(th.at("g_ideal_inferred").get<double>() == doctest::Approx(g_win).epsilon(1e-12));
    CHECK(th.at("conditional_pure").get<double>() ==
          doctest::Approx(eval_conditional_autocorr(g_win)).epsilon(1e-12));
    CHECK(th.at("conditional_noisy").get<double>() ==
          doctest::Approx(eval_conditional_autocorr(g_win)).epsilon(1e-12));

    // heralded value exists and is deep in the nonclassical range
    const double g_cond = out.at("g_conditional").get<double>();
    CHECK(g_cond > 0.0);
    CHECK(g_cond < 0.5);

    SUBCASE("herald needs exactly three channels") {
        CHECK_THROWS_AS(cmd_herald({dir + "/trigger.ttag", dir + "/probe_1.ttag"},
                                   tau, window, 1.0, 1.0, dir),
                        schema_error);
    }
    SUBCASE("missing input file") {
        CHECK_THROWS_AS(cmd_herald({dir + "/nope.ttag", dir + "/probe_1.ttag",
                                    dir + "/probe_2.ttag"},
                                   tau, window, 1.0, 1.0, dir),
                        runtime_fault);
    }
}

TEST_CASE("purity command bundles the correlation arithmetic") {
    json out = cmd_purity(18.0, 0.89, 0.54, std::nullopt, std::nullopt);
    CHECK(out.at("g_measured_predicted").get<double>() ==
          doctest::Approx(9.1702).epsilon(1e-12));
    CHECK(out.at("conditional_pure").get<double>() ==
          doctest::Approx(70.0 / 324.0).epsilon(1e-12));
    CHECK(out.at("conditional_noisy").get<double>() ==
          doctest::Approx(0.3146).epsilon(1e-4));
    CHECK_FALSE(out.contains("purity_estimated"));

    json est = cmd_purity(18.0, 0.89, 0.54, 10000.0, 1100.0);
    CHECK(est.at("purity_estimated").get<double>() == doctest::Approx(0.89).epsilon(1e-12));

    CHECK_THROWS_AS(cmd_purity(18.0, 1.2, 0.5, std::nullopt, std::nullopt),
                    schema_error);
    CHECK_THROWS_AS(cmd_purity(18.0, 0.9, 0.5, -1.0, 0.0), schema_error);
}

TEST_CASE("sweep predicts conversion efficiencies without simulating") {
    PipelineConfig cfg = preset_config("fig3-conversion");
    cfg.duration_s = 0.0;  // prediction-only rows
    const std::string dir = temp_dir("sweep_pred");

    SUBCASE("bandwidth axis accepts bare numbers and shape objects") {
        json grid = json::array();
        grid.push_back(2.5e6);
        grid.push_back(json{{"fwhm_hz", 17.4e6}, {"shape", "lorentzian"}});
        const std::string csv = cmd_sweep(cfg, SweepAxis::bandwidth, grid, dir, 1);

        auto lines = split_lines(csv);
        REQUIRE(lines.size() == 3);
        CHECK(lines[0] ==
              "index,bandwidth_hz,shape,efficiency_predicted,peak_g2,heralded_g,heralded_err");

        auto row0 = split_fields(lines[1]);
        auto row1 = split_fields(lines[2]);
        REQUIRE(row0.size() == 7);
        CHECK(row0[2] == "gaussian");  // bare numbers default to gaussian
        CHECK(row1[2] == "lorentzian");
        CHECK(std::stod(row0[3]) == doctest::Approx(0.79245).epsilon(2e-3));
        CHECK(std::stod(row1[3]) == doctest::Approx(0.550896).epsilon(2e-3));
        // measured columns stay empty without a simulation
        CHECK(row0[4].empty());
        CHECK(row0[5].empty());
        CHECK(row0[6].empty());
        CHECK(slurp(dir + "/sweep.csv") == csv);
    }

    SUBCASE("efficiency axis scales linearly with the converter peak") {
        json grid = json::array({0.3});
        const std::string csv = cmd_sweep(cfg, SweepAxis::efficiency, grid, dir, 1);
        auto lines = split_lines(csv);
        REQUIRE(lines.size() == 2);
        CHECK(lines[0] ==
              "index,peak_efficiency,efficiency_predicted,peak_g2,heralded_g,heralded_err");
        const double base = conversion_efficiency(cfg.conversion->channel,
                                                  *cfg.conversion->source_spectrum);
        const double got = std::stod(split_fields(lines[1])[2]);
        CHECK(got == doctest::Approx(base * 0.3 / cfg.conversion->channel.peak_efficiency)
                         .epsilon(1e-9));
    }

    SUBCASE("purity axis predicts the degraded peak") {
        json grid = json::array();
        grid.push_back(json{{"p_trigger", 1.0}, {"p_partner", 1.0}});
        grid.push_back(json{{"p_trigger", 0.89}, {"p_partner", 0.54}});
        const std::string csv = cmd_sweep(cfg, SweepAxis::purity, grid, dir, 1);
        auto lines = split_lines(csv);
        REQUIRE(lines.size() == 3);
        const double g_ideal = build_model(cfg.source).peak_g2;
        CHECK(std::stod(split_fields(lines[1])[3]) ==
              doctest::Approx(g_ideal).epsilon(1e-12));
        CHECK(std::stod(split_fields(lines[2])[3]) ==
              doctest::Approx(apply_purity_cross(g_ideal, PurityParams{0.89, 0.54}))
                  .epsilon(1e-12));
    }

    SUBCASE("empty grid leaves only the header") {
        const std::string csv = cmd_sweep(cfg, SweepAxis::purity, json::array(), dir, 1);
        CHECK(csv ==
              "index,p_trigger,p_partner,peak_g2_predicted,efficiency_predicted,"
              "peak_g2,heralded_g,heralded_err\n");
    }

    SUBCASE("axis and grid validation") {
        CHECK_THROWS_AS(sweep_axis_from_string("frequency"), schema_error);
        CHECK(sweep_axis_from_string("bandwidth") == SweepAxis::bandwidth);
        CHECK_THROWS_AS(cmd_sweep(cfg, SweepAxis::bandwidth, json{{"a", 1}}, dir, 1),
                        schema_error);
        CHECK_THROWS_AS(
            cmd_sweep(cfg, SweepAxis::bandwidth, json::array({json::array()}), dir, 1),
            schema_error);
        CHECK_THROWS_AS(
            cmd_sweep(cfg, SweepAxis::purity, json::array({json{{"p_trigger", 0.9}}}),
                      dir, 1),
            schema_error);
        json bad_shape = json::array({json{{"fwhm_hz", 1e6}, {"shape", "boxcar"}}});
        CHECK_THROWS_AS(cmd_sweep(cfg, SweepAxis::bandwidth, bad_shape, dir, 1),
                        schema_error);

        PipelineConfig no_conv = preset_config("fig2-source");
        no_conv.duration_s = 0.0;
        CHECK_THROWS_AS(
            cmd_sweep(no_conv, SweepAxis::bandwidth, json::array({1e6}), dir, 1),
            schema_error);
    }
}

TEST_CASE("sweep simulation rows land on the predicted degraded peaks") {
    PipelineConfig cfg = preset_config("fig2-source");
    cfg.duration_s = 3.0;
    cfg.seed = 20260815;
    const std::string dir = temp_dir("sweep_sim");

    json grid = json::array();
    grid.push_back(json{{"p_trigger", 1.0}, {"p_partner", 1.0}});
    grid.push_back(json{{"p_trigger", 0.89}, {"p_partner", 0.54}});
    const std::string csv = cmd_sweep(cfg, SweepAxis::purity, grid, dir, 1);

    auto lines = split_lines(csv);
    REQUIRE(lines.size() == 3);
    for (size_t i = 1; i < lines.size(); ++i) {
        auto row = split_fields(lines[i]);
        REQUIRE(row.size() == 8);
        const double predicted = std::stod(row[3]);
        const double measured = std::stod(row[5]);
        INFO("row " << i << ": predicted " << predicted << " measured " << measured);
        CHECK(std::abs(measured / predicted - 1.0) < 0.08);
        // heralded column is populated and nonclassical
        const double heralded = std::stod(row[6]);
        const double herr = std::stod(row[7]);
        CHECK(heralded > 0.0);
        CHECK(heralded < 0.6);
        CHECK(herr > 0.0);
    }

    SUBCASE("rows are deterministic in the master seed") {
        PipelineConfig small = cfg;
        small.duration_s = 0.25;
        json g1 = json::array({json{{"p_trigger", 0.89}, {"p_partner", 0.54}}});
        const std::string d2 = temp_dir("sweep_det");
        const std::string first = cmd_sweep(small, SweepAxis::purity, g1, d2, 1);
        const std::string second = cmd_sweep(small, SweepAxis::purity, g1, d2, 1);
        CHECK(first == second);
    }
}

TEST_CASE("report consolidates the artifacts present in a directory") {
    PipelineConfig cfg = preset_config("fig2-source");
    cfg.duration_s = 0.25;
    cfg.seed = 5150;
    const std::string dir = temp_dir("report");
    cfg.output_dir = dir;
    cmd_simulate(cfg);
    cmd_correlate(sim_files(dir), BinningSpec{-3e-7, 3e-7, 1e-9}, std::nullopt, dir, 1);
    cmd_herald(sim_files(dir), cfg.fiber_delay_s - cfg.herald_window_s / 2,
               cfg.herald_window_s, 1.0, 1.0, dir);

    PipelineConfig conv = preset_config("fig3-conversion");
    conv.duration_s = 0.0;
    cmd_sweep(conv, SweepAxis::bandwidth, json::array({2.5e6, 17.4e6}), dir, 1);

    std::string text;
    json report = cmd_report(dir, "json", &text);
    CHECK(fs::exists(dir + "/report.json"));
    CHECK_FALSE(report.at("manifest").is_null());
    CHECK_FALSE(report.at("correlate").is_null());
    CHECK_FALSE(report.at("herald").is_null());
    CHECK(report.at("sweep_points").get<int>() == 2);
    CHECK(text.find("counts") != std::string::npos);
    CHECK(text.find("peak") != std::string::npos);

    cmd_report(dir, "csv");
    const std::string csv = slurp(dir + "/report.csv");
    CHECK(csv.rfind("key,value\n", 0) == 0);
    CHECK(csv.find("peak_g2,") != std::string::npos);
    CHECK(csv.find("heralded_g,") != std::string::npos);

    SUBCASE("an empty directory still reports, with null sections") {
        const std::string bare = temp_dir("report_bare");
        json r = cmd_report(bare, "json");
        CHECK(r.at("manifest").is_null());
        CHECK(r.at("sweep_points").get<int>() == 0);
    }
    SUBCASE("bad format and missing directory") {
        CHECK_THROWS_AS(cmd_report(dir, "xml"), schema_error);
        CHECK_THROWS_AS(cmd_report("/tmp/bpl_pipe_test_does_not_exist", "json"),
                        runtime_fault);
    }
}

TEST_CASE("command line binary returns the documented exit codes") {
    const std::string dir = temp_dir("cli");
    PipelineConfig cfg = preset_config("fig2-source");
    cfg.duration_s = 0.02;
    cfg.seed = 8;
    cfg.output_dir = dir;
    cmd_simulate(cfg);

    // success
    CHECK(run_cli("purity --g-ideal 18 --p-trigger 0.89 --p-partner 0.54") == 0);
    CHECK(run_cli("correlate " + dir + "/trigger.ttag " + dir + "/probe_1.ttag" +
                  " --out " + dir) == 0);
    CHECK(run_cli("report " + dir + " --format csv") == 0);

    // usage and schema problems
    CHECK(run_cli("purity --g-ideal 18 --bogus-flag 1") == 1);
    CHECK(run_cli("purity") == 1);  // missing required option
    CHECK(run_cli("simulate --preset no-such-preset --out " + dir) == 1);
    CHECK(run_cli("sweep --preset fig2-source --axis purity --grid '[broken'") == 1);
    {
        // a config that parses fine but cannot be simulated
        PipelineConfig zero = cfg;
        zero.duration_s = 0.0;
        spit(dir + "/zero.json", serialize_config(zero).dump(2));
        CHECK(run_cli("simulate --config " + dir + "/zero.json") == 1);
    }
    {
        const std::string cmd = "BIPHOTON_LAB_THREADS=potato ./biphoton-lab correlate " +
                                dir + "/trigger.ttag " + dir + "/probe_1.ttag --out " +
                                dir + " > /dev/null 2>&1";
        int status = std::system(cmd.c_str());
        REQUIRE(status != -1);
        CHECK(WEXITSTATUS(status) == 1);
    }

    // malformed data files
    spit(dir + "/garbage.ttag", "this is not a tag file");
    CHECK(run_cli("correlate " + dir + "/garbage.ttag " + dir + "/garbage.ttag" +
                  " --out " + dir) == 2);

    // runtime problems: missing inputs
    CHECK(run_cli("simulate --config " + dir + "/missing.json") == 3);
    CHECK(run_cli("report /tmp/bpl_pipe_test_no_such_dir") == 3);
}
