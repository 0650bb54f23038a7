#include "dbmd/batch.hpp"
#include "dbmd/calibrate.hpp"
#include "dbmd/config.hpp"
#include "dbmd/csv.hpp"
#include "dbmd/errors.hpp"
#include "dbmd/guarded_math.hpp"
#include "dbmd/simulate.hpp"
#include "dbmd/svg.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace {

using namespace dbmd;

std::string format_peak(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

void print_metrics(const HysteresisMetrics& m) {
    std::printf("loop_area        = %.6g\n", m.loop_area);
    std::printf("max_branch_ratio = %.6g\n", m.max_branch_ratio);
    std::printf("i_at_peak        = %.6g A\n", m.i_at_peak);
    std::printf("open_curve       = %s\n", m.open_curve ? "yes" : "no");
}

void report_saturations() {
    const auto n = saturation_count();
    if (n > 0)
        std::fprintf(stderr, "note: %llu guarded-exponent saturations during this run\n",
                     static_cast<unsigned long long>(n));
}

struct CommandIO {
    std::string out;
    std::string svg;
    double z0 = -1.0;     // < 0: take the config's value
    long samples = 0;     // 0: take the config's value
};

void add_io_options(CLI::App* cmd, CommandIO& io, const std::string& default_out) {
    cmd->add_option("--out", io.out, "Output CSV path (default: " + default_out + ")");
    cmd->add_option("--svg", io.svg, "Also write an SVG plot to this path");
    cmd->add_option("--z0", io.z0, "Initial state in [0,1] (default: from config)")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--samples", io.samples, "Output rows per run (default: from config)")
        ->check(CLI::Range(2L, 100000000L));
}

void apply_io(const CommandIO& io, RunConfig& cfg, const std::string& default_out) {
    if (!io.out.empty())
        cfg.out_csv = io.out;
    else if (cfg.out_csv.empty())
        cfg.out_csv = default_out;
    if (!io.svg.empty())
        cfg.out_svg = io.svg;
    if (io.z0 >= 0.0)
        cfg.z0 = io.z0;
    if (io.samples > 0)
        cfg.samples = static_cast<std::size_t>(io.samples);
}

int cmd_hysteresis(RunConfig cfg, const CommandIO& io, const CLI::App* cmd, double peak_pos,
                   double peak_neg, double period) {
    apply_io(io, cfg, "hysteresis.csv");
    WaveformSpec wf = cfg.waveform;
    wf.kind = WaveformKind::triangle;
    if (cmd->count("--peak-pos"))
        wf.pos_peak = peak_pos;
    if (cmd->count("--peak-neg"))
        wf.neg_peak = peak_neg;
    if (cmd->count("--period"))
        wf.period = period;
    auto [series, metrics] = run_hysteresis(cfg.params, cfg.circuit, wf, cfg.integrator,
                                            cfg.samples);
    write_time_series_csv(series, cfg.out_csv);
    std::printf("wrote %s\n", cfg.out_csv.c_str());
    if (!cfg.out_svg.empty()) {
        write_hysteresis_svg(series, cfg.out_svg);
        std::printf("wrote %s\n", cfg.out_svg.c_str());
    }
    print_metrics(metrics);
    return 0;
}

int cmd_step(RunConfig cfg, const CommandIO& io, const CLI::App* cmd, double amplitude,
             double duration) {
    apply_io(io, cfg, "step.csv");
    if (!cmd->count("--amplitude"))
        amplitude = cfg.waveform.amplitude;
    if (!cmd->count("--duration"))
        duration = cfg.waveform.duration;
    TimeSeries series = run_step_response(cfg.params, cfg.circuit, amplitude, duration,
                                          cfg.integrator, cfg.samples);
    write_time_series_csv(series, cfg.out_csv);
    std::printf("wrote %s\n", cfg.out_csv.c_str());
    if (!cfg.out_svg.empty()) {
        write_step_svg(series, cfg.out_svg);
        std::printf("wrote %s\n", cfg.out_svg.c_str());
    }
    const Sample& last = series.samples.back();
    std::printf("final: t = %.6g s, i = %.6g A, z = %.6g\n", last.t, last.i, last.z);
    return 0;
}

int cmd_run(RunConfig cfg, const CommandIO& io) {
    apply_io(io, cfg, "run.csv");
    TimeSeries series = integrate(cfg.params, cfg.circuit, cfg.waveform, cfg.integrator,
                                  cfg.z0, cfg.samples);
    write_time_series_csv(series, cfg.out_csv);
    std::printf("wrote %s\n", cfg.out_csv.c_str());
    if (!cfg.out_svg.empty()) {
        if (cfg.waveform.kind == WaveformKind::triangle)
            write_hysteresis_svg(series, cfg.out_svg);
        else
            write_step_svg(series, cfg.out_svg);
        std::printf("wrote %s\n", cfg.out_svg.c_str());
    }
    return 0;
}

int cmd_sweep(RunConfig cfg, const CLI::App* cmd, const std::string& peaks_arg,
              double period, const std::string& out_dir, const std::string& summary,
              long samples) {
    std::vector<double> peaks;
    {
        std::string tok;
        std::istringstream in(peaks_arg);
        while (std::getline(in, tok, ',')) {
            char* end = nullptr;
            const double v = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str() || *end != '\0' || !(v > 0.0))
                throw parse_error("--peaks: expected comma-separated positive voltages, got '" +
                                  tok + "'");
            peaks.push_back(v);
        }
    }
    if (peaks.empty())
        throw parse_error("--peaks: expected at least one voltage");
    if (cmd->count("--period"))
        cfg.waveform.period = period;
    if (samples > 0)
        cfg.samples = static_cast<std::size_t>(samples);

    std::vector<std::pair<TimeSeries, HysteresisMetrics>> runs(peaks.size());
    parallel_for(peaks.size(), [&](std::size_t k) {
        WaveformSpec wf = cfg.waveform;
        wf.kind = WaveformKind::triangle;
        wf.pos_peak = peaks[k];
        wf.neg_peak = -(2.0 / 3.0) * peaks[k];
        runs[k] = run_hysteresis(cfg.params, cfg.circuit, wf, cfg.integrator, cfg.samples);
    });

    std::vector<SweepRow> rows;
    rows.reserve(peaks.size());
    for (std::size_t k = 0; k < peaks.size(); ++k) {
        const std::string path =
            (std::filesystem::path(out_dir) / ("sweep_" + format_peak(peaks[k]) + "V.csv"))
                .string();
        write_time_series_csv(runs[k].first, path);
        std::printf("wrote %s\n", path.c_str());
        rows.push_back({peaks[k], runs[k].second});
    }
    const std::string summary_path =
        (std::filesystem::path(out_dir) / summary).string();
    write_sweep_summary(rows, summary_path);
    std::printf("wrote %s\n", summary_path.c_str());
    return 0;
}

int cmd_fit(const RunConfig& cfg, const CLI::App* cmd, const std::string& spec_path,
            const std::vector<std::string>& data_paths, const std::string& out_path,
            unsigned seed, long samples) {
    FitFile ff = load_fit_file(spec_path);
    ff.settings.integrator = cfg.integrator;
    if (cmd->count("--seed"))
        ff.settings.seed = seed;
    if (samples > 0)
        ff.settings.sim_samples = static_cast<std::size_t>(samples);

    std::vector<Dataset> datasets;
    datasets.reserve(data_paths.size());
    for (const std::string& path : data_paths)
        datasets.push_back(read_dataset_csv(path));

    const FitResult result = fit(ff.spec, datasets, cfg.params, cfg.circuit, ff.settings);

    std::printf("objective   = %.6g\n", result.objective_value);
    std::printf("evaluations = %ld\n", result.evaluations);
    std::printf("converged   = %s\n", result.converged ? "yes" : "no");
    for (std::size_t k = 0; k < result.per_dataset_residuals.size(); ++k)
        std::printf("residual[%zu] = %.6g  (%s)\n", k, result.per_dataset_residuals[k],
                    data_paths[k].c_str());
    DeviceParameters best = result.best_parameters;
    for (const FreeParameter& fp : ff.spec.free_parameters)
        std::printf("%s = %.10g\n", fp.name.c_str(), *param_field(best, fp.name));

    char banner[128];
    std::snprintf(banner, sizeof(banner), "fitted parameters: objective %.6g, %ld evaluations%s",
                  result.objective_value, result.evaluations,
                  result.converged ? "" : ", NOT converged");
    write_params_file(result.best_parameters, out_path, banner);
    std::printf("wrote %s\n", out_path.c_str());

    if (!result.converged) {
        std::fprintf(stderr, "fit did not converge: %s\n", result.diagnostics.c_str());
        return 3;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lumped-element simulator for a double-barrier memristive device"};
    app.require_subcommand(1);

    std::string config_path;
    std::string params_path;
    app.add_option("--config", config_path, "Run-config file")->envname("DBMD_CONFIG");
    app.add_option("--params", params_path,
                   "Parameter file applied on top of the config's parameters");

    auto* hyst = app.add_subcommand(
        "hysteresis", "One triangle sweep from z0 = 1, with loop metrics on stdout");
    double peak_pos = 3.0, peak_neg = -2.0, period = 100.0;
    hyst->add_option("--peak-pos", peak_pos, "Positive source peak [V]");
    hyst->add_option("--peak-neg", peak_neg, "Negative source peak [V]");
    hyst->add_option("--period", period, "Sweep period [s]");
    CommandIO hyst_io;
    add_io_options(hyst, hyst_io, "hysteresis.csv");

    auto* step = app.add_subcommand("step", "Constant-bias response from z0 = 1");
    double amplitude = 2.5, duration = 600.0;
    step->add_option("--amplitude", amplitude, "Source voltage [V], within [-2, 3]");
    step->add_option("--duration", duration, "Run length [s]");
    CommandIO step_io;
    add_io_options(step, step_io, "step.csv");

    auto* runc = app.add_subcommand("run", "Integrate the waveform configured in --config");
    CommandIO run_io;
    add_io_options(runc, run_io, "run.csv");

    auto* sweep = app.add_subcommand(
        "sweep", "Triangle sweeps over a family of positive peaks (negative peak = -2/3 "
                 "of the positive one), plus a metrics summary");
    std::string peaks_arg = "1.8,2.3,3";
    double sweep_period = 100.0;
    std::string out_dir = ".";
    std::string summary = "sweep_summary.csv";
    long sweep_samples = 0;
    sweep->add_option("--peaks", peaks_arg, "Comma-separated positive peaks [V]");
    sweep->add_option("--period", sweep_period, "Sweep period [s]");
    sweep->add_option("--out-dir", out_dir, "Directory for the per-peak CSVs");
    sweep->add_option("--summary", summary, "Summary CSV name (within --out-dir)");
    sweep->add_option("--samples", sweep_samples, "Output rows per run")
        ->check(CLI::Range(2L, 100000000L));

    auto* fitc = app.add_subcommand("fit", "Calibrate free parameters against datasets");
    std::string fit_spec_path;
    std::vector<std::string> data_paths;
    std::string fit_out = "fitted_params.conf";
    unsigned fit_seed = 42;
    long fit_samples = 0;
    fitc->add_option("--spec", fit_spec_path, "Fit-spec file")->required();
    fitc->add_option("--data", data_paths, "Dataset CSV (repeatable, order sets weights)")
        ->required();
    fitc->add_option("--out", fit_out, "Fitted parameter file to write");
    fitc->add_option("--seed", fit_seed, "Override the fit-spec seed");
    fitc->add_option("--samples", fit_samples, "Override the objective's output cadence")
        ->check(CLI::Range(2L, 100000000L));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    reset_saturation_count();
    try {
        RunConfig cfg;
        if (!config_path.empty())
            cfg = load_run_config(config_path);
        if (!params_path.empty())
            cfg.params = load_params_file(params_path);

        int rc = 0;
        if (hyst->parsed())
            rc = cmd_hysteresis(cfg, hyst_io, hyst, peak_pos, peak_neg, period);
        else if (step->parsed())
            rc = cmd_step(cfg, step_io, step, amplitude, duration);
        else if (runc->parsed())
            rc = cmd_run(cfg, run_io);
        else if (sweep->parsed())
            rc = cmd_sweep(cfg, sweep, peaks_arg, sweep_period, out_dir, summary,
                           sweep_samples);
        else if (fitc->parsed())
            rc = cmd_fit(cfg, fitc, fit_spec_path, data_paths, fit_out, fit_seed,
                         fit_samples);
        report_saturations();
        return rc;
    } catch (const dbmd::solver_failure_error& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return 2;
    } catch (const dbmd::integration_failure_error& e) {
        std::fprintf(stderr, "integration failure: %s\n", e.what());
        return 2;
    } catch (const dbmd::out_of_regime_error& e) {
        std::fprintf(stderr, "out of regime: %s\n", e.what());
        return 2;
    } catch (const dbmd::parse_error& e) {
        if (e.line > 0)
            std::fprintf(stderr, "parse error (line %d): %s\n", e.line, e.what());
        else
            std::fprintf(stderr, "parse error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
