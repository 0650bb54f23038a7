#include "dbmd/config.hpp"
#include "dbmd/csv.hpp"
#include "dbmd/errors.hpp"
#include "dbmd/simulate.hpp"
#include "dbmd/svg.hpp"

#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace dbmd;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path dir;

    TempDir() {
        std::random_device rd;
        dir = fs::temp_directory_path() /
              ("dbmd_io_" + std::to_string(rd()) + "_" + std::to_string(rd()));
        fs::create_directories(dir);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

void write_raw(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::string read_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

TimeSeries short_run() {
    return run_step_response(default_parameters(), CircuitConfig{}, 2.5, 5.0,
                             IntegratorSettings{}, 16);
}

int line_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const parse_error& e) {
        return e.line;
    }
    return -1;
}

} // namespace

TEST_SUITE("unit_io") {

TEST_CASE("time series CSV round trip is bit-exact") {
    const TempDir tmp;
    const TimeSeries series = short_run();
    const std::string path = tmp.path("run.csv");
    write_time_series_csv(series, path);

    const std::string text = read_raw(path);
    CHECK(text.rfind("t,e,u,i,u_s,u_e,u_t,z\n", 0) == 0);
    CHECK_FALSE(fs::exists(path + ".tmp"));

    const TimeSeries back = read_time_series_csv(path);
    REQUIRE(back.samples.size() == series.samples.size());
    for (std::size_t k = 0; k < series.samples.size(); ++k) {
        CHECK(back.samples[k].t == series.samples[k].t);
        CHECK(back.samples[k].e == series.samples[k].e);
        CHECK(back.samples[k].u == series.samples[k].u);
        CHECK(back.samples[k].i == series.samples[k].i);
        CHECK(back.samples[k].u_s == series.samples[k].u_s);
        CHECK(back.samples[k].u_e == series.samples[k].u_e);
        CHECK(back.samples[k].u_t == series.samples[k].u_t);
        CHECK(back.samples[k].z == series.samples[k].z);
    }
}

TEST_CASE("time series reader reports bad input with line numbers") {
    const TempDir tmp;
    const std::string path = tmp.path("bad.csv");
    const std::string header = "t,e,u,i,u_s,u_e,u_t,z\n";
    const std::string row = "0,0,0,0,0,0,0,1\n";

    write_raw(path, "time,e\n");
    CHECK(line_of([&] { (void)read_time_series_csv(path); }) == 1);

    write_raw(path, header + "0,1,2\n");
    CHECK(line_of([&] { (void)read_time_series_csv(path); }) == 2);

    write_raw(path, header + "0,abc,0,0,0,0,0,1\n");
    CHECK(line_of([&] { (void)read_time_series_csv(path); }) == 2);

    write_raw(path, header + row + "0,0,0,0,0,0,0,1\n");
    CHECK(line_of([&] { (void)read_time_series_csv(path); }) == 3);

    CHECK_THROWS_AS((void)read_time_series_csv(tmp.path("missing.csv")), parse_error);

    // CR-LF input parses the same as LF input.
    write_raw(path, "t,e,u,i,u_s,u_e,u_t,z\r\n0,0,0,0,0,0,0,1\r\n");
    CHECK(read_time_series_csv(path).samples.size() == 1);
}

TEST_CASE("empty config text yields the documented defaults") {
    const RunConfig cfg = parse_run_config("");
    CHECK(cfg.params.env.temperature == 300.0);
    CHECK(cfg.params.schottky.phi_s0 == 35.0);
    CHECK(cfg.waveform.kind == WaveformKind::triangle);
    CHECK(cfg.z0 == 1.0);
    CHECK(cfg.samples == kDefaultSampleCount);
    CHECK(cfg.out_csv.empty());
    CHECK(cfg.out_svg.empty());
}

TEST_CASE("config keys reach every module") {
    const std::string text =
        "# full-width smoke config\n"
        "waveform = step\n"
        "amplitude = 1.25   # inline comments are stripped\n"
        "duration = 30\n"
        "samples = 64\n"
        "z0 = 0.25\n"
        "scheme = implicit-midpoint\n"
        "dt_min = 1e-5\n"
        "phi_s0 = 34\n"
        "window_steepness = 4\n"
        "source_resistance = 0.2\n"
        "circuit_mode = quasi-static\n"
        "out = run.csv\n"
        "svg = run.svg\n";
    const RunConfig cfg = parse_run_config(text);
    CHECK(cfg.waveform.kind == WaveformKind::step);
    CHECK(cfg.waveform.amplitude == 1.25);
    CHECK(cfg.waveform.duration == 30.0);
    CHECK(cfg.samples == 64);
    CHECK(cfg.z0 == 0.25);
    CHECK(cfg.integrator.scheme == IntegrationScheme::implicit_midpoint);
    CHECK(cfg.integrator.dt_min == 1e-5);
    CHECK(cfg.params.schottky.phi_s0 == 34.0);
    CHECK(cfg.params.window.steepness == 4);
    CHECK(cfg.circuit.source_resistance == 0.2);
    CHECK(cfg.out_csv == "run.csv");
    CHECK(cfg.out_svg == "run.svg");
}

TEST_CASE("config errors carry the offending line and key") {
    auto fails_at = [](const std::string& text, const std::string& needle) {
        try {
            (void)parse_run_config(text);
            FAIL_CHECK("expected parse_error for: " << text);
            return -1;
        } catch (const parse_error& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
            return e.line;
        }
    };
    CHECK(fails_at("samples = 100\ntemperature = -5\n", "temperature") == 2);
    CHECK(fails_at("tempreture = 300\n", "unknown key 'tempreture'") == 1);
    CHECK(fails_at("phi_s0 = 34\nphi_s0 = 35\n", "duplicate key 'phi_s0'") == 2);
    CHECK(fails_at("z0 = 1.5\n", "z0") == 1);
    CHECK(fails_at("waveform = sine\n", "triangle") == 1);
    CHECK(fails_at("breakpoints = 0:0; 10:x\n", "not a number") == 1);
    CHECK(fails_at("phi_s0 35\n", "expected 'key = value'") == 1);
    CHECK(fails_at("samples = 1\n", "samples: must be >= 2") == 1);
    CHECK(fails_at("phi_s0 = abc\n", "phi_s0: not a number") == 1);
    CHECK(fails_at("samples = 10\ndt_min = -1\n", "dt_min: must be > 0") == 2);
    // A rule spanning two keys still fails, even when the named key was never set.
    CHECK(fails_at("dt_min = 1\ndt_max = 0.5\n", "dt_min <= dt_init") == 0);
}

TEST_CASE("breakpoints parse into a usable piecewise drive") {
    const RunConfig cfg = parse_run_config("waveform = piecewise-linear\n"
                                           "breakpoints = 0:0; 10:2.5; 20:0\n");
    REQUIRE(cfg.waveform.breakpoints.size() == 3);
    CHECK(cfg.waveform.breakpoints[1].first == 10.0);
    CHECK(cfg.waveform.breakpoints[1].second == 2.5);
    CHECK(waveform_eval(cfg.waveform, 15.0) == 1.25);
    CHECK(waveform_span(cfg.waveform) == 20.0);
}

TEST_CASE("params file round trip preserves every dictionary entry") {
    const TempDir tmp;
    DeviceParameters p = default_parameters();
    p.env.temperature = 299.5;
    p.schottky.phi_s0 = 34.5;
    p.electrolyte.r_e1 = 9.0e6;
    p.window.steepness = 4;
    normalize_geometry(p);

    const std::string path = tmp.path("params.conf");
    write_params_file(p, path, "fitted parameters: demo\nsecond banner line");
    CHECK(read_raw(path).rfind("# fitted parameters: demo\n# second banner line\n", 0) == 0);

    DeviceParameters q = load_params_file(path);
    for (const std::string& name : param_names())
        CHECK_MESSAGE(*param_field(q, name) == *param_field(p, name), name);
    CHECK(q.window.steepness == 4);
    CHECK(q.geometry.x_max == p.geometry.x_max);
}

TEST_CASE("a config can pull its parameters from a separate file") {
    const TempDir tmp;
    DeviceParameters p = default_parameters();
    p.schottky.phi_s0 = 33.75;
    write_params_file(p, tmp.path("dev.conf"));
    write_raw(tmp.path("run.conf"), "params_file = dev.conf\nphi_s1 = 44\nsamples = 32\n");
    const RunConfig cfg = load_run_config(tmp.path("run.conf"));
    CHECK(cfg.params.schottky.phi_s0 == 33.75); // from the referenced file
    CHECK(cfg.params.schottky.phi_s1 == 44.0);  // inline key wins
    CHECK(cfg.params_file == "dev.conf");

    write_raw(tmp.path("run2.conf"), "params_file = nowhere.conf\n");
    try {
        (void)load_run_config(tmp.path("run2.conf"));
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(std::string(e.what()).find("cannot open") != std::string::npos);
        CHECK(e.line == 1);
    }
}

TEST_CASE("fit files declare free parameters, weights, and search settings") {
    const FitFile f = parse_fit_file("free.phi_s0 = 30, 40, 33\n"
                                     "free.r_e1 = 5e6, 2e7, 8e6\n"
                                     "weight.1 = 2.5\n"
                                     "seed = 9\n"
                                     "restarts = 2\n"
                                     "max_evaluations = 500\n"
                                     "jitter = 0.1\n"
                                     "tolerance = 1e-8\n"
                                     "sim_samples = 301\n");
    REQUIRE(f.spec.free_parameters.size() == 2);
    CHECK(f.spec.free_parameters[0].name == "phi_s0");
    CHECK(f.spec.free_parameters[0].lower == 30.0);
    CHECK(f.spec.free_parameters[0].upper == 40.0);
    CHECK(f.spec.free_parameters[0].initial == 33.0);
    CHECK(f.spec.free_parameters[1].name == "r_e1");
    CHECK(f.spec.weights == std::vector<double>{1.0, 2.5});
    CHECK(f.settings.seed == 9);
    CHECK(f.settings.restarts == 2);
    CHECK(f.settings.max_evaluations == 500);
    CHECK(f.settings.jitter == 0.1);
    CHECK(f.settings.tolerance == 1e-8);
    CHECK(f.settings.sim_samples == 301);

    CHECK_THROWS_AS((void)parse_fit_file("free.window_steepness = 1, 6, 3\n"), parse_error);
    CHECK_THROWS_AS((void)parse_fit_file("free.phi_s0 = 30, 40\n"), parse_error);
    CHECK_THROWS_AS((void)parse_fit_file("weight.x = 1\n"), parse_error);
    CHECK_THROWS_AS((void)parse_fit_file("weight.0 = -1\n"), parse_error);
    CHECK_THROWS_AS((void)parse_fit_file("restarts = 0\n"), parse_error);
    CHECK_THROWS_AS((void)parse_fit_file("free.phi_s0 = 30, 40, 99\n"), parse_error);
}

TEST_CASE("dataset CSV round trip keeps records and the area comment") {
    const TempDir tmp;
    Dataset data;
    data.records = {{0.0, 0.0, 1e-12}, {1.0, 0.5, 2e-9}, {2.0, 1.0, -3e-6}};
    data.area = 2e-12;
    const std::string path = tmp.path("trace.csv");
    write_dataset_csv(data, path);
    CHECK(read_raw(path).rfind("# area = ", 0) == 0);

    const Dataset back = read_dataset_csv(path);
    CHECK(back.area == 2e-12);
    REQUIRE(back.records.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(back.records[k].t == data.records[k].t);
        CHECK(back.records[k].e == data.records[k].e);
        CHECK(back.records[k].i == data.records[k].i);
    }

    write_raw(path, "t,i\n");
    CHECK_THROWS_AS((void)read_dataset_csv(path), parse_error);
    write_raw(path, "t,e,i\n0,0,0\n1,0\n");
    CHECK(line_of([&] { (void)read_dataset_csv(path); }) == 3);
    write_raw(path, "t,e,i\n1,0,0\n1,0,0\n");
    CHECK(line_of([&] { (void)read_dataset_csv(path); }) == 3);
    write_raw(path, "# area = -1\nt,e,i\n0,0,0\n");
    CHECK(line_of([&] { (void)read_dataset_csv(path); }) == 1);
    write_raw(path, "# a comment\n\nt,e,i\n0,0,0\n# trailing note\n");
    CHECK(read_dataset_csv(path).records.size() == 1);
}

TEST_CASE("svg plots are deterministic and reject empty input") {
    const TempDir tmp;
    const TimeSeries series = short_run();
    write_hysteresis_svg(series, tmp.path("a.svg"));
    write_hysteresis_svg(series, tmp.path("b.svg"));
    const std::string a = read_raw(tmp.path("a.svg"));
    CHECK(a == read_raw(tmp.path("b.svg")));
    CHECK(a.find("<svg") != std::string::npos);
    CHECK(a.find("polyline") != std::string::npos);

    write_step_svg(series, tmp.path("s.svg"));
    CHECK(read_raw(tmp.path("s.svg")).find("<svg") != std::string::npos);

    CHECK_THROWS_AS(write_hysteresis_svg(TimeSeries{}, tmp.path("e.svg")),
                    invalid_parameter_error);
    CHECK_FALSE(fs::exists(tmp.path("e.svg")));
}

TEST_CASE("failed writes leave no partial files behind") {
    const TempDir tmp;
    const std::string path = tmp.path("no_such_dir/out.csv");
    CHECK_THROWS_AS(write_time_series_csv(short_run(), path), parse_error);
    CHECK_FALSE(fs::exists(path));
    CHECK_FALSE(fs::exists(path + ".tmp"));
}

TEST_CASE("sweep summaries list one row per peak") {
    const TempDir tmp;
    HysteresisMetrics m;
    m.loop_area = 2.5;
    m.max_branch_ratio = 12.0;
    m.i_at_peak = 1e-3;
    m.open_curve = false;
    HysteresisMetrics open = m;
    open.open_curve = true;
    write_sweep_summary({{1.8, m}, {3.0, open}}, tmp.path("summary.csv"));

    const std::string text = read_raw(tmp.path("summary.csv"));
    std::istringstream in(text);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "peak,loop_area,max_branch_ratio,i_at_peak,open_curve");
    REQUIRE(std::getline(in, line));
    CHECK(line.back() == '0');
    REQUIRE(std::getline(in, line));
    CHECK(line.back() == '1');
    CHECK_FALSE(std::getline(in, line));
}

} // TEST_SUITE
