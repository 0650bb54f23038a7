#include "dbmd/errors.hpp"
#include "dbmd/simulate.hpp"
#include "dbmd/waveform.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace dbmd;

namespace {

WaveformSpec triangle(double pos, double neg, double period = 100.0) {
    WaveformSpec wf;
    wf.kind = WaveformKind::triangle;
    wf.pos_peak = pos;
    wf.neg_peak = neg;
    wf.period = period;
    return wf;
}

} // namespace

TEST_SUITE("unit_simulator") {

TEST_CASE("triangle waveform shape and landmarks") {
    const WaveformSpec wf = triangle(3.0, -2.0);
    CHECK(waveform_eval(wf, 0.0) == 0.0);
    CHECK(waveform_eval(wf, 12.5) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(waveform_eval(wf, 25.0) == 3.0);
    CHECK(waveform_eval(wf, 50.0) == 0.0);
    CHECK(waveform_eval(wf, 75.0) == -2.0);
    CHECK(waveform_eval(wf, 100.0) == 0.0);
    CHECK(waveform_eval(wf, 150.0) == 0.0); // periodic continuation
    CHECK(waveform_span(wf) == 100.0);
    CHECK_THROWS_AS((void)waveform_eval(wf, -1.0), invalid_parameter_error);

    CHECK(waveform_landmarks(wf, 100.0) == std::vector<double>{0.0, 25.0, 50.0, 75.0, 100.0});
    CHECK(waveform_landmarks(wf, 60.0) == std::vector<double>{0.0, 25.0, 50.0});
}

TEST_CASE("piecewise-linear waveform interpolates, clamps, and marks crossings") {
    WaveformSpec wf;
    wf.kind = WaveformKind::piecewise_linear;
    wf.breakpoints = {{0.0, -1.0}, {10.0, 1.0}, {20.0, 1.0}};
    CHECK(waveform_eval(wf, 0.0) == -1.0);
    CHECK(waveform_eval(wf, 2.5) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(waveform_eval(wf, 15.0) == 1.0);
    CHECK(waveform_eval(wf, 99.0) == 1.0); // clamps past the last knot
    CHECK(waveform_span(wf) == 20.0);

    const std::vector<double> marks = waveform_landmarks(wf, 20.0);
    CHECK(marks == std::vector<double>{0.0, 5.0, 10.0, 20.0}); // 5 s: sign change

    WaveformSpec step;
    step.kind = WaveformKind::step;
    step.amplitude = 2.5;
    CHECK(waveform_eval(step, 0.0) == 2.5);
    CHECK(waveform_eval(step, 599.0) == 2.5);
    CHECK(waveform_span(step) == step.duration);
}

TEST_CASE("waveform validation") {
    WaveformSpec wf = triangle(3.0, -2.0, -1.0);
    CHECK_THROWS_AS(validate(wf), invalid_parameter_error);
    wf = triangle(-0.1, -2.0);
    CHECK_THROWS_AS(validate(wf), invalid_parameter_error);
    wf = triangle(3.0, 0.5);
    CHECK_THROWS_AS(validate(wf), invalid_parameter_error);

    WaveformSpec pwl;
    pwl.kind = WaveformKind::piecewise_linear;
    CHECK_THROWS_AS(validate(pwl), invalid_parameter_error);
    pwl.breakpoints = {{0.0, 1.0}, {0.0, 2.0}};
    CHECK_THROWS_AS(validate(pwl), invalid_parameter_error);
}

TEST_CASE("zero bias keeps the equilibrium exactly") {
    const DeviceParameters p = default_parameters();
    const CircuitConfig cfg;
    const IntegratorSettings settings;
    const TimeSeries series = run_step_response(p, cfg, 0.0, 10.0, settings, 20);
    REQUIRE(series.samples.size() == 20);
    for (const Sample& s : series.samples) {
        CHECK(s.z == 1.0);
        CHECK(s.i == 0.0);
        CHECK(s.u == 0.0);
        CHECK(s.e == 0.0);
    }
}

TEST_CASE("retention relaxes monotonically toward the equilibrium state") {
    const DeviceParameters p = default_parameters();
    const CircuitConfig cfg;
    const IntegratorSettings settings;
    WaveformSpec rest;
    rest.kind = WaveformKind::step;
    rest.amplitude = 0.0;
    rest.duration = 600.0;
    const TimeSeries series = integrate(p, cfg, rest, settings, 0.5, 201);
    REQUIRE(series.samples.size() == 201);
    CHECK(series.samples.front().z == 0.5);
    for (std::size_t k = 0; k < series.samples.size(); ++k) {
        const Sample& s = series.samples[k];
        CHECK(s.i == 0.0);
        CHECK(s.z >= 0.0);
        CHECK(s.z <= 1.0);
        if (k > 0)
            CHECK(s.z >= series.samples[k - 1].z - 1e-9);
    }
    CHECK(series.samples.back().z > 0.9);
}

TEST_CASE("a full sweep sets the device and cycling closes the loop") {
    const DeviceParameters p = default_parameters();
    const CircuitConfig cfg;
    const IntegratorSettings settings;
    const WaveformSpec wf = triangle(3.0, -2.0);
    const auto [series, metrics] = run_hysteresis(p, cfg, wf, settings, 500);

    double z_min = 1.0;
    for (const Sample& s : series.samples) {
        CHECK(s.z >= 0.0);
        CHECK(s.z <= 1.0);
        z_min = std::min(z_min, s.z);
    }
    CHECK(series.samples.front().z == 1.0);
    CHECK(z_min < 0.1);                     // positive lobe switches deep into the LRS
    CHECK(series.samples.back().z > 0.5);   // negative lobe drives the reset...
    CHECK(series.samples.back().z < 0.95);  // ...but one period from rest stays open
    CHECK(metrics.open_curve);
    CHECK(metrics.loop_area > 1.0);
    CHECK(metrics.max_branch_ratio > 10.0);
    CHECK(metrics.i_at_peak > 0.0);

    // Cycling contracts onto a periodic loop: the second period carries over less than
    // 1% of the first period's closure gap, and the third closes within the metric's
    // tolerance.
    const TimeSeries second = integrate(p, cfg, wf, settings, series.samples.back().z, 500);
    const double gap1 = std::abs(series.samples.back().z - series.samples.front().z);
    const double gap2 = std::abs(second.samples.back().z - second.samples.front().z);
    CHECK(gap2 < 0.01 * gap1);
    const TimeSeries third =
        integrate(p, cfg, wf, settings, second.samples.back().z, 500);
    CHECK_FALSE(loop_metrics(third).open_curve);

    WaveformSpec wrong = triangle(3.0, -2.0);
    wrong.kind = WaveformKind::step;
    CHECK_THROWS_AS((void)run_hysteresis(p, cfg, wrong, settings, 100), invalid_parameter_error);
}

TEST_CASE("loop areas grow with the peak and vanish below threshold") {
    const DeviceParameters p = default_parameters();
    const CircuitConfig cfg;
    const IntegratorSettings settings;
    auto area = [&](double peak) {
        const auto run =
            run_hysteresis(p, cfg, triangle(peak, -(2.0 / 3.0) * peak), settings, 500);
        return run.second.loop_area;
    };
    const double a15 = area(1.5);
    const double a18 = area(1.8);
    const double a23 = area(2.3);
    const double a30 = area(3.0);
    CHECK(a18 < a23);
    CHECK(a23 < a30);
    CHECK(a15 < 0.01 * a30); // sub-threshold excitation leaves no visible loop
}

TEST_CASE("samples land exactly on the even output grid") {
    const DeviceParameters p = default_parameters();
    const CircuitConfig cfg;
    const IntegratorSettings settings;
    const WaveformSpec wf = triangle(1.5, -1.0);
    const double span = 100.0;
    // 137: landmarks coincide with grid points; 100: they interleave.
    for (const std::size_t n : {std::size_t{137}, std::size_t{100}}) {
        const TimeSeries series = integrate(p, cfg, wf, settings, 1.0, n);
        REQUIRE(series.samples.size() == n);
        for (std::size_t k = 0; k < n; ++k) {
            const double expected =
                span * static_cast<double>(k) / static_cast<double>(n - 1);
            CHECK(series.samples[k].t == expected);
            CHECK(series.samples[k].e == waveform_eval(wf, expected));
        }
    }
}

TEST_CASE("identical runs are bit-identical") {
    const DeviceParameters p = default_parameters();
    const CircuitConfig cfg;
    const IntegratorSettings settings;
    const TimeSeries a = integrate(p, cfg, triangle(2.3, -2.3 * 2.0 / 3.0), settings, 1.0, 300);
    const TimeSeries b = integrate(p, cfg, triangle(2.3, -2.3 * 2.0 / 3.0), settings, 1.0, 300);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        CHECK(a.samples[k].t == b.samples[k].t);
        CHECK(a.samples[k].e == b.samples[k].e);
        CHECK(a.samples[k].u == b.samples[k].u);
        CHECK(a.samples[k].i == b.samples[k].i);
        CHECK(a.samples[k].u_s == b.samples[k].u_s);
        CHECK(a.samples[k].u_e == b.samples[k].u_e);
        CHECK(a.samples[k].u_t == b.samples[k].u_t);
        CHECK(a.samples[k].z == b.samples[k].z);
    }
}

TEST_CASE("adaptive result tracks the fixed-step reference") {
    const DeviceParameters p = default_parameters();
    const CircuitConfig cfg;
    const IntegratorSettings settings;
    const WaveformSpec wf = triangle(1.8, -1.2);
    const TimeSeries adaptive = integrate(p, cfg, wf, settings, 1.0, 201);
    const TimeSeries fixed = integrate_fixed(p, cfg, wf, 5e-3, 1.0, 201);
    REQUIRE(adaptive.samples.size() == fixed.samples.size());
    for (std::size_t k = 0; k < adaptive.samples.size(); ++k) {
        REQUIRE(adaptive.samples[k].t == fixed.samples[k].t);
        CHECK(std::abs(adaptive.samples[k].z - fixed.samples[k].z) <= 1e-4);
        CHECK(std::abs(adaptive.samples[k].i - fixed.samples[k].i) <=
              1e-3 * std::max(std::abs(fixed.samples[k].i), 1e-15));
    }
}

TEST_CASE("implicit midpoint stays close to the explicit scheme") {
    const DeviceParameters p = default_parameters();
    const CircuitConfig cfg;
    IntegratorSettings implicit;
    implicit.scheme = IntegrationScheme::implicit_midpoint;
    const IntegratorSettings explicit_default;
    const WaveformSpec wf = triangle(1.8, -1.2);
    const TimeSeries a = integrate(p, cfg, wf, explicit_default, 1.0, 101);
    const TimeSeries b = integrate(p, cfg, wf, implicit, 1.0, 101);
    for (std::size_t k = 0; k < a.samples.size(); ++k)
        CHECK(std::abs(a.samples[k].z - b.samples[k].z) <= 1e-3);
}

TEST_CASE("a rejection cascade below dt_min aborts with context") {
    const DeviceParameters p = default_parameters();
    const CircuitConfig cfg;
    IntegratorSettings strangled;
    strangled.dt_init = 0.5;
    strangled.dt_min = 0.4;
    strangled.dt_max = 1.0;
    strangled.max_dz_per_step = 1e-5;
    try {
        (void)integrate(p, cfg, triangle(3.0, -2.0), strangled, 1.0, 50);
        FAIL("expected integration_failure_error");
    } catch (const integration_failure_error& e) {
        CHECK(e.t_last >= 0.0);
        CHECK(e.t_last <= 100.0);
        CHECK(e.z_last >= 0.0);
        CHECK(e.z_last <= 1.0);
    }
}

TEST_CASE("integrator settings validation") {
    IntegratorSettings s;
    s.dt_min = 0.0;
    CHECK_THROWS_AS(validate(s), invalid_parameter_error);
    s = IntegratorSettings{};
    s.dt_init = 1e-8; // below dt_min
    CHECK_THROWS_AS(validate(s), invalid_parameter_error);
    s = IntegratorSettings{};
    s.dt_max = 1e-3; // below dt_init
    CHECK_THROWS_AS(validate(s), invalid_parameter_error);
    s = IntegratorSettings{};
    s.max_dz_per_step = 0.2;
    CHECK_THROWS_AS(validate(s), invalid_parameter_error);
    s = IntegratorSettings{};
    s.error_tol = 0.0;
    CHECK_THROWS_AS(validate(s), invalid_parameter_error);

    const DeviceParameters p = default_parameters();
    const CircuitConfig cfg;
    CHECK_THROWS_AS((void)integrate(p, cfg, triangle(1.0, -1.0), IntegratorSettings{}, 1.5, 10),
                    invalid_parameter_error);
    CHECK_THROWS_AS((void)integrate(p, cfg, triangle(1.0, -1.0), IntegratorSettings{}, 1.0, 1),
                    invalid_parameter_error);
    CHECK_THROWS_AS((void)run_step_response(p, cfg, 3.5, 1.0, IntegratorSettings{}, 10),
                    invalid_parameter_error);
}

TEST_CASE("a sweep without a reset lobe is flagged open") {
    const DeviceParameters p = default_parameters();
    const CircuitConfig cfg;
    const IntegratorSettings settings;
    const auto [series, metrics] = run_hysteresis(p, cfg, triangle(3.0, 0.0), settings, 300);
    CHECK(metrics.open_curve);
    CHECK(std::abs(series.samples.front().z - series.samples.back().z) > kOpenCurveTolerance);
}

TEST_CASE("loop metric edge properties") {
    const DeviceParameters p = default_parameters();
    const CircuitConfig cfg;
    const IntegratorSettings settings;
    const auto [series, metrics] = run_hysteresis(p, cfg, triangle(2.3, -2.3 * 2.0 / 3.0),
                                                  settings, 300);

    TimeSeries reversed = series;
    std::reverse(reversed.samples.begin(), reversed.samples.end());
    const HysteresisMetrics rev = loop_metrics(reversed);
    CHECK(std::abs(rev.loop_area - metrics.loop_area) <= 1e-12 * metrics.loop_area);

    TimeSeries flat;
    for (int k = 0; k < 5; ++k)
        flat.samples.push_back(Sample{static_cast<double>(k), 1.0, 0.7, 1e-9, 0.5, 0.1, 0.1, 0.8});
    const HysteresisMetrics fm = loop_metrics(flat);
    CHECK(fm.loop_area == 0.0);
    CHECK(fm.max_branch_ratio == 1.0);
    CHECK_FALSE(fm.open_curve);

    TimeSeries tiny;
    tiny.samples.resize(2);
    CHECK_THROWS_AS((void)loop_metrics(tiny), invalid_parameter_error);
}

} // TEST_SUITE
