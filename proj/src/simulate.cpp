#include "dbmd/simulate.hpp"

#include "dbmd/errors.hpp"
#include "dbmd/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

namespace dbmd {

void validate(const IntegratorSettings& s) {
    if (!(s.dt_min > 0.0))
        throw invalid_parameter_error("dt_min: must be > 0 s");
    if (!(s.dt_min <= s.dt_init))
        throw invalid_parameter_error("dt_init: must satisfy dt_min <= dt_init");
    if (!(s.dt_init <= s.dt_max))
        throw invalid_parameter_error("dt_max: must satisfy dt_init <= dt_max");
    if (!(s.max_dz_per_step > 0.0 && s.max_dz_per_step <= 0.05))
        throw invalid_parameter_error("max_dz_per_step: must lie in (0, 0.05]");
    if (!(s.error_tol > 0.0))
        throw invalid_parameter_error("error_tol: must be > 0");
}

namespace {

struct Event {
    double t;
    bool sample;
};

std::vector<Event> build_events(const WaveformSpec& spec, double t_end,
                                std::size_t n_samples) {
    if (n_samples < 2)
        throw invalid_parameter_error("n_samples: need at least 2 output samples");
    std::vector<Event> ev;
    ev.reserve(n_samples + 8);
    for (std::size_t k = 0; k + 1 < n_samples; ++k)
        ev.push_back({t_end * static_cast<double>(k) / static_cast<double>(n_samples - 1), true});
    ev.push_back({t_end, true});
    for (double t : waveform_landmarks(spec, t_end))
        ev.push_back({t, false});
    std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
    std::vector<Event> merged;
    merged.reserve(ev.size());
    const double tol = 1e-12 * std::max(1.0, t_end);
    for (const Event& e : ev) {
        if (!merged.empty() && e.t - merged.back().t <= tol)
            merged.back().sample = merged.back().sample || e.sample;
        else
            merged.push_back(e);
    }
    return merged;
}

/// Couples the waveform, the per-instant circuit solve (warm-started along the
/// trajectory), and the state equation into the scalar ODE right-hand side.
class Marcher {
public:
    Marcher(const DeviceParameters& p, const CircuitConfig& cfg, const WaveformSpec& spec)
        : p_(p), d_(derive_quantities(p)), cfg_(cfg), spec_(spec) {}

    double rate(double t, double z) {
        const double zc = std::clamp(z, 0.0, 1.0);
        const OperatingPoint op = solve(t, zc);
        return state_derivative(op.u, op.u_s, op.u_e, zc, p_, d_);
    }

    Sample sample_at(double t, double z) {
        const OperatingPoint op = solve(t, z);
        return Sample{t, waveform_eval(spec_, t), op.u, op.i, op.u_s, op.u_e, op.u_t, z};
    }

private:
    OperatingPoint solve(double t, double z) {
        const double e = waveform_eval(spec_, t);
        const OperatingPoint op =
            solve_operating_point(e, z, cfg_, p_, d_, solver_, have_warm_ ? &warm_ : nullptr);
        warm_ = op;
        have_warm_ = true;
        return op;
    }

    const DeviceParameters& p_;
    DerivedQuantities d_;
    const CircuitConfig& cfg_;
    const WaveformSpec& spec_;
    SolverSettings solver_;
    OperatingPoint warm_;
    bool have_warm_ = false;
};

double clamp_state(double z) { return std::clamp(z, 0.0, 1.0); }

/// One explicit-midpoint step of size h from (t, z); midpoint states are clamped before
/// evaluation, the endpoint is returned unclamped for the error estimate. k1 = rate(t, z)
/// is passed in so rejections don't re-evaluate it.
double explicit_midpoint(Marcher& m, double t, double z, double h, double k1) {
    const double zm = clamp_state(z + 0.5 * h * k1);
    const double k2 = m.rate(t + 0.5 * h, zm);
    return z + h * k2;
}

/// One implicit-midpoint step: z1 = z + h f(t + h/2, (z + z1)/2), solved by fixed-point
/// iteration. Returns false when the iteration fails to settle (treated as a rejection).
bool implicit_midpoint(Marcher& m, double t, double z, double h, double k1, double& z_out) {
    double y = z + h * k1; // explicit predictor
    for (int it = 0; it < 30; ++it) {
        const double mid = clamp_state(0.5 * (z + y));
        const double y_next = z + h * m.rate(t + 0.5 * h, mid);
        const double delta = std::abs(y_next - y);
        y = y_next;
        if (delta <= 1e-14 * std::max(1.0, std::abs(y))) {
            z_out = y;
            return true;
        }
    }
    return false;
}

/// Advances by h with the configured one-step scheme; returns false on an implicit
/// fixed-point failure.
bool advance(Marcher& m, IntegrationScheme scheme, double t, double z, double h, double k1,
             double& z_out) {
    if (scheme == IntegrationScheme::adaptive_explicit) {
        z_out = explicit_midpoint(m, t, z, h, k1);
        return true;
    }
    return implicit_midpoint(m, t, z, h, k1, z_out);
}

} // namespace

TimeSeries integrate(const DeviceParameters& p, const CircuitConfig& cfg,
                     const WaveformSpec& spec, const IntegratorSettings& settings, double z0,
                     std::size_t n_samples) {
    validate(p);
    validate(cfg);
    validate(spec);
    validate(settings);
    if (!(z0 >= 0.0 && z0 <= 1.0))
        throw invalid_parameter_error("z0: must lie in [0,1]");

    const double t_end = waveform_span(spec);
    const std::vector<Event> events = build_events(spec, t_end, n_samples);

    Marcher m(p, cfg, spec);
    TimeSeries series;
    series.samples.reserve(n_samples);

    double t = 0.0;
    double z = z0;
    double dt = settings.dt_init;
    std::size_t next = 0;

    while (next < events.size()) {
        if (events[next].t <= t) {
            if (events[next].sample)
                series.samples.push_back(m.sample_at(events[next].t, z));
            ++next;
            continue;
        }

        const double gap = events[next].t - t;
        const double h_controlled = std::min(dt, settings.dt_max);
        double h = std::min(h_controlled, gap);
        bool gap_limited = h < h_controlled;

        const double k1 = m.rate(t, z);
        for (;;) {
            // The doubled step accumulates unclamped so that at a saturated boundary the
            // half- and full-step results cancel exactly in the error estimate; evaluation
            // states are clamped inside rate().
            double z_big, z_half;
            bool ok = advance(m, settings.scheme, t, z, h, k1, z_big);
            if (ok) {
                const double t_mid = t + 0.5 * h;
                double z_mid;
                ok = advance(m, settings.scheme, t, z, 0.5 * h, k1, z_mid);
                if (ok) {
                    const double k_mid = m.rate(t_mid, z_mid);
                    ok = advance(m, settings.scheme, t_mid, z_mid, 0.5 * h, k_mid, z_half);
                }
            }
            if (ok) {
                const double err = std::abs(z_half - z_big) / 3.0;
                const double dz = std::abs(z_half - z);
                if (err <= settings.error_tol && dz <= settings.max_dz_per_step) {
                    z = clamp_state(z_half);
                    t = (h >= events[next].t - t) ? events[next].t : t + h;
                    if (!gap_limited) {
                        const double fac =
                            0.9 * std::cbrt(settings.error_tol / std::max(err, 1e-16));
                        dt = h * std::clamp(fac, 0.2, 4.0);
                        if (dz > 0.0)
                            dt = std::min(dt, 0.8 * h * settings.max_dz_per_step / dz);
                        dt = std::clamp(dt, settings.dt_min, settings.dt_max);
                    }
                    break;
                }
            }
            h *= 0.5;
            gap_limited = false;
            if (h < settings.dt_min)
                throw integration_failure_error(
                    "integration step underflow: required dt " + std::to_string(h) +
                        " s < dt_min at t = " + std::to_string(t) + " s",
                    t, z);
        }
    }
    return series;
}

TimeSeries integrate_fixed(const DeviceParameters& p, const CircuitConfig& cfg,
                           const WaveformSpec& spec, double dt, double z0,
                           std::size_t n_samples) {
    validate(p);
    validate(cfg);
    validate(spec);
    if (!(dt > 0.0))
        throw invalid_parameter_error("dt: must be > 0 s");
    if (!(z0 >= 0.0 && z0 <= 1.0))
        throw invalid_parameter_error("z0: must lie in [0,1]");

    const double t_end = waveform_span(spec);
    const std::vector<Event> events = build_events(spec, t_end, n_samples);

    Marcher m(p, cfg, spec);
    TimeSeries series;
    series.samples.reserve(n_samples);

    double t = 0.0;
    double z = z0;
    std::size_t next = 0;

    while (next < events.size()) {
        if (events[next].t <= t) {
            if (events[next].sample)
                series.samples.push_back(m.sample_at(events[next].t, z));
            ++next;
            continue;
        }
        const double gap = events[next].t - t;
        const double h = std::min(dt, gap);
        const double k1 = m.rate(t, z);
        z = clamp_state(explicit_midpoint(m, t, z, h, k1));
        t = (h >= gap) ? events[next].t : t + h;
    }
    return series;
}

std::pair<TimeSeries, HysteresisMetrics> run_hysteresis(const DeviceParameters& p,
                                                        const CircuitConfig& cfg,
                                                        const WaveformSpec& spec,
                                                        const IntegratorSettings& settings,
                                                        std::size_t n_samples) {
    if (spec.kind != WaveformKind::triangle)
        throw invalid_parameter_error("waveform: hysteresis runs need a triangle excitation");
    TimeSeries series = integrate(p, cfg, spec, settings, 1.0, n_samples);
    HysteresisMetrics metrics = loop_metrics(series);
    return {std::move(series), metrics};
}

TimeSeries run_step_response(const DeviceParameters& p, const CircuitConfig& cfg,
                             double amplitude, double duration,
                             const IntegratorSettings& settings, std::size_t n_samples) {
    if (!(amplitude >= -2.0 && amplitude <= 3.0))
        throw invalid_parameter_error("amplitude: operating range is [-2, 3] V");
    WaveformSpec spec;
    spec.kind = WaveformKind::step;
    spec.amplitude = amplitude;
    spec.duration = duration;
    return integrate(p, cfg, spec, settings, 1.0, n_samples);
}

namespace {

double scaled_current(double i) { return std::asinh(i / kReferenceCurrent); }

/// Linear interpolation of i at voltage target along a branch given as index range
/// [first, last]; scans for the first bracketing segment, so mildly non-monotone
/// voltage columns are fine. Returns false when the target is not covered.
bool interp_branch(const std::vector<Sample>& s, std::size_t first, std::size_t last,
                   double target, double& i_out) {
    for (std::size_t k = first; k < last; ++k) {
        const double a = s[k].u - target;
        const double b = s[k + 1].u - target;
        if (a == 0.0) {
            i_out = s[k].i;
            return true;
        }
        if (a * b < 0.0) {
            const double f = a / (s[k].u - s[k + 1].u);
            i_out = s[k].i + f * (s[k + 1].i - s[k].i);
            return true;
        }
    }
    if (last > first && s[last].u == target) {
        i_out = s[last].i;
        return true;
    }
    return false;
}

} // namespace

HysteresisMetrics loop_metrics(const TimeSeries& series) {
    const auto& s = series.samples;
    if (s.size() < 3)
        throw invalid_parameter_error("series: loop metrics need at least 3 samples");

    HysteresisMetrics metrics;
    metrics.open_curve = std::abs(s.front().z - s.back().z) > kOpenCurveTolerance;

    double area2 = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const Sample& a = s[k];
        const Sample& b = s[(k + 1) % s.size()];
        area2 += a.u * scaled_current(b.i) - b.u * scaled_current(a.i);
    }
    metrics.loop_area = 0.5 * std::abs(area2);

    std::size_t peak = 0;
    for (std::size_t k = 1; k < s.size(); ++k)
        if (s[k].u > s[peak].u)
            peak = k;
    metrics.i_at_peak = s[peak].i;

    // Down branch: continue past the peak while the voltage polarity is unchanged.
    std::size_t down_end = peak;
    while (down_end + 1 < s.size() && s[down_end + 1].u >= 0.0)
        ++down_end;

    const double u_peak = s[peak].u;
    double ratio = 1.0;
    if (u_peak > 0.0 && peak > 0 && down_end > peak) {
        constexpr int kGridPoints = 64;
        constexpr double kCurrentFloor = 1e-18; // A
        for (int g = 0; g < kGridPoints; ++g) {
            const double target =
                u_peak * (0.05 + 0.90 * static_cast<double>(g) / (kGridPoints - 1));
            double i_up, i_down;
            if (!interp_branch(s, 0, peak, target, i_up) ||
                !interp_branch(s, peak, down_end, target, i_down))
                continue;
            const double hi = std::max(std::abs(i_up), std::abs(i_down));
            const double lo = std::max(std::min(std::abs(i_up), std::abs(i_down)),
                                       kCurrentFloor);
            ratio = std::max(ratio, hi / lo);
        }
    }
    metrics.max_branch_ratio = ratio;
    return metrics;
}

} // namespace dbmd
