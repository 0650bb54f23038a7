#pragma once

#include "dbmd/circuit.hpp"
#include "dbmd/params.hpp"
#include "dbmd/waveform.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace dbmd {

enum class IntegrationScheme { adaptive_explicit, implicit_midpoint };

struct IntegratorSettings {
    double dt_init = 1e-2;         // s
    double dt_min = 1e-6;          // s, a rejection cascade below this aborts the run
    double dt_max = 1.0;           // s
    double max_dz_per_step = 1e-2; // hard cap on |z_{n+1} - z_n|, in (0, 0.05]
    double error_tol = 1e-9;       // step-doubling local error bound on z
    IntegrationScheme scheme = IntegrationScheme::adaptive_explicit;
};

void validate(const IntegratorSettings& settings);

struct Sample {
    double t;   // s
    double e;   // V, source voltage
    double u;   // V, device voltage u_s + u_e + u_t
    double i;   // A
    double u_s; // V
    double u_e; // V
    double u_t; // V
    double z;   // dimensionless, in [0,1]
};

struct TimeSeries {
    std::vector<Sample> samples;
};

inline constexpr double kReferenceCurrent = 1e-12;   // A, asinh(i/i_ref) scaling
inline constexpr double kOpenCurveTolerance = 1e-3;  // |z_first - z_last| beyond which a
                                                     // loop is flagged as open
inline constexpr std::size_t kDefaultSampleCount = 2000;

struct HysteresisMetrics {
    double loop_area = 0.0;        // |shoelace| in the (u, asinh(i/i_ref)) plane
    double max_branch_ratio = 1.0; // max over the shared voltage grid of i_up vs i_down
    double i_at_peak = 0.0;        // A, current at the maximum device voltage
    bool open_curve = false;
};

/// Time-marches the state ODE against the quasi-static circuit solve. Steps always land
/// exactly on sample times and waveform landmarks, so no step straddles a source-voltage
/// sign change. Samples are recorded at n_samples evenly spaced times over the waveform
/// span. Throws integration_failure_error when a rejection cascade drives the step below
/// settings.dt_min.
TimeSeries integrate(const DeviceParameters& p, const CircuitConfig& cfg,
                     const WaveformSpec& spec, const IntegratorSettings& settings, double z0,
                     std::size_t n_samples = kDefaultSampleCount);

/// Reference integrator: plain explicit midpoint at constant dt (still landing on sample
/// times and landmarks), no error control. Used to cross-check the adaptive result.
TimeSeries integrate_fixed(const DeviceParameters& p, const CircuitConfig& cfg,
                           const WaveformSpec& spec, double dt, double z0,
                           std::size_t n_samples = kDefaultSampleCount);

/// One full triangle period from z0 = 1, plus loop metrics over that period.
std::pair<TimeSeries, HysteresisMetrics> run_hysteresis(const DeviceParameters& p,
                                                        const CircuitConfig& cfg,
                                                        const WaveformSpec& spec,
                                                        const IntegratorSettings& settings,
                                                        std::size_t n_samples = kDefaultSampleCount);

/// Constant bias from z0 = 1 over [0, duration]. Amplitude is limited to the validated
/// operating range [-2, 3] V.
TimeSeries run_step_response(const DeviceParameters& p, const CircuitConfig& cfg,
                             double amplitude, double duration,
                             const IntegratorSettings& settings,
                             std::size_t n_samples = kDefaultSampleCount);

/// Shoelace area of the closed (u, asinh(i/i_ref)) curve, branch ratio via interpolation
/// of both branches onto a shared voltage grid, and the current at peak voltage. An open
/// curve (first/last z differ by more than kOpenCurveTolerance) is flagged; the area is
/// still reported.
HysteresisMetrics loop_metrics(const TimeSeries& series);

} // namespace dbmd
