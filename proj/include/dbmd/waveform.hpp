#pragma once

#include <utility>
#include <vector>

namespace dbmd {

enum class WaveformKind { triangle, step, piecewise_linear };

struct WaveformSpec {
    WaveformKind kind = WaveformKind::triangle;
    // triangle: 0 -> pos_peak at T/4 -> 0 at T/2 -> neg_peak at 3T/4 -> 0 at T
    double period = 100.0;   // s (T), > 0
    double pos_peak = 3.0;   // V (e+), >= 0
    double neg_peak = -2.0;  // V (e-), <= 0
    // step: constant amplitude over [0, duration]
    double amplitude = 2.5;  // V
    double duration = 600.0; // s (T_0), > 0
    // piecewise-linear: (t, e) knots, t strictly increasing
    std::vector<std::pair<double, double>> breakpoints;
};

void validate(const WaveformSpec& spec);

/// Source voltage at time t >= 0; step/PWL clamp to the last value beyond their span.
double waveform_eval(const WaveformSpec& spec, double t);

/// Natural end of one run: period (triangle), duration (step), last knot (PWL).
double waveform_span(const WaveformSpec& spec);

/// Mandatory integration step boundaries in [0, t_end]: segment corners and zero
/// crossings, so no step straddles the sigma(u) branch switch. Sorted, unique.
std::vector<double> waveform_landmarks(const WaveformSpec& spec, double t_end);

} // namespace dbmd
