#pragma once

#include "dbmd/simulate.hpp"

#include <string>

namespace dbmd {

/// Loop plot: polyline of (u, asinh(i / 1 pA)) in a self-contained SVG. Byte output is
/// deterministic for a fixed series; the file is written atomically. Throws
/// invalid_parameter_error for an empty series.
void write_hysteresis_svg(const TimeSeries& series, const std::string& path);

/// Step-response plot: polyline of (t, i); same guarantees as write_hysteresis_svg.
void write_step_svg(const TimeSeries& series, const std::string& path);

} // namespace dbmd
