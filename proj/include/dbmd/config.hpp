#pragma once

#include "dbmd/calibrate.hpp"
#include "dbmd/circuit.hpp"
#include "dbmd/params.hpp"
#include "dbmd/simulate.hpp"
#include "dbmd/waveform.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace dbmd {

/// Everything one run needs, assembled from defaults, an optional parameter file, and
/// inline keys. The parser is strict: unknown or duplicate keys are parse errors with the
/// offending line number, and all module invariants are validated before the config is
/// returned (the error names the offending key).
struct RunConfig {
    DeviceParameters params;
    CircuitConfig circuit;
    WaveformSpec waveform;
    IntegratorSettings integrator;
    double z0 = 1.0;
    std::size_t samples = kDefaultSampleCount;
    std::string out_csv;     // empty: the subcommand picks its default
    std::string out_svg;     // empty: no plot
    std::string params_file; // as written in the config, for diagnostics
};

/// Resolves a parameter-dictionary key to the DeviceParameters entry it names; nullptr
/// for unknown keys. window_steepness is intentionally absent (integer-valued, so not
/// fittable); the config parser handles it separately.
double* param_field(DeviceParameters& p, const std::string& name);

/// Dictionary keys in canonical (file-emission) order.
const std::vector<std::string>& param_names();

/// Parses `key = value` parameter lines into p (strict). origin names the source in
/// error messages. Geometry endpoints are re-derived afterwards; the result is validated
/// and violations are reported against the line that set the offending key.
void apply_params_text(DeviceParameters& p, const std::string& text,
                       const std::string& origin);

DeviceParameters load_params_file(const std::string& path);

/// Emits every dictionary key (plus window_steepness) at full precision; banner lines are
/// written as leading comments. Written atomically (temp file + rename).
void write_params_file(const DeviceParameters& p, const std::string& path,
                       const std::string& banner = "");

/// Run-config text: parameter keys as above plus circuit (source_resistance, c_e, c_t,
/// circuit_mode), waveform (waveform, period, pos_peak, neg_peak, amplitude, duration,
/// breakpoints), integrator (dt_init, dt_min, dt_max, max_dz_per_step, error_tol,
/// scheme), and run keys (params_file, z0, samples, out, svg). A params_file is applied
/// first; inline keys override it.
RunConfig parse_run_config(const std::string& text, const std::string& origin = "",
                           const std::string& base_dir = "");

RunConfig load_run_config(const std::string& path);

struct FitFile {
    FitSpec spec;
    FitSettings settings;
};

/// Fit-spec text: `free.<key> = lower, upper, initial` declares a free parameter,
/// `weight.<index> = w` sets a per-dataset objective weight, and plain keys (seed,
/// restarts, max_evaluations, jitter, tolerance, sim_samples) tune the fit.
FitFile parse_fit_file(const std::string& text, const std::string& origin = "");

FitFile load_fit_file(const std::string& path);

} // namespace dbmd
