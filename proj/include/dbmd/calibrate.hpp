#pragma once

#include "dbmd/circuit.hpp"
#include "dbmd/params.hpp"
#include "dbmd/simulate.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace dbmd {

struct DataPoint {
    double t; // s
    double e; // V, source voltage
    double i; // A, measured current
};

struct Dataset {
    std::vector<DataPoint> records; // t strictly increasing, currents finite
    double area = 1.0e-12;          // m^2, normalization cross-section, > 0
};

void validate(const Dataset& data);

struct FreeParameter {
    std::string name; // parameter-dictionary key (see config.hpp)
    double lower = 0.0;
    double upper = 0.0;
    double initial = 0.0; // within [lower, upper]
};

struct FitSpec {
    std::vector<FreeParameter> free_parameters;
    std::vector<double> weights; // per dataset; empty means 1 for every dataset
};

void validate(const FitSpec& spec);

struct FitSettings {
    int restarts = 3;             // restart 0 starts at the declared initials,
                                  // intermediate restarts jitter the best point found
                                  // so far (deterministically from seed), and the final
                                  // restart polishes the best point unperturbed
    unsigned seed = 42;
    long max_evaluations = 4000;  // total objective-evaluation budget across restarts
    double jitter = 0.25;         // uniform half-width added per transformed coordinate
    double tolerance = 1e-10;     // simplex value-spread convergence threshold
    std::size_t sim_samples = kDefaultSampleCount; // output cadence of objective runs
    IntegratorSettings integrator;
};

struct FitResult {
    DeviceParameters best_parameters;
    double objective_value = 0.0; // re-evaluated once at best_parameters on return
    long evaluations = 0;
    bool converged = false;
    std::vector<double> per_dataset_residuals; // unweighted RMSEs at the optimum
    std::string diagnostics;                   // non-empty when converged is false
};

/// RMSE of asinh(i / 1 pA) differences; the simulated series is interpolated (linearly,
/// in asinh space) onto the dataset timestamps. Throws span_mismatch_error when the
/// series does not cover the dataset's time span.
double log_current_error(const TimeSeries& sim, const Dataset& data);

/// Weighted sum over datasets of log_current_error, each dataset simulated under the
/// piecewise-linear excitation through its own (t, e) records. Solver and integration
/// failures propagate.
double fit_objective(const DeviceParameters& p, const CircuitConfig& cfg,
                     const std::vector<Dataset>& datasets, const std::vector<double>& weights,
                     const IntegratorSettings& integ, std::size_t sim_samples,
                     std::vector<double>* residuals = nullptr);

/// Nelder-Mead over logistic-transformed coordinates (bounds enforced by construction)
/// with deterministic jittered restarts. Candidates whose simulation fails score a large
/// finite penalty instead of aborting the search. converged is true when some restart
/// improved on the objective at the declared initials (trivially true with no free
/// parameters).
FitResult fit(const FitSpec& spec, const std::vector<Dataset>& datasets,
              const DeviceParameters& base, const CircuitConfig& cfg,
              const FitSettings& settings);

} // namespace dbmd
