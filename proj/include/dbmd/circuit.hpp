#pragma once

#include "dbmd/params.hpp"

namespace dbmd {

enum class CircuitMode { quasi_static, capacitive };

struct CircuitConfig {
    double source_resistance = 0.1;     // Ohm (R_0), > 0
    double c_e = 6.0e-14;               // F, electrolyte parasitic, >= 0
    double c_t = 2.4e-14;               // F, tunnel parasitic, >= 0
    CircuitMode mode = CircuitMode::quasi_static;
};

struct OperatingPoint {
    double u_s = 0.0; // V, Schottky region
    double u_e = 0.0; // V, electrolyte region
    double u_t = 0.0; // V, tunnel region
    double u = 0.0;   // V, device voltage u_s + u_e + u_t
    double i = 0.0;   // A
    bool converged = false;
    int iterations = 0;
    double residual_norm = 0.0; // A, max |r1|,|r2|,|r3|
    bool used_fallback = false; // Newton gave up and the bracketed oracle produced the point
};

struct SolverSettings {
    double abs_tol_current = 1e-15; // A
    double rel_tol = 1e-9;
    int max_iterations = 100;
    double damping = 1.0;           // initial Newton step scale, in (0,1]
    double bracket_expansion = 2.0; // geometric bracket growth factor, > 1
};

struct KclResiduals {
    double r1; // A, i_s - u_e/R_e(z)
    double r2; // A, i_s - i_t
    double r3; // A, i_s - (e - u_s - u_e - u_t)/R_0
};

void validate(const CircuitConfig& cfg);
void validate(const SolverSettings& settings);

/// The three independent residuals of the series network; all zero at a solution.
KclResiduals kcl_residual(double u_s, double u_e, double u_t, double e, double z,
                          const CircuitConfig& cfg, const DeviceParameters& p,
                          const DerivedQuantities& d);

/// Damped Newton on (u_s, u_e, u_t) with analytic Jacobian; falls back to the bracketed
/// oracle (flagged) when Newton stalls. e = 0 returns the exact zero point.
OperatingPoint solve_operating_point(double e, double z, const CircuitConfig& cfg,
                                     const DeviceParameters& p, const DerivedQuantities& d,
                                     const SolverSettings& settings,
                                     const OperatingPoint* warm_start = nullptr);

/// Reference oracle: outer bisection on u_s, inner bisection inverses for u_e and u_t.
/// Bit-for-bit deterministic. Throws solver_failure_error when no bracket is found.
OperatingPoint solve_operating_point_bracketed(double e, double z, const CircuitConfig& cfg,
                                               const DeviceParameters& p,
                                               const DerivedQuantities& d,
                                               const SolverSettings& settings);

struct TransientRhs {
    double due_dt; // V/s
    double dut_dt; // V/s
    double i;      // A
};

/// Capacitive mode: solves i = i_s(e - R_0 i - u_e - u_t, z) for i, then the two
/// capacitor charge balances.
TransientRhs transient_rhs(double u_e, double u_t, double z, double e,
                           const CircuitConfig& cfg, const DeviceParameters& p,
                           const DerivedQuantities& d);

} // namespace dbmd
