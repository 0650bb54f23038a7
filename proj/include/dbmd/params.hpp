#pragma once

namespace dbmd {

// CODATA 2018 values, fixed at construction.
struct PhysicalConstants {
    double boltzmann           = 1.380649e-23;    // J/K
    double elementary_charge   = 1.602176634e-19; // C
    double planck              = 6.62607015e-34;  // J*s
    double electron_mass       = 9.1093837015e-31; // kg
    double vacuum_permittivity = 8.8541878128e-12; // F/m
};

struct Environment {
    double temperature = 300.0; // K, > 0
};

struct DeviceGeometry {
    double electrolyte_width    = 2.5e-9;   // m (d_e)
    double schottky_thickness   = 2.0e-9;   // m (d_s)
    double tunnel_thickness_abs = 1.5e-9;   // m (d_t)
    double hop_distance         = 1.25e-10; // m (d_hop), <= d_e
    double cross_section        = 1.0e-12;  // m^2 (A)
    double x_min                = 0.0;      // m, fixed 0
    double x_max                = 1.25e-9;  // m, fixed d_e/2
};

struct IonKinetics {
    double hop_frequency   = 1.0e12; // Hz (nu)
    double charge_number   = 2.0;    // dimensionless integer >= 1 (c)
    double phi_a0          = 26.0;   // barrier at z=1, positive bias
    double phi_a1          = 33.0;   // barrier at z=0, positive bias
    double phi_ar          = 31.5;   // barrier at rest / negative bias
    double coulomb_voltage = 0.10;   // V (U_C)
};

struct WindowParams {
    double offset  = 0.01; // w_0, in (0, 1/2)
    int steepness  = 3;    // p, >= 1
};

struct SchottkyParams {
    double phi_s0                = 35.0;   // barrier at z=0
    double phi_s1                = 43.2;   // barrier at z=1, >= phi_s0
    double n0                    = 1.3;    // ideality at z=0, >= 1
    double n1                    = 2.0;    // ideality at z=1, >= 1
    double alpha_f               = -2.0;   // barrier-lowering weight, either sign
    double richardson            = 1.1e6;  // A/(m^2 K^2) (R_i)
    double relative_permittivity = 17.0;   // eps_r, >= 1
};

struct TunnelParams {
    double phi_t0   = 116.045; // 3 eV normalized by k_B*300K/q_e
    double alpha_t0 = 1.43;    // normalized thickness at z=0
    double alpha_t1 = 1.83;    // normalized thickness at z=1, >= alpha_t0
};

struct ElectrolyteParams {
    double r_e0 = 1.0e5; // Ohm at z=0
    double r_e1 = 1.0e7; // Ohm at z=1, >= r_e0
};

struct DeviceParameters {
    PhysicalConstants constants;
    Environment env;
    DeviceGeometry geometry;
    IonKinetics kinetics;
    WindowParams window;
    SchottkyParams schottky;
    TunnelParams tunnel;
    ElectrolyteParams electrolyte;
};

// Pure function of DeviceParameters; all entries strictly positive.
struct DerivedQuantities {
    double thermal_voltage;         // V (U_th = k_B*T/q_e)
    double ref_electrolyte_voltage; // V (U_e = (2/c)(d_e/d_hop) U_th)
    double drift_amplitude;         // 1/s (Zdot = 2 nu d_hop/(x_max - x_min))
    double norm_schottky_thickness; // alpha_s = 2 d_s / D_s
    double schottky_scale;          // A (I_s = R_i A T^2)
    double tunnel_scale;            // A (I_t)
    double tunnel_norm_length;      // m (D_t)
    double schottky_norm_length;    // m (D_s)
};

struct DeviceState {
    double z = 1.0; // normalized average ion position, in [0,1]; z=1 is the HRS equilibrium
};

/// Throws invalid_parameter_error naming the offending field and the rule it violates.
void validate(const DeviceParameters& params);

/// Derived normalization constants; validates params first.
DerivedQuantities derive_quantities(const DeviceParameters& params);

/// Shipped defaults; the origin of each value is noted in data/default_params.conf.
inline DeviceParameters default_parameters() { return DeviceParameters{}; }

/// Re-derives the fixed drift-window endpoints after electrolyte_width changes.
inline void normalize_geometry(DeviceParameters& p) {
    p.geometry.x_min = 0.0;
    p.geometry.x_max = 0.5 * p.geometry.electrolyte_width;
}

} // namespace dbmd
