#pragma once

#include "dbmd/params.hpp"

namespace dbmd {

/// Arrhenius hop rate nu * exp(-phi_a). Throws invalid_parameter_error for phi_a < 0 or nu < 0.
double arrhenius_rate(double phi_a, double nu);

/// Window w(z) = (1-2w_0)(1-(2z-1)^{2p}) + w_0, range [w_0, 1-w_0]. Throws std::domain_error
/// for z outside [0,1].
double window(double z, const WindowParams& wp);

/// dw/dz, same domain as window().
double window_derivative(double z, const WindowParams& wp);

/// Unit step: 1 for xi > 0, else 0 (sigma(0) = 0).
double unit_step(double xi);

/// State- and polarity-dependent barrier
/// phi_a(u,z) = sigma(u)[phi_a1 + z(phi_a0 - phi_a1) - phi_ar] + phi_ar.
double activation_energy(double u, double z, const IonKinetics& k);

/// Reset coupling u_r = sigma(-u)(1-z)u_s: 0 for u >= 0, (1-z)u_s for u < 0.
double reset_coupling(double u, double u_s, double z);

/// Linear state law v0 + z(v1 - v0), shared by phi_s(z), n(z), R_e(z), alpha_t(z).
double linear_state_param(double v0, double v1, double z);

/// Schottky current with image-charge barrier lowering on the reverse branch:
/// i_s = I_s exp(-[phi_s(z) + alpha_f sqrt((|u_s|-u_s)/(alpha_s U_th))]) (exp(u_s/(n(z)U_th)) - 1).
/// Exponent overflow saturates at the shared cap (counted), never returns inf.
double schottky_current(double u_s, double z, const DeviceParameters& p,
                        const DerivedQuantities& d);

/// d i_s / d u_s (sigma branches treated as constant; at u_s = 0 returns the forward branch).
double schottky_current_derivative(double u_s, double z, const DeviceParameters& p,
                                   const DerivedQuantities& d);

/// Voltage bound of the intermediate Simmons regime: both phi_t(+-u_t) > 0 requires
/// |u_t| < 2 phi_t0 U_th.
double tunnel_regime_bound(const DeviceParameters& p, const DerivedQuantities& d);

/// Largest |u_t| (< regime bound) up to which i_t is strictly increasing at this z.
double tunnel_monotone_bound(double z, const DeviceParameters& p, const DerivedQuantities& d);

/// Intermediate Simmons tunnel current i_t = I_t [g(-u_t,z) - g(u_t,z)] / alpha_t(z)^2 with
/// g(v,z) = phi_t exp(-alpha_t sqrt(phi_t)), phi_t = phi_t0 + v/(2 U_th).
/// Exactly antisymmetric in u_t. Throws out_of_regime_error when phi_t(+-u_t) <= 0.
double tunnel_current(double u_t, double z, const DeviceParameters& p,
                      const DerivedQuantities& d);

/// d i_t / d u_t.
double tunnel_current_derivative(double u_t, double z, const DeviceParameters& p,
                                 const DerivedQuantities& d);

/// Normalized ion drift velocity
/// zdot = -Zdot w(z) exp(-phi_a(u,z)) sinh((u_r + u_e - U_C)/U_e);
/// the sinh is evaluated overflow-safe (log-domain above the cap, counted).
double state_derivative(double u, double u_s, double u_e, double z,
                        const DeviceParameters& p, const DerivedQuantities& d);

// Partial derivatives of state_derivative at fixed sigma branches (valid away from u = 0).
struct StateDerivativePartials {
    double d_u_s; // (1/s)/V
    double d_u_e; // (1/s)/V
    double d_z;   // 1/s
};

StateDerivativePartials state_derivative_partials(double u, double u_s, double u_e, double z,
                                                  const DeviceParameters& p,
                                                  const DerivedQuantities& d);

} // namespace dbmd
