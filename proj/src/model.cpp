#include "dbmd/model.hpp"

#include "dbmd/errors.hpp"
#include "dbmd/guarded_math.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dbmd {

namespace {

void require_state(double z) {
    if (!(z >= 0.0 && z <= 1.0))
        throw std::domain_error("z must lie in [0,1], got " + std::to_string(z));
}

// 1 - (2z-1)^(2p) factored as 4z(1-z) * sum_{j<p} (2z-1)^(2j); the direct form cancels
// catastrophically next to the z = 0 and z = 1 boundaries.
double boundary_term(double z, int p) {
    const double y2 = (2.0 * z - 1.0) * (2.0 * z - 1.0);
    double sum = 1.0;
    double pow = 1.0;
    for (int j = 1; j < p; ++j) {
        pow *= y2;
        sum += pow;
    }
    return 4.0 * z * (1.0 - z) * sum;
}

} // namespace

double arrhenius_rate(double phi_a, double nu) {
    if (phi_a < 0.0)
        throw invalid_parameter_error("phi_a: must be >= 0 (unphysical barrier)");
    if (nu < 0.0)
        throw invalid_parameter_error("nu: must be >= 0");
    return nu * std::exp(-phi_a);
}

double window(double z, const WindowParams& wp) {
    require_state(z);
    return (1.0 - 2.0 * wp.offset) * boundary_term(z, wp.steepness) + wp.offset;
}

double window_derivative(double z, const WindowParams& wp) {
    require_state(z);
    const double y = 2.0 * z - 1.0;
    double ypow = 1.0; // y^(2p-1)
    for (int k = 0; k < 2 * wp.steepness - 1; ++k)
        ypow *= y;
    return -(1.0 - 2.0 * wp.offset) * 2.0 * wp.steepness * ypow * 2.0;
}

double unit_step(double xi) {
    return xi > 0.0 ? 1.0 : 0.0;
}

double activation_energy(double u, double z, const IonKinetics& k) {
    require_state(z);
    return unit_step(u) * (k.phi_a1 + z * (k.phi_a0 - k.phi_a1) - k.phi_ar) + k.phi_ar;
}

double reset_coupling(double u, double u_s, double z) {
    require_state(z);
    return unit_step(-u) * (1.0 - z) * u_s;
}

double linear_state_param(double v0, double v1, double z) {
    require_state(z);
    return v0 + z * (v1 - v0);
}

double schottky_current(double u_s, double z, const DeviceParameters& p,
                        const DerivedQuantities& d) {
    require_state(z);
    const double phi_s = linear_state_param(p.schottky.phi_s0, p.schottky.phi_s1, z);
    const double n = linear_state_param(p.schottky.n0, p.schottky.n1, z);
    // (|u_s|-u_s) is 0 on the forward branch and -2u_s on the reverse branch
    const double lower = std::sqrt((std::fabs(u_s) - u_s) /
                                   (d.norm_schottky_thickness * d.thermal_voltage));
    const double log_prefactor = -(phi_s + p.schottky.alpha_f * lower);
    const double a = u_s / (n * d.thermal_voltage);
    if (log_prefactor + a > kExponentCap)
        return d.schottky_scale * guarded_exp(log_prefactor + a);
    return d.schottky_scale * std::exp(log_prefactor) * std::expm1(a);
}

double schottky_current_derivative(double u_s, double z, const DeviceParameters& p,
                                   const DerivedQuantities& d) {
    require_state(z);
    const double phi_s = linear_state_param(p.schottky.phi_s0, p.schottky.phi_s1, z);
    const double n = linear_state_param(p.schottky.n0, p.schottky.n1, z);
    const double n_uth = n * d.thermal_voltage;
    const double a = u_s / n_uth;
    if (u_s >= 0.0)
        return d.schottky_scale * guarded_exp(-phi_s + a) / n_uth;
    const double lower = std::sqrt(-2.0 * u_s / (d.norm_schottky_thickness * d.thermal_voltage));
    const double log_prefactor = -(phi_s + p.schottky.alpha_f * lower);
    // d lower / d u_s = -1 / (alpha_s U_th lower)
    const double dlog = p.schottky.alpha_f /
                        (d.norm_schottky_thickness * d.thermal_voltage * lower);
    const double prefactor = guarded_exp(log_prefactor);
    return d.schottky_scale *
           (dlog * prefactor * std::expm1(a) + prefactor * std::exp(a) / n_uth);
}

double tunnel_regime_bound(const DeviceParameters& p, const DerivedQuantities& d) {
    return 2.0 * p.tunnel.phi_t0 * d.thermal_voltage;
}

double tunnel_monotone_bound(double z, const DeviceParameters& p, const DerivedQuantities& d) {
    const double alpha_t = linear_state_param(p.tunnel.alpha_t0, p.tunnel.alpha_t1, z);
    const double stationary = 2.0 * d.thermal_voltage *
                              (p.tunnel.phi_t0 - (2.0 / alpha_t) * (2.0 / alpha_t));
    const double regime = tunnel_regime_bound(p, d);
    return 0.999 * std::fmin(stationary > 0.0 ? stationary : 0.0, regime);
}

namespace {

double simmons_g(double v, double alpha_t, double phi_t0, double u_th) {
    const double phi = phi_t0 + 0.5 * v / u_th;
    return phi * std::exp(-alpha_t * std::sqrt(phi));
}

} // namespace

double tunnel_current(double u_t, double z, const DeviceParameters& p,
                      const DerivedQuantities& d) {
    require_state(z);
    const double bound = tunnel_regime_bound(p, d);
    if (std::fabs(u_t) >= bound)
        throw out_of_regime_error(
            "u_t = " + std::to_string(u_t) +
            " V is outside the intermediate Simmons regime |u_t| < 2 phi_t0 U_th = " +
            std::to_string(bound) + " V");
    const double alpha_t = linear_state_param(p.tunnel.alpha_t0, p.tunnel.alpha_t1, z);
    const double gm = simmons_g(-u_t, alpha_t, p.tunnel.phi_t0, d.thermal_voltage);
    const double gp = simmons_g(u_t, alpha_t, p.tunnel.phi_t0, d.thermal_voltage);
    return d.tunnel_scale * (gm - gp) / (alpha_t * alpha_t);
}

double tunnel_current_derivative(double u_t, double z, const DeviceParameters& p,
                                 const DerivedQuantities& d) {
    require_state(z);
    const double bound = tunnel_regime_bound(p, d);
    if (std::fabs(u_t) >= bound)
        throw out_of_regime_error(
            "u_t = " + std::to_string(u_t) +
            " V is outside the intermediate Simmons regime |u_t| < 2 phi_t0 U_th = " +
            std::to_string(bound) + " V");
    const double alpha_t = linear_state_param(p.tunnel.alpha_t0, p.tunnel.alpha_t1, z);
    const double u_th = d.thermal_voltage;
    // d/dv [phi e^{-alpha sqrt(phi)}] = e^{-alpha sqrt(phi)} (1 - alpha sqrt(phi)/2) / (2 U_th)
    auto g_deriv = [&](double v) {
        const double phi = p.tunnel.phi_t0 + 0.5 * v / u_th;
        const double s = std::sqrt(phi);
        return std::exp(-alpha_t * s) * (1.0 - 0.5 * alpha_t * s) / (2.0 * u_th);
    };
    return d.tunnel_scale * (-g_deriv(-u_t) - g_deriv(u_t)) / (alpha_t * alpha_t);
}

double state_derivative(double u, double u_s, double u_e, double z,
                        const DeviceParameters& p, const DerivedQuantities& d) {
    require_state(z);
    const double u_r = reset_coupling(u, u_s, z);
    const double phi_a = activation_energy(u, z, p.kinetics);
    const double w = window(z, p.window);
    const double arg = (u_r + u_e - p.kinetics.coulomb_voltage) / d.ref_electrolyte_voltage;
    if (std::fabs(arg) > kExponentCap - 50.0) {
        // log-domain: |zdot| = exp(log(Zdot w / 2) - phi_a + |arg|), saturated at the cap
        note_saturation();
        const double log_mag = std::log(0.5 * d.drift_amplitude * w) - phi_a +
                               std::fmin(std::fabs(arg), kExponentCap);
        const double mag = std::exp(std::fmin(log_mag, kExponentCap));
        return arg > 0.0 ? -mag : mag;
    }
    return -d.drift_amplitude * w * std::exp(-phi_a) * std::sinh(arg);
}

StateDerivativePartials state_derivative_partials(double u, double u_s, double u_e, double z,
                                                  const DeviceParameters& p,
                                                  const DerivedQuantities& d) {
    require_state(z);
    const double u_r = reset_coupling(u, u_s, z);
    const double phi_a = activation_energy(u, z, p.kinetics);
    const double w = window(z, p.window);
    const double u_ref = d.ref_electrolyte_voltage;
    const double arg = (u_r + u_e - p.kinetics.coulomb_voltage) / u_ref;
    const double scale = d.drift_amplitude * std::exp(-phi_a);
    const double sh = guarded_sinh(arg);
    const double ch = std::fabs(arg) > kExponentCap ? 0.5 * std::exp(kExponentCap)
                                                    : std::cosh(arg);
    StateDerivativePartials out{};
    out.d_u_e = -scale * w * ch / u_ref;
    out.d_u_s = out.d_u_e * unit_step(-u) * (1.0 - z);
    const double dphi_dz = unit_step(u) * (p.kinetics.phi_a0 - p.kinetics.phi_a1);
    const double dur_dz = -unit_step(-u) * u_s;
    out.d_z = -scale * (window_derivative(z, p.window) - w * dphi_dz) * sh -
              scale * w * ch * dur_dz / u_ref;
    return out;
}

} // namespace dbmd
