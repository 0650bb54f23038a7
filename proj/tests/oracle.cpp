#include "oracle.hpp"

#include <cmath>

namespace oracle {

namespace {

constexpr long double kPi = 3.14159265358979323846264338327950288L;

long double step(long double xi) { return xi > 0.0L ? 1.0L : 0.0L; }

} // namespace

Derived derive(const dbmd::DeviceParameters& p) {
    const long double kb = p.constants.boltzmann;
    const long double qe = p.constants.elementary_charge;
    const long double h = p.constants.planck;
    const long double me = p.constants.electron_mass;
    const long double eps0 = p.constants.vacuum_permittivity;
    const long double theta = p.env.temperature;

    Derived d{};
    d.thermal_voltage = kb * theta / qe;
    d.ref_electrolyte_voltage =
        (2.0L / static_cast<long double>(p.kinetics.charge_number)) *
        (static_cast<long double>(p.geometry.electrolyte_width) /
         static_cast<long double>(p.geometry.hop_distance)) *
        d.thermal_voltage;
    d.drift_amplitude = 2.0L * static_cast<long double>(p.kinetics.hop_frequency) *
                        static_cast<long double>(p.geometry.hop_distance) /
                        (static_cast<long double>(p.geometry.x_max) -
                         static_cast<long double>(p.geometry.x_min));
    d.schottky_norm_length =
        qe * qe /
        (4.0L * kPi * eps0 * static_cast<long double>(p.schottky.relative_permittivity) *
         kb * theta);
    d.norm_schottky_thickness =
        2.0L * static_cast<long double>(p.geometry.schottky_thickness) /
        d.schottky_norm_length;
    d.schottky_scale = static_cast<long double>(p.schottky.richardson) *
                       static_cast<long double>(p.geometry.cross_section) * theta * theta;
    d.tunnel_norm_length = h / (4.0L * kPi * sqrtl(2.0L * me * kb * theta));
    d.tunnel_scale = (static_cast<long double>(p.geometry.cross_section) /
                      (d.tunnel_norm_length * d.tunnel_norm_length)) *
                     (kb * qe / (2.0L * kPi * h)) * theta;
    return d;
}

long double arrhenius(long double phi_a, long double nu) { return nu * expl(-phi_a); }

long double window(long double z, const dbmd::WindowParams& wp) {
    const long double y = 4.0L * z * (1.0L - z); // 1 - (2z-1)^2, kept product-form
    const long double q = 1.0L - y;
    long double geo = 0.0L;
    long double qk = 1.0L;
    for (int j = 0; j < wp.steepness; ++j) {
        geo += qk;
        qk *= q;
    }
    const long double w0 = static_cast<long double>(wp.offset);
    return (1.0L - 2.0L * w0) * y * geo + w0;
}

long double window_derivative(long double z, const dbmd::WindowParams& wp) {
    const long double s = 2.0L * z - 1.0L;
    long double s_pow = 1.0L; // s^(2p-1)
    for (int j = 0; j < 2 * wp.steepness - 1; ++j)
        s_pow *= s;
    const long double w0 = static_cast<long double>(wp.offset);
    return -(1.0L - 2.0L * w0) * 4.0L * static_cast<long double>(wp.steepness) * s_pow;
}

long double activation_energy(long double u, long double z, const dbmd::IonKinetics& k) {
    const long double a0 = k.phi_a0;
    const long double a1 = k.phi_a1;
    const long double ar = k.phi_ar;
    return step(u) * (a1 + z * (a0 - a1) - ar) + ar;
}

long double reset_coupling(long double u, long double u_s, long double z) {
    return step(-u) * (1.0L - z) * u_s;
}

long double linear_state_param(long double v0, long double v1, long double z) {
    return v0 + z * (v1 - v0);
}

long double schottky_current(long double u_s, long double z, const dbmd::DeviceParameters& p,
                             const Derived& d) {
    const long double phi = linear_state_param(p.schottky.phi_s0, p.schottky.phi_s1, z);
    const long double n = linear_state_param(p.schottky.n0, p.schottky.n1, z);
    const long double lowering =
        static_cast<long double>(p.schottky.alpha_f) *
        sqrtl((fabsl(u_s) - u_s) / (d.norm_schottky_thickness * d.thermal_voltage));
    return d.schottky_scale * expl(-(phi + lowering)) *
           expm1l(u_s / (n * d.thermal_voltage));
}

long double tunnel_current(long double u_t, long double z, const dbmd::DeviceParameters& p,
                           const Derived& d) {
    const long double alpha = linear_state_param(p.tunnel.alpha_t0, p.tunnel.alpha_t1, z);
    const long double phi0 = p.tunnel.phi_t0;
    auto g = [&](long double v) {
        const long double phi = phi0 + v / (2.0L * d.thermal_voltage);
        return phi * expl(-alpha * sqrtl(phi));
    };
    return d.tunnel_scale * (g(-u_t) - g(u_t)) / (alpha * alpha);
}

long double state_derivative(long double u, long double u_s, long double u_e, long double z,
                             const dbmd::DeviceParameters& p, const Derived& d) {
    const long double u_r = reset_coupling(u, u_s, z);
    const long double arg =
        (u_r + u_e - static_cast<long double>(p.kinetics.coulomb_voltage)) /
        d.ref_electrolyte_voltage;
    return -d.drift_amplitude * window(z, p.window) *
           expl(-activation_energy(u, z, p.kinetics)) * sinhl(arg);
}

} // namespace oracle
