#include "dbmd/params.hpp"

#include "dbmd/errors.hpp"

#include <cmath>
#include <string>

namespace dbmd {

namespace {

void require(bool ok, const std::string& field, const std::string& rule) {
    if (!ok)
        throw invalid_parameter_error(field + ": " + rule);
}

} // namespace

void validate(const DeviceParameters& params) {
    const auto& c = params.constants;
    require(c.boltzmann > 0 && c.elementary_charge > 0 && c.planck > 0 &&
                c.electron_mass > 0 && c.vacuum_permittivity > 0,
            "constants", "must all be strictly positive");

    require(params.env.temperature > 0, "temperature", "must be > 0 K");

    const auto& g = params.geometry;
    require(g.electrolyte_width > 0, "electrolyte_width", "must be > 0 m");
    require(g.schottky_thickness > 0, "schottky_thickness", "must be > 0 m");
    require(g.tunnel_thickness_abs > 0, "tunnel_thickness", "must be > 0 m");
    require(g.hop_distance > 0, "hop_distance", "must be > 0 m");
    require(g.hop_distance <= g.electrolyte_width, "hop_distance",
            "must not exceed electrolyte_width");
    require(g.cross_section > 0, "cross_section", "must be > 0 m^2");
    require(g.x_min == 0.0, "x_min", "is fixed to 0");
    require(g.x_max == g.electrolyte_width / 2.0, "x_max",
            "is fixed to electrolyte_width/2");

    const auto& k = params.kinetics;
    require(k.hop_frequency > 0, "hop_frequency", "must be > 0 Hz");
    require(k.charge_number >= 1 && k.charge_number == std::floor(k.charge_number),
            "charge_number", "must be an integer >= 1");
    require(k.phi_a0 >= 0, "phi_a0", "must be >= 0");
    require(k.phi_a1 >= 0, "phi_a1", "must be >= 0");
    require(k.phi_ar >= 0, "phi_ar", "must be >= 0");

    const auto& w = params.window;
    require(w.offset > 0 && w.offset < 0.5, "window_offset", "must lie in (0, 1/2)");
    require(w.steepness >= 1, "window_steepness", "must be an integer >= 1");

    const auto& s = params.schottky;
    require(s.phi_s0 > 0, "phi_s0", "must be > 0");
    require(s.phi_s1 >= s.phi_s0, "phi_s1", "must be >= phi_s0 (z=1 is the high barrier)");
    require(s.n0 >= 1, "n0", "must be >= 1");
    require(s.n1 >= 1, "n1", "must be >= 1");
    require(s.richardson > 0, "richardson", "must be > 0");
    require(s.relative_permittivity >= 1, "relative_permittivity", "must be >= 1");

    const auto& t = params.tunnel;
    require(t.phi_t0 > 0, "phi_t0", "must be > 0");
    require(t.alpha_t0 > 0, "alpha_t0", "must be > 0");
    require(t.alpha_t1 >= t.alpha_t0, "alpha_t1",
            "must be >= alpha_t0 (z=1 is the thicker effective barrier)");

    const auto& e = params.electrolyte;
    require(e.r_e0 > 0, "r_e0", "must be > 0 Ohm");
    require(e.r_e1 >= e.r_e0, "r_e1", "must be >= r_e0");
}

DerivedQuantities derive_quantities(const DeviceParameters& params) {
    validate(params);

    const auto& c = params.constants;
    const auto& g = params.geometry;
    const double theta = params.env.temperature;
    const double pi = 3.14159265358979323846;

    DerivedQuantities d{};
    d.thermal_voltage = c.boltzmann * theta / c.elementary_charge;
    d.ref_electrolyte_voltage = (2.0 / params.kinetics.charge_number) *
                                (g.electrolyte_width / g.hop_distance) * d.thermal_voltage;
    d.drift_amplitude =
        2.0 * params.kinetics.hop_frequency * g.hop_distance / (g.x_max - g.x_min);
    d.schottky_norm_length =
        c.elementary_charge * c.elementary_charge /
        (4.0 * pi * c.vacuum_permittivity * params.schottky.relative_permittivity *
         c.boltzmann * theta);
    d.norm_schottky_thickness = 2.0 * g.schottky_thickness / d.schottky_norm_length;
    d.schottky_scale = params.schottky.richardson * g.cross_section * theta * theta;
    d.tunnel_norm_length =
        c.planck / (4.0 * pi * std::sqrt(2.0 * c.electron_mass * c.boltzmann * theta));
    d.tunnel_scale = (g.cross_section / (d.tunnel_norm_length * d.tunnel_norm_length)) *
                     (c.boltzmann * c.elementary_charge / (2.0 * pi * c.planck)) * theta;
    return d;
}

} // namespace dbmd
