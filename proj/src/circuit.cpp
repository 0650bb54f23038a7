#include "dbmd/circuit.hpp"

#include "dbmd/errors.hpp"
#include "dbmd/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dbmd {

void validate(const CircuitConfig& cfg) {
    if (!(cfg.source_resistance > 0.0))
        throw invalid_parameter_error("source_resistance: must be > 0 Ohm");
    if (cfg.c_e < 0.0 || cfg.c_t < 0.0)
        throw invalid_parameter_error("c_e/c_t: must be >= 0 F");
    if (cfg.mode == CircuitMode::capacitive && !(cfg.c_e > 0.0 && cfg.c_t > 0.0))
        throw invalid_parameter_error("mode: capacitive mode requires c_e > 0 and c_t > 0");
}

void validate(const SolverSettings& s) {
    if (!(s.abs_tol_current > 0.0) || !(s.rel_tol > 0.0))
        throw invalid_parameter_error("abs_tol_current/rel_tol: must be > 0");
    if (s.max_iterations < 1)
        throw invalid_parameter_error("max_iterations: must be >= 1");
    if (!(s.damping > 0.0 && s.damping <= 1.0))
        throw invalid_parameter_error("damping: must lie in (0, 1]");
    if (!(s.bracket_expansion > 1.0))
        throw invalid_parameter_error("bracket_expansion: must be > 1");
}

KclResiduals kcl_residual(double u_s, double u_e, double u_t, double e, double z,
                          const CircuitConfig& cfg, const DeviceParameters& p,
                          const DerivedQuantities& d) {
    const double i_schottky = schottky_current(u_s, z, p, d);
    const double r_e = linear_state_param(p.electrolyte.r_e0, p.electrolyte.r_e1, z);
    KclResiduals r{};
    r.r1 = i_schottky - u_e / r_e;
    r.r2 = i_schottky - tunnel_current(u_t, z, p, d);
    r.r3 = i_schottky - (e - u_s - u_e - u_t) / cfg.source_resistance;
    return r;
}

namespace {

OperatingPoint zero_point() {
    OperatingPoint op{};
    op.converged = true;
    return op;
}

// Convergence contract: region currents agree within abs_tol_current (+rel slack),
// KVL closes within rel_tol*|e| + 1e-12 V. The raw r3 has an FP cancellation floor
// of about |e|*eps/R_0, which is why it is tested in voltage form.
bool residuals_ok(const KclResiduals& r, double i, double e, double r0,
                  const SolverSettings& s) {
    const double cur_tol = s.abs_tol_current + s.rel_tol * std::fabs(i);
    const double kvl_tol = s.rel_tol * std::fabs(e) + 1e-12;
    return std::fabs(r.r1) <= cur_tol && std::fabs(r.r2) <= cur_tol &&
           std::fabs(r.r3) * r0 <= kvl_tol;
}

double norm2(const KclResiduals& r) {
    return std::sqrt(r.r1 * r.r1 + r.r2 * r.r2 + r.r3 * r.r3);
}

double max_abs(const KclResiduals& r) {
    return std::max({std::fabs(r.r1), std::fabs(r.r2), std::fabs(r.r3)});
}

// Gaussian elimination with partial pivoting on the 3x3 Newton system J dx = -F.
bool solve3(double J[3][3], const KclResiduals& F, double dx[3]) {
    double a[3][4] = {{J[0][0], J[0][1], J[0][2], -F.r1},
                      {J[1][0], J[1][1], J[1][2], -F.r2},
                      {J[2][0], J[2][1], J[2][2], -F.r3}};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int row = col + 1; row < 3; ++row)
            if (std::fabs(a[row][col]) > std::fabs(a[piv][col]))
                piv = row;
        if (a[piv][col] == 0.0)
            return false;
        if (piv != col)
            for (int k = col; k < 4; ++k)
                std::swap(a[piv][k], a[col][k]);
        for (int row = col + 1; row < 3; ++row) {
            const double f = a[row][col] / a[col][col];
            for (int k = col; k < 4; ++k)
                a[row][k] -= f * a[col][k];
        }
    }
    for (int row = 2; row >= 0; --row) {
        double s = a[row][3];
        for (int k = row + 1; k < 3; ++k)
            s -= a[row][k] * dx[k];
        dx[row] = s / a[row][row];
        if (!std::isfinite(dx[row]))
            return false;
    }
    return true;
}

// Inverse of i_t at fixed z, restricted to the monotone range; saturates at the
// range edge for out-of-range targets (only reachable by probing iterates).
double tunnel_inverse(double i_target, double z, const DeviceParameters& p,
                      const DerivedQuantities& d) {
    if (i_target == 0.0)
        return 0.0;
    if (i_target < 0.0)
        return -tunnel_inverse(-i_target, z, p, d);
    const double bound = tunnel_monotone_bound(z, p, d);
    if (tunnel_current(bound, z, p, d) <= i_target)
        return bound;
    double lo = 0.0, hi = bound;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi)
            break;
        (tunnel_current(mid, z, p, d) < i_target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

OperatingPoint finish_point(double u_s, double u_e, double u_t, double e, double z,
                            const CircuitConfig& cfg, const DeviceParameters& p,
                            const DerivedQuantities& d, const SolverSettings& settings,
                            int iterations) {
    OperatingPoint op{};
    op.u_s = u_s;
    op.u_e = u_e;
    op.u_t = u_t;
    op.u = u_s + u_e + u_t;
    op.i = schottky_current(u_s, z, p, d);
    const KclResiduals r = kcl_residual(u_s, u_e, u_t, e, z, cfg, p, d);
    op.residual_norm = max_abs(r);
    op.converged = residuals_ok(r, op.i, e, cfg.source_resistance, settings);
    op.iterations = iterations;
    return op;
}

} // namespace

OperatingPoint solve_operating_point_bracketed(double e, double z, const CircuitConfig& cfg,
                                               const DeviceParameters& p,
                                               const DerivedQuantities& d,
                                               const SolverSettings& settings) {
    validate(cfg);
    validate(settings);
    if (cfg.mode != CircuitMode::quasi_static)
        throw invalid_parameter_error("mode: operating-point solve requires quasi-static mode");
    if (e == 0.0)
        return zero_point();

    const double r_e = linear_state_param(p.electrolyte.r_e0, p.electrolyte.r_e1, z);
    // Strictly increasing in u_s: every series element is monotone through the origin.
    auto gap = [&](double u_s) {
        const double i = schottky_current(u_s, z, p, d);
        return u_s + cfg.source_resistance * i + r_e * i + tunnel_inverse(i, z, p, d) - e;
    };

    double lo = std::min(0.0, e) - 1.0;
    double hi = std::max(0.0, e) + 1.0;
    bool bracketed = false;
    for (int k = 0; k < 60; ++k) {
        if (gap(lo) <= 0.0 && gap(hi) >= 0.0) {
            bracketed = true;
            break;
        }
        const double width = hi - lo;
        lo -= 0.5 * (settings.bracket_expansion - 1.0) * width;
        hi += 0.5 * (settings.bracket_expansion - 1.0) * width;
    }
    if (!bracketed)
        throw solver_failure_error("no sign change for u_s in [" + std::to_string(lo) + ", " +
                                   std::to_string(hi) + "] at e=" + std::to_string(e) +
                                   " V, z=" + std::to_string(z));

    int iterations = 0;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi)
            break;
        ++iterations;
        (gap(mid) < 0.0 ? lo : hi) = mid;
    }
    const double u_s = 0.5 * (lo + hi);
    const double i = schottky_current(u_s, z, p, d);
    return finish_point(u_s, r_e * i, tunnel_inverse(i, z, p, d), e, z, cfg, p, d, settings,
                        iterations);
}

OperatingPoint solve_operating_point(double e, double z, const CircuitConfig& cfg,
                                     const DeviceParameters& p, const DerivedQuantities& d,
                                     const SolverSettings& settings,
                                     const OperatingPoint* warm_start) {
    validate(cfg);
    validate(settings);
    if (cfg.mode != CircuitMode::quasi_static)
        throw invalid_parameter_error("mode: operating-point solve requires quasi-static mode");
    if (e == 0.0)
        return zero_point();

    const double r0 = cfg.source_resistance;
    const double r_e = linear_state_param(p.electrolyte.r_e0, p.electrolyte.r_e1, z);
    const double t_bound = tunnel_monotone_bound(z, p, d);

    double u_s, u_e, u_t;
    if (warm_start != nullptr && warm_start->converged) {
        u_s = warm_start->u_s;
        u_e = warm_start->u_e;
        u_t = std::clamp(warm_start->u_t, -t_bound, t_bound);
    } else if (e < 0.0) {
        u_s = e; // reverse-biased diode blocks; start with the full drop on the Schottky region
        u_e = 0.0;
        u_t = 0.0;
    } else {
        const double g_t = tunnel_current_derivative(0.0, z, p, d);
        const double i0 = e / (r0 + r_e + 1.0 / g_t);
        const double phi_s = linear_state_param(p.schottky.phi_s0, p.schottky.phi_s1, z);
        const double n_uth =
            linear_state_param(p.schottky.n0, p.schottky.n1, z) * d.thermal_voltage;
        u_s = std::min(e, n_uth * std::log1p(i0 / (d.schottky_scale * std::exp(-phi_s))));
        u_e = std::min(e, r_e * i0);
        u_t = std::clamp(i0 / g_t, 0.0, std::min(e, 0.9 * t_bound));
    }

    KclResiduals F = kcl_residual(u_s, u_e, u_t, e, z, cfg, p, d);
    int iterations = 0;
    int polish_left = 2;
    bool stalled = false;
    while (iterations < settings.max_iterations) {
        const double i = schottky_current(u_s, z, p, d);
        if (residuals_ok(F, i, e, r0, settings)) {
            if (polish_left == 0 || max_abs(F) == 0.0)
                return finish_point(u_s, u_e, u_t, e, z, cfg, p, d, settings, iterations);
            --polish_left;
        }
        ++iterations;

        const double dis = schottky_current_derivative(u_s, z, p, d);
        const double dit = tunnel_current_derivative(u_t, z, p, d);
        double J[3][3] = {{dis, -1.0 / r_e, 0.0},
                          {dis, 0.0, -dit},
                          {dis + 1.0 / r0, 1.0 / r0, 1.0 / r0}};
        double dx[3];
        if (!solve3(J, F, dx)) {
            stalled = true;
            break;
        }

        const double f0 = norm2(F);
        double lambda = settings.damping;
        bool accepted = false;
        for (int back = 0; back < 40; ++back) {
            const double ts = u_s + lambda * dx[0];
            const double te = u_e + lambda * dx[1];
            const double tt = std::clamp(u_t + lambda * dx[2], -t_bound, t_bound);
            const KclResiduals Ft = kcl_residual(ts, te, tt, e, z, cfg, p, d);
            if (norm2(Ft) < f0) {
                u_s = ts;
                u_e = te;
                u_t = tt;
                F = Ft;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            // residual no longer improves: either done to FP precision or stalled
            if (residuals_ok(F, schottky_current(u_s, z, p, d), e, r0, settings))
                return finish_point(u_s, u_e, u_t, e, z, cfg, p, d, settings, iterations);
            stalled = true;
            break;
        }
    }

    if (!stalled) {
        OperatingPoint op = finish_point(u_s, u_e, u_t, e, z, cfg, p, d, settings, iterations);
        if (op.converged)
            return op;
    }
    OperatingPoint op = solve_operating_point_bracketed(e, z, cfg, p, d, settings);
    op.used_fallback = true;
    return op;
}

TransientRhs transient_rhs(double u_e, double u_t, double z, double e,
                           const CircuitConfig& cfg, const DeviceParameters& p,
                           const DerivedQuantities& d) {
    validate(cfg);
    if (cfg.mode != CircuitMode::capacitive)
        throw invalid_parameter_error("mode: transient_rhs requires capacitive mode");
    if (e == 0.0 && u_e == 0.0 && u_t == 0.0)
        return TransientRhs{0.0, 0.0, 0.0};

    const double r0 = cfg.source_resistance;
    const double rhs0 = e - u_e - u_t;
    // i = i_s(u_s, z) with u_s = e - R_0 i - u_e - u_t; strictly increasing in u_s.
    auto gap = [&](double u_s) {
        return schottky_current(u_s, z, p, d) - (rhs0 - u_s) / r0;
    };
    double lo = std::min(0.0, rhs0) - 1.0;
    double hi = std::max(0.0, rhs0) + 1.0;
    bool bracketed = false;
    for (int k = 0; k < 60; ++k) {
        if (gap(lo) <= 0.0 && gap(hi) >= 0.0) {
            bracketed = true;
            break;
        }
        const double width = hi - lo;
        lo -= 0.5 * width;
        hi += 0.5 * width;
    }
    if (!bracketed)
        throw solver_failure_error("transient scalar solve found no bracket at e=" +
                                   std::to_string(e) + " V, z=" + std::to_string(z));
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi)
            break;
        (gap(mid) < 0.0 ? lo : hi) = mid;
    }
    const double u_s = 0.5 * (lo + hi);
    const double i = schottky_current(u_s, z, p, d);
    const double r_e = linear_state_param(p.electrolyte.r_e0, p.electrolyte.r_e1, z);
    TransientRhs out{};
    out.i = i;
    out.due_dt = (i - u_e / r_e) / cfg.c_e;
    out.dut_dt = (i - tunnel_current(u_t, z, p, d)) / cfg.c_t;
    return out;
}

} // namespace dbmd
