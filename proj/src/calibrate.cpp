#include "dbmd/calibrate.hpp"

#include "dbmd/batch.hpp"
#include "dbmd/config.hpp"
#include "dbmd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace dbmd {

void validate(const Dataset& data) {
    if (data.records.empty())
        throw invalid_parameter_error("records: dataset is empty");
    if (!(data.area > 0.0))
        throw invalid_parameter_error("area: must be > 0 m^2");
    for (std::size_t k = 0; k < data.records.size(); ++k) {
        const DataPoint& r = data.records[k];
        if (!std::isfinite(r.t) || !std::isfinite(r.e) || !std::isfinite(r.i))
            throw invalid_parameter_error("records: non-finite entry at index " +
                                          std::to_string(k));
        if (k > 0 && !(r.t > data.records[k - 1].t))
            throw invalid_parameter_error("records: t must strictly increase (index " +
                                          std::to_string(k) + ")");
    }
}

void validate(const FitSpec& spec) {
    DeviceParameters scratch = default_parameters();
    std::set<std::string> names;
    for (const FreeParameter& fp : spec.free_parameters) {
        if (!param_field(scratch, fp.name))
            throw invalid_parameter_error("free." + fp.name + ": unknown parameter key");
        if (!names.insert(fp.name).second)
            throw invalid_parameter_error("free." + fp.name + ": declared twice");
        if (!(std::isfinite(fp.lower) && std::isfinite(fp.upper) && fp.lower < fp.upper))
            throw invalid_parameter_error("free." + fp.name +
                                          ": bounds must be finite with lower < upper");
        if (!(fp.initial >= fp.lower && fp.initial <= fp.upper))
            throw invalid_parameter_error("free." + fp.name +
                                          ": initial must lie within [lower, upper]");
    }
    for (double w : spec.weights)
        if (!(w > 0.0))
            throw invalid_parameter_error("weights: must be > 0");
}

double log_current_error(const TimeSeries& sim, const Dataset& data) {
    validate(data);
    const auto& s = sim.samples;
    if (s.size() < 2)
        throw invalid_parameter_error("sim: needs at least 2 samples");
    const double t0 = data.records.front().t;
    const double t1 = data.records.back().t;
    const double slack = 1e-9 * std::max(1.0, std::abs(t1));
    if (t0 < s.front().t - slack || t1 > s.back().t + slack)
        throw span_mismatch_error("simulated span [" + std::to_string(s.front().t) + ", " +
                                  std::to_string(s.back().t) +
                                  "] s does not cover dataset span [" + std::to_string(t0) +
                                  ", " + std::to_string(t1) + "] s");

    auto scaled = [](double i) { return std::asinh(i / kReferenceCurrent); };
    double sum = 0.0;
    std::size_t j = 0;
    for (const DataPoint& r : data.records) {
        while (j + 1 < s.size() && s[j + 1].t <= r.t)
            ++j;
        double y_sim;
        if (r.t <= s[j].t || j + 1 == s.size()) {
            y_sim = scaled(s[j].i);
        } else {
            const double f = (r.t - s[j].t) / (s[j + 1].t - s[j].t);
            const double ya = scaled(s[j].i);
            y_sim = ya + f * (scaled(s[j + 1].i) - ya);
        }
        const double d = y_sim - scaled(r.i);
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(data.records.size()));
}

double fit_objective(const DeviceParameters& p, const CircuitConfig& cfg,
                     const std::vector<Dataset>& datasets, const std::vector<double>& weights,
                     const IntegratorSettings& integ, std::size_t sim_samples,
                     std::vector<double>* residuals) {
    if (datasets.empty())
        throw invalid_parameter_error("datasets: need at least one");
    if (!weights.empty() && weights.size() != datasets.size())
        throw invalid_parameter_error("weights: size must match the dataset count");
    if (residuals)
        residuals->assign(datasets.size(), 0.0);
    std::vector<double> rmse(datasets.size());
    parallel_for(datasets.size(), [&](std::size_t k) {
        const Dataset& ds = datasets[k];
        WaveformSpec wf;
        wf.kind = WaveformKind::piecewise_linear;
        wf.breakpoints.reserve(ds.records.size());
        for (const DataPoint& r : ds.records)
            wf.breakpoints.emplace_back(r.t, r.e);
        const TimeSeries sim = integrate(p, cfg, wf, integ, 1.0, sim_samples);
        rmse[k] = log_current_error(sim, ds);
    });
    double total = 0.0;
    for (std::size_t k = 0; k < datasets.size(); ++k) {
        if (residuals)
            (*residuals)[k] = rmse[k];
        total += (weights.empty() ? 1.0 : weights[k]) * rmse[k];
    }
    return total;
}

namespace {

// A candidate scoring this is out of the feasible region (simulation failed); finite so
// the simplex can still order and move away from it.
constexpr double kPenalty = 1e50;

double to_transformed(const FreeParameter& fp, double value) {
    const double f =
        std::clamp((value - fp.lower) / (fp.upper - fp.lower), 1e-12, 1.0 - 1e-12);
    return std::log(f / (1.0 - f));
}

double to_parameter(const FreeParameter& fp, double x) {
    const double xc = std::clamp(x, -40.0, 40.0);
    return fp.lower + (fp.upper - fp.lower) / (1.0 + std::exp(-xc));
}

} // namespace

FitResult fit(const FitSpec& spec, const std::vector<Dataset>& datasets,
              const DeviceParameters& base, const CircuitConfig& cfg,
              const FitSettings& settings) {
    validate(spec);
    if (datasets.empty())
        throw invalid_parameter_error("datasets: need at least one");
    if (!spec.weights.empty() && spec.weights.size() != datasets.size())
        throw invalid_parameter_error("weights: size must match the dataset count");
    for (const Dataset& d : datasets)
        validate(d);
    if (settings.restarts < 1)
        throw invalid_parameter_error("restarts: must be >= 1");

    const std::size_t n = spec.free_parameters.size();
    long evals = 0;

    auto make_params = [&](const std::vector<double>& x) {
        DeviceParameters p = base;
        for (std::size_t k = 0; k < n; ++k)
            *param_field(p, spec.free_parameters[k].name) =
                to_parameter(spec.free_parameters[k], x[k]);
        normalize_geometry(p);
        return p;
    };

    auto objective = [&](const std::vector<double>& x) -> double {
        try {
            return fit_objective(make_params(x), cfg, datasets, spec.weights,
                                 settings.integrator, settings.sim_samples);
        } catch (const std::exception&) {
            return kPenalty;
        }
    };

    FitResult result;

    if (n == 0) {
        DeviceParameters p = base;
        normalize_geometry(p);
        result.best_parameters = p;
        result.objective_value =
            fit_objective(p, cfg, datasets, spec.weights, settings.integrator,
                          settings.sim_samples, &result.per_dataset_residuals);
        result.evaluations = 1;
        result.converged = true;
        return result;
    }

    std::vector<double> x_init(n);
    for (std::size_t k = 0; k < n; ++k)
        x_init[k] = to_transformed(spec.free_parameters[k], spec.free_parameters[k].initial);

    const double f_init = objective(x_init);
    ++evals;

    double best_f = f_init;
    std::vector<double> best_x = x_init;

    std::mt19937 rng(settings.seed);

    // Each restart gets an even share of the budget; otherwise the first simplex burns
    // everything polishing whatever basin it found first.
    const long per_restart = std::max<long>(
        static_cast<long>(n) + 2, settings.max_evaluations / settings.restarts);

    for (int restart = 0; restart < settings.restarts && evals < settings.max_evaluations;
         ++restart) {
        const long restart_cap = std::min(settings.max_evaluations, evals + per_restart);
        // Coarse to fine: each restart reseeds a fresh simplex around the best point so
        // far, with the span and the jitter halved every round. Early restarts explore
        // (and undo any simplex degeneration at a penalty wall); the final restart
        // polishes the best point unperturbed.
        const double decay = std::pow(0.5, static_cast<double>(restart));
        std::vector<double> x0 = restart == 0 ? x_init : best_x;
        if (restart > 0 && restart + 1 < settings.restarts) {
            const double width = 2.0 * settings.jitter * decay;
            std::uniform_real_distribution<double> jit(-width, width);
            for (double& v : x0)
                v += jit(rng);
        }

        std::vector<std::vector<double>> X(n + 1, x0);
        const double edge = std::max(0.05, decay);
        for (std::size_t k = 0; k < n; ++k)
            X[k + 1][k] += edge;
        std::vector<double> F(n + 1);
        parallel_for(n + 1, [&](std::size_t k) { F[k] = objective(X[k]); });
        evals += static_cast<long>(n) + 1;

        while (evals < restart_cap) {
            std::vector<std::size_t> idx(n + 1);
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            std::stable_sort(idx.begin(), idx.end(),
                             [&](std::size_t a, std::size_t b) { return F[a] < F[b]; });
            std::vector<std::vector<double>> Xs(n + 1);
            std::vector<double> Fs(n + 1);
            for (std::size_t k = 0; k <= n; ++k) {
                Xs[k] = X[idx[k]];
                Fs[k] = F[idx[k]];
            }
            X = std::move(Xs);
            F = std::move(Fs);

            if (F[n] - F[0] <= settings.tolerance * (std::abs(F[0]) + settings.tolerance))
                break;

            std::vector<double> centroid(n, 0.0);
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t d = 0; d < n; ++d)
                    centroid[d] += X[k][d] / static_cast<double>(n);

            auto blend = [&](double w) {
                std::vector<double> x(n);
                for (std::size_t d = 0; d < n; ++d)
                    x[d] = centroid[d] + w * (centroid[d] - X[n][d]);
                return x;
            };
            const std::vector<double> xr = blend(1.0);
            const double fr = objective(xr);
            ++evals;

            bool shrink = false;
            if (fr < F[0]) {
                const std::vector<double> xe = blend(2.0);
                const double fe = objective(xe);
                ++evals;
                if (fe < fr) {
                    X[n] = xe;
                    F[n] = fe;
                } else {
                    X[n] = xr;
                    F[n] = fr;
                }
            } else if (fr < F[n - 1]) {
                X[n] = xr;
                F[n] = fr;
            } else if (fr < F[n]) {
                const std::vector<double> xc = blend(0.5);
                const double fc = objective(xc);
                ++evals;
                if (fc <= fr) {
                    X[n] = xc;
                    F[n] = fc;
                } else {
                    shrink = true;
                }
            } else {
                const std::vector<double> xc = blend(-0.5);
                const double fc = objective(xc);
                ++evals;
                if (fc < F[n]) {
                    X[n] = xc;
                    F[n] = fc;
                } else {
                    shrink = true;
                }
            }
            if (shrink) {
                for (std::size_t k = 1; k <= n; ++k)
                    for (std::size_t d = 0; d < n; ++d)
                        X[k][d] = X[0][d] + 0.5 * (X[k][d] - X[0][d]);
                parallel_for(n, [&](std::size_t k) { F[k + 1] = objective(X[k + 1]); });
                evals += static_cast<long>(n);
            }
        }

        for (std::size_t k = 0; k <= n; ++k) {
            if (F[k] < best_f) {
                best_f = F[k];
                best_x = X[k];
            }
        }
    }

    result.best_parameters = make_params(best_x);
    try {
        result.objective_value =
            fit_objective(result.best_parameters, cfg, datasets, spec.weights,
                          settings.integrator, settings.sim_samples,
                          &result.per_dataset_residuals);
        ++evals;
    } catch (const std::exception& e) {
        result.objective_value = kPenalty;
        result.per_dataset_residuals.clear();
        result.diagnostics = std::string("best candidate no longer evaluates: ") + e.what();
    }
    result.evaluations = evals;
    result.converged = result.diagnostics.empty() && best_f < f_init;
    if (!result.converged && result.diagnostics.empty()) {
        char msg[128];
        std::snprintf(msg, sizeof(msg),
                      "no restart improved on the objective at the declared initials "
                      "(%.6g after %ld evaluations)",
                      f_init, evals);
        result.diagnostics = msg;
    }
    return result;
}

} // namespace dbmd
