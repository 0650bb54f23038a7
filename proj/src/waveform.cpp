#include "dbmd/waveform.hpp"

#include "dbmd/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dbmd {

void validate(const WaveformSpec& spec) {
    switch (spec.kind) {
    case WaveformKind::triangle:
        if (!(spec.period > 0.0))
            throw invalid_parameter_error("period: must be > 0 s");
        if (!(spec.pos_peak >= 0.0))
            throw invalid_parameter_error("pos_peak: must be >= 0 V");
        if (!(spec.neg_peak <= 0.0))
            throw invalid_parameter_error("neg_peak: must be <= 0 V");
        break;
    case WaveformKind::step:
        if (!(spec.duration > 0.0))
            throw invalid_parameter_error("duration: must be > 0 s");
        break;
    case WaveformKind::piecewise_linear: {
        if (spec.breakpoints.empty())
            throw invalid_parameter_error("breakpoints: piecewise-linear needs >= 1 knot");
        for (std::size_t k = 0; k < spec.breakpoints.size(); ++k) {
            if (!std::isfinite(spec.breakpoints[k].first) ||
                !std::isfinite(spec.breakpoints[k].second))
                throw invalid_parameter_error("breakpoints: knots must be finite");
            if (k > 0 && !(spec.breakpoints[k].first > spec.breakpoints[k - 1].first))
                throw invalid_parameter_error("breakpoints: knot times must strictly increase");
        }
        break;
    }
    }
}

double waveform_eval(const WaveformSpec& spec, double t) {
    if (t < 0.0)
        throw invalid_parameter_error("t: must be >= 0 s");
    switch (spec.kind) {
    case WaveformKind::triangle: {
        const double T = spec.period;
        double tau = std::fmod(t, T);
        const double q = tau / (T / 4.0); // quarter-period phase in [0, 4)
        if (q <= 1.0)
            return spec.pos_peak * q;
        if (q <= 2.0)
            return spec.pos_peak * (2.0 - q);
        if (q <= 3.0)
            return spec.neg_peak * (q - 2.0);
        return spec.neg_peak * (4.0 - q);
    }
    case WaveformKind::step:
        return spec.amplitude;
    case WaveformKind::piecewise_linear: {
        const auto& bp = spec.breakpoints;
        if (t <= bp.front().first)
            return bp.front().second;
        if (t >= bp.back().first)
            return bp.back().second;
        auto hi = std::upper_bound(bp.begin(), bp.end(), t,
                                   [](double v, const auto& k) { return v < k.first; });
        auto lo = hi - 1;
        const double f = (t - lo->first) / (hi->first - lo->first);
        return lo->second + f * (hi->second - lo->second);
    }
    }
    return 0.0;
}

double waveform_span(const WaveformSpec& spec) {
    switch (spec.kind) {
    case WaveformKind::triangle:
        return spec.period;
    case WaveformKind::step:
        return spec.duration;
    case WaveformKind::piecewise_linear:
        return spec.breakpoints.back().first;
    }
    return 0.0;
}

std::vector<double> waveform_landmarks(const WaveformSpec& spec, double t_end) {
    std::vector<double> marks{0.0};
    switch (spec.kind) {
    case WaveformKind::triangle: {
        const double q = spec.period / 4.0;
        for (double t = q; t <= t_end; t += q)
            marks.push_back(t);
        break;
    }
    case WaveformKind::step:
        break;
    case WaveformKind::piecewise_linear: {
        const auto& bp = spec.breakpoints;
        for (const auto& [t, v] : bp)
            if (t >= 0.0 && t <= t_end)
                marks.push_back(t);
        for (std::size_t k = 1; k < bp.size(); ++k) {
            const auto& [t0, v0] = bp[k - 1];
            const auto& [t1, v1] = bp[k];
            if (v0 * v1 < 0.0) {
                const double tc = t0 + (0.0 - v0) * (t1 - t0) / (v1 - v0);
                if (tc >= 0.0 && tc <= t_end)
                    marks.push_back(tc);
            }
        }
        break;
    }
    }
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
    return marks;
}

} // namespace dbmd
