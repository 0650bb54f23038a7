#include "dbmd/config.hpp"

#include "dbmd/csv.hpp"
#include "dbmd/errors.hpp"

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace dbmd {

namespace {

std::string trim(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    const std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string with_origin(const std::string& origin, const std::string& msg) {
    return origin.empty() ? msg : origin + ": " + msg;
}

struct ConfigLine {
    int no;
    std::string key;
    std::string value;
};

std::vector<ConfigLine> tokenize(const std::string& text, const std::string& origin) {
    std::vector<ConfigLine> lines;
    std::istringstream in(text);
    std::string raw;
    int no = 0;
    while (std::getline(in, raw)) {
        ++no;
        const std::size_t hash = raw.find('#');
        const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (body.empty())
            continue;
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw parse_error(with_origin(origin, "expected 'key = value', got '" + body + "'"),
                              no);
        ConfigLine l;
        l.no = no;
        l.key = trim(body.substr(0, eq));
        l.value = trim(body.substr(eq + 1));
        if (l.key.empty())
            throw parse_error(with_origin(origin, "missing key before '='"), no);
        if (l.value.empty())
            throw parse_error(with_origin(origin, "missing value for key '" + l.key + "'"),
                              no);
        lines.push_back(l);
    }
    return lines;
}

double to_double(const ConfigLine& l, const std::string& origin) {
    const char* s = l.value.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s, &end);
    if (end == s || !trim(end).empty())
        throw parse_error(
            with_origin(origin, l.key + ": not a number: '" + l.value + "'"), l.no);
    return v;
}

long to_long(const ConfigLine& l, const std::string& origin) {
    const char* s = l.value.c_str();
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(s, &end, 10);
    if (end == s || !trim(end).empty())
        throw parse_error(
            with_origin(origin, l.key + ": not an integer: '" + l.value + "'"), l.no);
    return v;
}

std::string field_of(const char* what) {
    const std::string msg(what);
    const std::size_t colon = msg.find(':');
    return colon == std::string::npos ? msg : msg.substr(0, colon);
}

std::string read_text_file(const std::string& path, const std::string& origin, int line_no) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw parse_error(with_origin(origin, "cannot open '" + path + "'"), line_no);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string resolve_path(const std::string& base_dir, const std::string& value) {
    const std::filesystem::path p(value);
    if (p.is_absolute() || base_dir.empty())
        return value;
    return (std::filesystem::path(base_dir) / p).string();
}

std::string fmt_full(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(trim(s.substr(start)));
            return parts;
        }
        parts.push_back(trim(s.substr(start, pos - start)));
        start = pos + 1;
    }
}

double plain_double(const std::string& text, bool& ok) {
    const char* s = text.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s, &end);
    ok = !(end == s || !trim(end).empty());
    return v;
}

} // namespace

double* param_field(DeviceParameters& p, const std::string& name) {
    if (name == "temperature")
        return &p.env.temperature;
    if (name == "electrolyte_width")
        return &p.geometry.electrolyte_width;
    if (name == "schottky_thickness")
        return &p.geometry.schottky_thickness;
    if (name == "tunnel_thickness")
        return &p.geometry.tunnel_thickness_abs;
    if (name == "hop_distance")
        return &p.geometry.hop_distance;
    if (name == "cross_section")
        return &p.geometry.cross_section;
    if (name == "hop_frequency")
        return &p.kinetics.hop_frequency;
    if (name == "charge_number")
        return &p.kinetics.charge_number;
    if (name == "phi_a0")
        return &p.kinetics.phi_a0;
    if (name == "phi_a1")
        return &p.kinetics.phi_a1;
    if (name == "phi_ar")
        return &p.kinetics.phi_ar;
    if (name == "coulomb_voltage")
        return &p.kinetics.coulomb_voltage;
    if (name == "window_offset")
        return &p.window.offset;
    if (name == "phi_s0")
        return &p.schottky.phi_s0;
    if (name == "phi_s1")
        return &p.schottky.phi_s1;
    if (name == "n0")
        return &p.schottky.n0;
    if (name == "n1")
        return &p.schottky.n1;
    if (name == "alpha_f")
        return &p.schottky.alpha_f;
    if (name == "richardson")
        return &p.schottky.richardson;
    if (name == "relative_permittivity")
        return &p.schottky.relative_permittivity;
    if (name == "phi_t0")
        return &p.tunnel.phi_t0;
    if (name == "alpha_t0")
        return &p.tunnel.alpha_t0;
    if (name == "alpha_t1")
        return &p.tunnel.alpha_t1;
    if (name == "r_e0")
        return &p.electrolyte.r_e0;
    if (name == "r_e1")
        return &p.electrolyte.r_e1;
    return nullptr;
}

const std::vector<std::string>& param_names() {
    static const std::vector<std::string> names = {
        "temperature",
        "electrolyte_width",
        "schottky_thickness",
        "tunnel_thickness",
        "hop_distance",
        "cross_section",
        "hop_frequency",
        "charge_number",
        "phi_a0",
        "phi_a1",
        "phi_ar",
        "coulomb_voltage",
        "window_offset",
        "phi_s0",
        "phi_s1",
        "n0",
        "n1",
        "alpha_f",
        "richardson",
        "relative_permittivity",
        "phi_t0",
        "alpha_t0",
        "alpha_t1",
        "r_e0",
        "r_e1",
    };
    return names;
}

void apply_params_text(DeviceParameters& p, const std::string& text,
                       const std::string& origin) {
    const std::vector<ConfigLine> lines = tokenize(text, origin);
    std::map<std::string, int> seen;
    for (const ConfigLine& l : lines) {
        if (!seen.emplace(l.key, l.no).second)
            throw parse_error(with_origin(origin, "duplicate key '" + l.key + "'"), l.no);
        if (l.key == "window_steepness") {
            p.window.steepness = static_cast<int>(to_long(l, origin));
            continue;
        }
        double* field = param_field(p, l.key);
        if (!field)
            throw parse_error(with_origin(origin, "unknown parameter key '" + l.key + "'"),
                              l.no);
        *field = to_double(l, origin);
    }
    normalize_geometry(p);
    try {
        validate(p);
    } catch (const invalid_parameter_error& e) {
        const std::string field = field_of(e.what());
        const auto it = seen.find(field);
        throw parse_error(with_origin(origin, e.what()), it == seen.end() ? 0 : it->second);
    }
}

DeviceParameters load_params_file(const std::string& path) {
    DeviceParameters p = default_parameters();
    apply_params_text(p, read_text_file(path, "", 0), path);
    return p;
}

void write_params_file(const DeviceParameters& p, const std::string& path,
                       const std::string& banner) {
    std::string out;
    if (!banner.empty()) {
        for (const std::string& line : split_on(banner, '\n')) {
            out += "# ";
            out += line;
            out += '\n';
        }
    }
    DeviceParameters copy = p;
    for (const std::string& name : param_names()) {
        out += name;
        out += " = ";
        out += fmt_full(*param_field(copy, name));
        out += '\n';
    }
    out += "window_steepness = ";
    out += std::to_string(p.window.steepness);
    out += '\n';
    write_text_file_atomic(path, out);
}

RunConfig parse_run_config(const std::string& text, const std::string& origin,
                           const std::string& base_dir) {
    RunConfig cfg;
    cfg.params = default_parameters();
    const std::vector<ConfigLine> lines = tokenize(text, origin);

    int params_file_line = 0;
    for (const ConfigLine& l : lines) {
        if (l.key != "params_file")
            continue;
        if (params_file_line != 0)
            throw parse_error(with_origin(origin, "duplicate key 'params_file'"), l.no);
        params_file_line = l.no;
        cfg.params_file = l.value;
        const std::string path = resolve_path(base_dir, l.value);
        apply_params_text(cfg.params, read_text_file(path, origin, l.no), path);
    }

    std::map<std::string, int> seen;
    for (const ConfigLine& l : lines) {
        if (!seen.emplace(l.key, l.no).second)
            throw parse_error(with_origin(origin, "duplicate key '" + l.key + "'"), l.no);
        if (l.key == "params_file") {
            continue;
        } else if (l.key == "source_resistance") {
            cfg.circuit.source_resistance = to_double(l, origin);
        } else if (l.key == "c_e") {
            cfg.circuit.c_e = to_double(l, origin);
        } else if (l.key == "c_t") {
            cfg.circuit.c_t = to_double(l, origin);
        } else if (l.key == "circuit_mode") {
            if (l.value == "quasi-static")
                cfg.circuit.mode = CircuitMode::quasi_static;
            else if (l.value == "capacitive")
                cfg.circuit.mode = CircuitMode::capacitive;
            else
                throw parse_error(
                    with_origin(origin, "circuit_mode: expected 'quasi-static' or "
                                        "'capacitive', got '" + l.value + "'"),
                    l.no);
        } else if (l.key == "waveform") {
            if (l.value == "triangle")
                cfg.waveform.kind = WaveformKind::triangle;
            else if (l.value == "step")
                cfg.waveform.kind = WaveformKind::step;
            else if (l.value == "piecewise-linear")
                cfg.waveform.kind = WaveformKind::piecewise_linear;
            else
                throw parse_error(
                    with_origin(origin, "waveform: expected 'triangle', 'step' or "
                                        "'piecewise-linear', got '" + l.value + "'"),
                    l.no);
        } else if (l.key == "period") {
            cfg.waveform.period = to_double(l, origin);
        } else if (l.key == "pos_peak") {
            cfg.waveform.pos_peak = to_double(l, origin);
        } else if (l.key == "neg_peak") {
            cfg.waveform.neg_peak = to_double(l, origin);
        } else if (l.key == "amplitude") {
            cfg.waveform.amplitude = to_double(l, origin);
        } else if (l.key == "duration") {
            cfg.waveform.duration = to_double(l, origin);
        } else if (l.key == "breakpoints") {
            cfg.waveform.breakpoints.clear();
            for (const std::string& pair : split_on(l.value, ';')) {
                if (pair.empty())
                    continue;
                const std::size_t colon = pair.find(':');
                if (colon == std::string::npos)
                    throw parse_error(
                        with_origin(origin, "breakpoints: expected 't:v' pairs separated "
                                            "by ';', got '" + pair + "'"),
                        l.no);
                bool ok_t = false, ok_v = false;
                const double t = plain_double(trim(pair.substr(0, colon)), ok_t);
                const double v = plain_double(trim(pair.substr(colon + 1)), ok_v);
                if (!ok_t || !ok_v)
                    throw parse_error(
                        with_origin(origin, "breakpoints: not a number in '" + pair + "'"),
                        l.no);
                cfg.waveform.breakpoints.emplace_back(t, v);
            }
        } else if (l.key == "dt_init") {
            cfg.integrator.dt_init = to_double(l, origin);
        } else if (l.key == "dt_min") {
            cfg.integrator.dt_min = to_double(l, origin);
        } else if (l.key == "dt_max") {
            cfg.integrator.dt_max = to_double(l, origin);
        } else if (l.key == "max_dz_per_step") {
            cfg.integrator.max_dz_per_step = to_double(l, origin);
        } else if (l.key == "error_tol") {
            cfg.integrator.error_tol = to_double(l, origin);
        } else if (l.key == "scheme") {
            if (l.value == "adaptive-explicit")
                cfg.integrator.scheme = IntegrationScheme::adaptive_explicit;
            else if (l.value == "implicit-midpoint")
                cfg.integrator.scheme = IntegrationScheme::implicit_midpoint;
            else
                throw parse_error(
                    with_origin(origin, "scheme: expected 'adaptive-explicit' or "
                                        "'implicit-midpoint', got '" + l.value + "'"),
                    l.no);
        } else if (l.key == "z0") {
            cfg.z0 = to_double(l, origin);
            if (!(cfg.z0 >= 0.0 && cfg.z0 <= 1.0))
                throw parse_error(with_origin(origin, "z0: must lie in [0,1]"), l.no);
        } else if (l.key == "samples") {
            const long n = to_long(l, origin);
            if (n < 2)
                throw parse_error(with_origin(origin, "samples: must be >= 2"), l.no);
            cfg.samples = static_cast<std::size_t>(n);
        } else if (l.key == "out") {
            cfg.out_csv = l.value;
        } else if (l.key == "svg") {
            cfg.out_svg = l.value;
        } else if (l.key == "window_steepness") {
            cfg.params.window.steepness = static_cast<int>(to_long(l, origin));
        } else if (double* field = param_field(cfg.params, l.key)) {
            *field = to_double(l, origin);
        } else {
            throw parse_error(with_origin(origin, "unknown key '" + l.key + "'"), l.no);
        }
    }

    normalize_geometry(cfg.params);
    try {
        validate(cfg.params);
        validate(cfg.circuit);
        validate(cfg.waveform);
        validate(cfg.integrator);
    } catch (const invalid_parameter_error& e) {
        const std::string field = field_of(e.what());
        const auto it = seen.find(field);
        throw parse_error(with_origin(origin, e.what()), it == seen.end() ? 0 : it->second);
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    const std::string dir = std::filesystem::path(path).parent_path().string();
    return parse_run_config(read_text_file(path, "", 0), path, dir);
}

FitFile parse_fit_file(const std::string& text, const std::string& origin) {
    FitFile f;
    const std::vector<ConfigLine> lines = tokenize(text, origin);
    std::map<std::string, int> seen;
    for (const ConfigLine& l : lines) {
        if (!seen.emplace(l.key, l.no).second)
            throw parse_error(with_origin(origin, "duplicate key '" + l.key + "'"), l.no);
        if (l.key.rfind("free.", 0) == 0) {
            FreeParameter fp;
            fp.name = l.key.substr(5);
            const std::vector<std::string> parts = split_on(l.value, ',');
            if (parts.size() != 3)
                throw parse_error(
                    with_origin(origin, l.key + ": expected 'lower, upper, initial'"), l.no);
            bool ok0 = false, ok1 = false, ok2 = false;
            fp.lower = plain_double(parts[0], ok0);
            fp.upper = plain_double(parts[1], ok1);
            fp.initial = plain_double(parts[2], ok2);
            if (!ok0 || !ok1 || !ok2)
                throw parse_error(
                    with_origin(origin, l.key + ": not a number in '" + l.value + "'"), l.no);
            f.spec.free_parameters.push_back(fp);
        } else if (l.key.rfind("weight.", 0) == 0) {
            const ConfigLine idx_line{l.no, l.key, l.key.substr(7)};
            const long idx = to_long(idx_line, origin);
            if (idx < 0)
                throw parse_error(with_origin(origin, l.key + ": index must be >= 0"), l.no);
            if (f.spec.weights.size() <= static_cast<std::size_t>(idx))
                f.spec.weights.resize(static_cast<std::size_t>(idx) + 1, 1.0);
            const double w = to_double(l, origin);
            if (!(w > 0.0))
                throw parse_error(with_origin(origin, l.key + ": weight must be > 0"), l.no);
            f.spec.weights[static_cast<std::size_t>(idx)] = w;
        } else if (l.key == "seed") {
            f.settings.seed = static_cast<unsigned>(to_long(l, origin));
        } else if (l.key == "restarts") {
            const long r = to_long(l, origin);
            if (r < 1)
                throw parse_error(with_origin(origin, "restarts: must be >= 1"), l.no);
            f.settings.restarts = static_cast<int>(r);
        } else if (l.key == "max_evaluations") {
            const long n = to_long(l, origin);
            if (n < 1)
                throw parse_error(with_origin(origin, "max_evaluations: must be >= 1"), l.no);
            f.settings.max_evaluations = n;
        } else if (l.key == "jitter") {
            f.settings.jitter = to_double(l, origin);
            if (!(f.settings.jitter >= 0.0))
                throw parse_error(with_origin(origin, "jitter: must be >= 0"), l.no);
        } else if (l.key == "tolerance") {
            f.settings.tolerance = to_double(l, origin);
            if (!(f.settings.tolerance > 0.0))
                throw parse_error(with_origin(origin, "tolerance: must be > 0"), l.no);
        } else if (l.key == "sim_samples") {
            const long n = to_long(l, origin);
            if (n < 2)
                throw parse_error(with_origin(origin, "sim_samples: must be >= 2"), l.no);
            f.settings.sim_samples = static_cast<std::size_t>(n);
        } else {
            throw parse_error(with_origin(origin, "unknown key '" + l.key + "'"), l.no);
        }
    }
    try {
        validate(f.spec);
    } catch (const invalid_parameter_error& e) {
        throw parse_error(with_origin(origin, e.what()), 0);
    }
    return f;
}

FitFile load_fit_file(const std::string& path) {
    return parse_fit_file(read_text_file(path, "", 0), path);
}

} // namespace dbmd
