#include "dbmd/csv.hpp"

#include "dbmd/errors.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace dbmd {

namespace {

constexpr const char* kSeriesHeader = "t,e,u,i,u_s,u_e,u_t,z";
constexpr const char* kDatasetHeader = "t,e,i";

/// Full-precision scientific formatting; 17 significant digits round-trip any double.
std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

double parse_double(const std::string& field, int line_no) {
    const char* s = field.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0')
        throw parse_error("not a number: '" + field + "'", line_no);
    return v;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    return line;
}

} // namespace

void write_text_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw parse_error("cannot open for writing: " + tmp);
        out << content;
        out.flush();
        if (!out) {
            out.close();
            std::remove(tmp.c_str());
            throw parse_error("write failed: " + tmp);
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw parse_error("rename failed: " + path + " (" + std::strerror(errno) + ")");
    }
}

void write_time_series_csv(const TimeSeries& series, const std::string& path) {
    std::string out;
    out.reserve(series.samples.size() * 200 + 64);
    out += kSeriesHeader;
    out += '\n';
    for (const Sample& s : series.samples) {
        out += fmt(s.t);
        out += ',';
        out += fmt(s.e);
        out += ',';
        out += fmt(s.u);
        out += ',';
        out += fmt(s.i);
        out += ',';
        out += fmt(s.u_s);
        out += ',';
        out += fmt(s.u_e);
        out += ',';
        out += fmt(s.u_t);
        out += ',';
        out += fmt(s.z);
        out += '\n';
    }
    write_text_file_atomic(path, out);
}

TimeSeries read_time_series_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw parse_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw parse_error("empty file: " + path, 1);
    if (strip_cr(line) != kSeriesHeader)
        throw parse_error("bad header, expected '" + std::string(kSeriesHeader) + "', got '" +
                              strip_cr(line) + "'",
                          1);
    TimeSeries series;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty())
            continue;
        const std::vector<std::string> f = split_fields(line);
        if (f.size() != 8)
            throw parse_error("expected 8 fields, got " + std::to_string(f.size()), line_no);
        Sample s;
        s.t = parse_double(f[0], line_no);
        s.e = parse_double(f[1], line_no);
        s.u = parse_double(f[2], line_no);
        s.i = parse_double(f[3], line_no);
        s.u_s = parse_double(f[4], line_no);
        s.u_e = parse_double(f[5], line_no);
        s.u_t = parse_double(f[6], line_no);
        s.z = parse_double(f[7], line_no);
        if (!series.samples.empty() && !(s.t > series.samples.back().t))
            throw parse_error("t must strictly increase", line_no);
        series.samples.push_back(s);
    }
    return series;
}

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw parse_error("cannot open: " + path);
    Dataset data;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty())
            continue;
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            std::string key, eq;
            double value;
            if (meta >> key >> eq >> value && key == "area" && eq == "=") {
                if (!(value > 0.0))
                    throw parse_error("area: must be > 0 m^2", line_no);
                data.area = value;
            }
            continue;
        }
        if (!header_seen) {
            if (line != kDatasetHeader)
                throw parse_error("bad header, expected '" + std::string(kDatasetHeader) +
                                      "', got '" + line + "'",
                                  line_no);
            header_seen = true;
            continue;
        }
        const std::vector<std::string> f = split_fields(line);
        if (f.size() != 3)
            throw parse_error("expected 3 fields, got " + std::to_string(f.size()), line_no);
        DataPoint r;
        r.t = parse_double(f[0], line_no);
        r.e = parse_double(f[1], line_no);
        r.i = parse_double(f[2], line_no);
        if (!data.records.empty() && !(r.t > data.records.back().t))
            throw parse_error("t must strictly increase", line_no);
        data.records.push_back(r);
    }
    if (!header_seen)
        throw parse_error("missing 't,e,i' header: " + path);
    validate(data);
    return data;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
    std::string out;
    out.reserve(data.records.size() * 80 + 64);
    out += "# area = ";
    out += fmt(data.area);
    out += '\n';
    out += kDatasetHeader;
    out += '\n';
    for (const DataPoint& r : data.records) {
        out += fmt(r.t);
        out += ',';
        out += fmt(r.e);
        out += ',';
        out += fmt(r.i);
        out += '\n';
    }
    write_text_file_atomic(path, out);
}

void write_sweep_summary(const std::vector<SweepRow>& rows, const std::string& path) {
    std::string out = "peak,loop_area,max_branch_ratio,i_at_peak,open_curve\n";
    for (const SweepRow& r : rows) {
        out += fmt(r.peak);
        out += ',';
        out += fmt(r.metrics.loop_area);
        out += ',';
        out += fmt(r.metrics.max_branch_ratio);
        out += ',';
        out += fmt(r.metrics.i_at_peak);
        out += ',';
        out += r.metrics.open_curve ? '1' : '0';
        out += '\n';
    }
    write_text_file_atomic(path, out);
}

} // namespace dbmd
