#pragma once

#include "dbmd/calibrate.hpp"
#include "dbmd/simulate.hpp"

#include <string>
#include <vector>

namespace dbmd {

/// Header `t,e,u,i,u_s,u_e,u_t,z`, `\n` newlines, scientific notation with 17 significant
/// digits so a write/read round trip is bit-exact. Writes to a temporary file in the same
/// directory and renames on success, so failures leave no partial output.
void write_time_series_csv(const TimeSeries& series, const std::string& path);

/// Strict reader for the write_time_series_csv format; throws parse_error (with the
/// 1-based line number) on a header mismatch, wrong field count, or non-numeric field.
TimeSeries read_time_series_csv(const std::string& path);

/// Dataset CSV: optional `#` comment lines (a `# area = <m^2>` comment sets the
/// normalization cross-section), then header `t,e,i` and one record per line.
Dataset read_dataset_csv(const std::string& path);

/// Writes the dataset in the read_dataset_csv format (including the area comment).
void write_dataset_csv(const Dataset& data, const std::string& path);

struct SweepRow {
    double peak; // V, positive triangle peak of this run
    HysteresisMetrics metrics;
};

/// Sweep summary CSV: header `peak,loop_area,max_branch_ratio,i_at_peak,open_curve`.
void write_sweep_summary(const std::vector<SweepRow>& rows, const std::string& path);

/// Shared atomic writer: content goes to `<path>.tmp`, renamed over path on success, so
/// a failure never leaves a partial file behind.
void write_text_file_atomic(const std::string& path, const std::string& content);

} // namespace dbmd
