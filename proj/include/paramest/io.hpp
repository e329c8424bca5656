#pragma once

#include "paramest/integrator.hpp"
#include "paramest/noise.hpp"
#include "paramest/trust_region.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace paramest::io {

/// "%.17g"; round-trips every finite double.
std::string format_double(double value);

/// CSV with header `t,x1,...,xn`, one row per grid point.
std::string trajectory_csv(const Trajectory &trajectory);
Trajectory parse_trajectory_csv(std::string_view text, std::string model_name = {});

/// CSV with header `t,y1,...,yn`. Weights are not stored; parsed sets have unit weights.
std::string measurement_csv(const MeasurementSet &measurements);
/// Sidecar record: {"model", "noise_kind", "level", "seed"}.
std::string measurement_metadata_json(const MeasurementSet &measurements);
/// `metadata_json` may be empty, in which case model/noise fields stay default.
MeasurementSet parse_measurement_csv(std::string_view csv, std::string_view metadata_json = {});

/// Path of the metadata sidecar written next to a measurement CSV.
std::filesystem::path metadata_path(const std::filesystem::path &csv_path);

std::string solve_report_json(const SolveReport &report, const std::vector<std::string> &param_names,
                              bool include_trace);
std::string solve_report_text(const SolveReport &report, const std::vector<std::string> &param_names);

std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, std::string_view contents);

} // namespace paramest::io
