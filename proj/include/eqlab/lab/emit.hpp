#pragma once

// Serialization of result rows: CSV with a fixed column order and 17
// significant digits, a JSON mirror with config echo and version stamp, and
// an (x, y) plot-data file for conjecture sweeps.

#include <string>
#include <vector>

#include "eqlab/lab/runner.hpp"

namespace eqlab::lab {

enum class Format { Csv, Json, Both };

std::optional<Format> format_from_string(const std::string& name);

/// Version stamp written into JSON outputs.
std::string version_stamp();

/// Throws PreconditionError when a row carries both volume and entropy and
/// entropy differs from log(volume).
void check_row(const ResultRow& row);

/// Columns: scenario,economy_id,point,count,sup_H,volume,entropy,gauss_dispersion,flags.
/// Point coordinates are joined by ';' and flags by '|'. Empty rows are an error.
std::string to_csv(const std::vector<ResultRow>& rows);

nlohmann::json to_json(const std::vector<ResultRow>& rows, const nlohmann::json& summary,
                       const nlohmann::json& config);

std::vector<ResultRow> rows_from_json(const nlohmann::json& doc);

/// "x y" lines: sup_H of the curvature row against each sampled equilibrium count.
std::string plot_data(const std::vector<ResultRow>& rows);

/// Writes <dir>/<scenario>.csv and/or .json (plus .dat for conjecture sweeps).
/// Returns the written paths; throws Error when the directory is unwritable.
std::vector<std::string> write_outputs(const std::string& dir, const RunResult& result, const ExperimentConfig& cfg,
                                       Format format);

}  // namespace eqlab::lab
