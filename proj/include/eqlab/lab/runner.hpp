#pragma once

// Scenario runners. Every sweep point is evaluated independently and
// numerical failures become flagged rows; rows come back in point order no
// matter how many worker threads ran them.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eqlab/lab/config.hpp"

namespace eqlab::lab {

struct ResultRow {
  std::string scenario;
  std::string economy_id;
  std::vector<double> point;  // endowment, chart parameter or spec, depending on the scenario
  std::optional<long long> count;
  std::optional<double> sup_h;
  std::optional<double> volume;
  std::optional<double> entropy;
  std::optional<double> gauss_dispersion;
  std::vector<std::string> flags;  // "key" or "key=value"; failures start with "error:"

  bool failed() const;
  bool operator==(const ResultRow&) const = default;
};

enum ExitStatus : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitAnomaly = 4 };

struct RunResult {
  std::vector<ResultRow> rows;
  nlohmann::json summary;
  std::size_t failures = 0;
  bool anomaly = false;
  int exit_code = kExitOk;
};

struct RunOptions {
  int jobs = 1;
};

/// Runs the configured scenario. Throws ConfigError when the config does not
/// fit the scenario (e.g. a grid of the wrong dimension).
RunResult run(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// Endowments used by equilibrium sweeps: the explicit list followed by the
/// seeded random samples.
std::vector<Endowment> sweep_endowments(const ExperimentConfig& cfg);

/// Per-point seed derived from the run seed and a point index.
std::uint64_t point_seed(std::uint64_t seed, std::uint64_t index);

/// Chart selected by the config (equilibrium manifold or first helicoid).
Chart config_chart(const ExperimentConfig& cfg);

/// The helicoids checked by helicoid-check when the config lists none.
std::vector<HelicoidSpec> default_helicoids();

}  // namespace eqlab::lab
