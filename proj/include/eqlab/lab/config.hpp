#pragma once

// Experiment configuration: a JSON document with a fixed schema. Unknown keys
// are rejected, with the offending path reported in the ConfigError.
//
// Top-level keys (all optional unless a scenario needs them):
//   scenario            one of the Scenario names below
//   description         free text, echoed only
//   seed                unsigned 64-bit integer, default 0
//   output              output directory
//   economy             {id, resources: [r_1..r_L], consumers: [...]}
//                       consumer: {family: "cobb-douglas", alpha: [...]}
//                              or {family: "ces", a: [...], rho: x}
//   endowments          list of M x L matrices (explicit omega)
//   endowment_samples   number of random feasible endowments
//   endowment_range     [lo, hi] fractions of r for consumers 1..M-1
//   anchor_endowment    M x L matrix whose equilibrium anchors B(r) continuation
//   scan                {log_p_min, log_p_max, cells, tol_p, tol_residual,
//                        tol_dedupe, newton_starts, newton_max_iter, max_halvings}
//   chart               "equilibrium-manifold" (default) or "helicoid"
//   grid                {lower, upper, points}
//   boxes               [{lower, upper}, ...]
//   quadrature          {nodes, panels, method, mc_samples, mc_dimension_threshold}
//   derivatives         {backend, h_rel, h2_rel, richardson, rank_tol}
//   tolerances          {minimal, residual, max_failure_fraction, intersection,
//                        rigid_motion, geodesic}
//   helicoids           [{n, k, a, b}, ...]
//   hyperplanes         random hyperplanes per helicoid, default 100
//   grid_points         points per axis of the standard helicoid grid, default 11
//   t_values            curve parameters for geodesic-check
//   epsilons            perturbation sizes for mvp-probe
//   perturbations       number of perturbation fields for mvp-probe, default 1
//   amplitude           perturbation amplitude, default 1

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eqlab/economy.hpp"
#include "eqlab/geometry.hpp"
#include "eqlab/helicoid.hpp"
#include "eqlab/quadrature.hpp"

namespace eqlab::lab {

enum class Scenario { Equilibria, CurvatureScan, Entropy, HelicoidCheck, ConjectureSweep, GeodesicCheck, MvpProbe };

std::string to_string(Scenario s);
std::optional<Scenario> scenario_from_string(const std::string& name);
const std::vector<std::string>& scenario_names();

enum class ChartKind { EquilibriumManifold, Helicoid };

struct Tolerances {
  double minimal = 1e-5;
  double residual = 1e-9;
  double max_failure_fraction = 0.25;  // failed-row fraction above this gives exit status 3
  double intersection = 1e-10;
  double rigid_motion = 1e-9;
  double geodesic = 5e-6;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::Equilibria;
  std::string description;
  std::uint64_t seed = 0;
  std::optional<std::string> output;

  std::optional<Economy> economy;
  std::vector<Endowment> endowments;
  int endowment_samples = 0;
  double endowment_lo = 0.0;
  std::optional<double> endowment_hi;  // default 1 / (M - 1)
  std::optional<Endowment> anchor_endowment;
  ScanConfig scan;

  ChartKind chart = ChartKind::EquilibriumManifold;
  std::optional<GridSpec> grid;
  std::vector<Box> boxes;
  QuadratureSpec quadrature;
  DiffOptions derivatives;
  Tolerances tolerances;

  std::vector<HelicoidSpec> helicoids;
  int hyperplanes = 100;
  int grid_points = 11;
  std::vector<double> t_values;
  std::vector<double> epsilons;
  int perturbations = 1;
  double amplitude = 1.0;

  nlohmann::json source;  // the parsed document, echoed into JSON output
};

/// Validates and converts a JSON document. `fallback` supplies the scenario
/// when the document has none (e.g. from a CLI subcommand).
ExperimentConfig parse_config(const nlohmann::json& doc, std::optional<Scenario> fallback = std::nullopt);

/// Replaces the run seed, including the derived scan and quadrature seeds.
void set_seed(ExperimentConfig& cfg, std::uint64_t seed);

/// Reads and parses a config file; I/O and syntax problems become ConfigError.
ExperimentConfig load_config(const std::string& path, std::optional<Scenario> fallback = std::nullopt);

}  // namespace eqlab::lab
