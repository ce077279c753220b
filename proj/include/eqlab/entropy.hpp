#pragma once

// Riemannian volume and differential entropy of parameter-box neighborhoods,
// plus same-boundary volume comparisons against normal perturbations.
//
// Densities are expressed per unit Riemannian volume dM_g, not per unit
// parameter (Lebesgue) volume.

#include <variant>
#include <vector>

#include "eqlab/geometry.hpp"
#include "eqlab/quadrature.hpp"

namespace eqlab {

/// Axis-aligned neighborhood in chart parameters; must lie in the chart domain.
using NeighborhoodBox = Box;

struct UniformDensity {};

struct GeneralDensity {
  ScalarField f;            // nonnegative, per unit Riemannian volume
  bool normalized = false;  // if set, must integrate to 1 over the box within 1e-6
};

using Density = std::variant<UniformDensity, GeneralDensity>;

QuadratureResult volume_detailed(const Chart& chart, const NeighborhoodBox& box, const QuadratureSpec& quad = {},
                                 const DiffOptions& opts = {});

double volume(const Chart& chart, const NeighborhoodBox& box, const QuadratureSpec& quad = {},
              const DiffOptions& opts = {});

/// log V(N): the entropy of the uniform density on N.
double entropy_uniform(const Chart& chart, const NeighborhoodBox& box, const QuadratureSpec& quad = {},
                       const DiffOptions& opts = {});

/// -integral of f log f dM_g over the box.
double entropy_general(const Chart& chart, const NeighborhoodBox& box, const Density& density,
                       const QuadratureSpec& quad = {}, const DiffOptions& opts = {});

struct MvpRow {
  double eps = 0.0;
  double volume = 0.0;
  double entropy = 0.0;
};

struct MvpProbe {
  std::vector<MvpRow> rows;      // includes eps = 0
  double base_volume = 0.0;
  double fitted_curvature = 0.0; // least-squares second derivative of V(eps) at 0
};

/// Volume and uniform entropy of chart + eps psi N for each eps (k = 1).
MvpProbe mvp_probe(const Chart& chart, const NeighborhoodBox& box, const ScalarField& psi,
                   const std::vector<double>& eps_grid, const QuadratureSpec& quad = {},
                   const DiffOptions& opts = {});

}  // namespace eqlab
