#include "eqlab/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace eqlab {

namespace {

void check_box(const Chart& chart, const NeighborhoodBox& box) {
  box.validate();
  if (box.dim() != chart.param_dim()) throw DomainError("neighborhood box dimension differs from the chart");
  if (!chart.domain().contains(box)) throw PreconditionError("neighborhood box leaves the chart domain");
}

std::string format_point(const Vec& u) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (Eigen::Index i = 0; i < u.size(); ++i) os << (i ? ", " : "") << u(i);
  os << ')';
  return os.str();
}

}  // namespace

QuadratureResult volume_detailed(const Chart& chart, const NeighborhoodBox& box, const QuadratureSpec& quad,
                                 const DiffOptions& opts) {
  check_box(chart, box);
  auto integrand = [&](const Vec& u) {
    try {
      return metric(chart, u, opts).sqrt_det;
    } catch (const DegenerateChartError& e) {
      throw DegenerateChartError(std::string(e.what()) + " at node " + format_point(u));
    }
  };
  return integrate(box, integrand, quad);
}

double volume(const Chart& chart, const NeighborhoodBox& box, const QuadratureSpec& quad, const DiffOptions& opts) {
  return volume_detailed(chart, box, quad, opts).value;
}

double entropy_uniform(const Chart& chart, const NeighborhoodBox& box, const QuadratureSpec& quad,
                       const DiffOptions& opts) {
  return std::log(volume(chart, box, quad, opts));
}

double entropy_general(const Chart& chart, const NeighborhoodBox& box, const Density& density,
                       const QuadratureSpec& quad, const DiffOptions& opts) {
  if (std::holds_alternative<UniformDensity>(density)) return entropy_uniform(chart, box, quad, opts);
  const auto& general = std::get<GeneralDensity>(density);
  check_box(chart, box);

  // Both integrals share nodes, so the density and its normalizer are consistent.
  auto dvol = [&](const Vec& u) { return metric(chart, u, opts).sqrt_det; };
  auto value = [&](const Vec& u) {
    const double f = general.f(u);
    if (f < 0.0) throw DomainError("density must be nonnegative");
    return f;
  };
  const double mass = integrate(box, [&](const Vec& u) { return value(u) * dvol(u); }, quad).value;
  if (!(mass > 0.0)) throw DomainError("density has zero mass on the neighborhood (zero-measure support)");
  if (general.normalized && std::abs(mass - 1.0) > 1e-6)
    throw DomainError("density flagged as normalized integrates to " + std::to_string(mass));
  const double scale = general.normalized ? 1.0 : 1.0 / mass;

  auto integrand = [&](const Vec& u) {
    const double f = value(u) * scale;
    return f > 0.0 ? -f * std::log(f) * dvol(u) : 0.0;
  };
  return integrate(box, integrand, quad).value;
}

MvpProbe mvp_probe(const Chart& chart, const NeighborhoodBox& box, const ScalarField& psi,
                   const std::vector<double>& eps_grid, const QuadratureSpec& quad, const DiffOptions& opts) {
  check_box(chart, box);
  if (chart.codim() != 1) throw PreconditionError("mvp_probe needs a hypersurface (k = 1)");
  MvpProbe out;
  out.base_volume = perturbed_volume(chart, box, psi, 0.0, quad, opts);

  std::vector<double> eps = eps_grid;
  if (std::find(eps.begin(), eps.end(), 0.0) == eps.end()) eps.push_back(0.0);
  std::sort(eps.begin(), eps.end());
  for (double e : eps) {
    const double v = e == 0.0 ? out.base_volume : perturbed_volume(chart, box, psi, e, quad, opts);
    out.rows.push_back({e, v, std::log(v)});
  }

  // Fit V(eps) = c0 + c1 eps + c2 eps^2; the curvature is 2 c2.
  if (out.rows.size() >= 3) {
    Mat design(static_cast<Eigen::Index>(out.rows.size()), 3);
    Vec rhs(static_cast<Eigen::Index>(out.rows.size()));
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
      const double e = out.rows[i].eps;
      design.row(static_cast<Eigen::Index>(i)) << 1.0, e, e * e;
      rhs(static_cast<Eigen::Index>(i)) = out.rows[i].volume - out.base_volume;
    }
    const Vec c = design.colPivHouseholderQr().solve(rhs);
    out.fitted_curvature = 2.0 * c(2);
  }
  return out;
}

}  // namespace eqlab
