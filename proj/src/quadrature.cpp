#include "eqlab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>

#include "eqlab/error.hpp"

namespace eqlab {

bool Box::contains(const Vec& u, double margin) const {
  if (u.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (!(u(i) >= lower(i) + margin && u(i) <= upper(i) - margin)) return false;
  }
  return true;
}

bool Box::contains(const Box& inner) const {
  return inner.dim() == dim() && (inner.lower.array() >= lower.array()).all() &&
         (inner.upper.array() <= upper.array()).all();
}

void Box::validate() const {
  if (lower.size() != upper.size() || lower.size() == 0) throw DomainError("box: bounds have mismatched dimension");
  if (!(lower.array() < upper.array()).all()) throw DomainError("box: need lower < upper componentwise");
}

Box Box::unbounded(int n) {
  const double inf = std::numeric_limits<double>::infinity();
  return {Vec::Constant(n, -inf), Vec::Constant(n, inf)};
}

Box Box::unit(int n) { return {Vec::Zero(n), Vec::Ones(n)}; }

std::pair<Vec, Vec> gauss_legendre_rule(int n) {
  if (n < 1) throw DomainError("gauss_legendre_rule: need at least one node");
  static std::mutex mu;
  static std::map<int, std::pair<Vec, Vec>> cache;
  std::lock_guard lock(mu);
  if (auto it = cache.find(n); it != cache.end()) return it->second;

  Vec x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton on P_n from the Chebyshev-like initial guess.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged node for the weight.
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    x(i) = -z;
    x(n - 1 - i) = z;
    w(i) = w(n - 1 - i) = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  if (n % 2 == 1) x(n / 2) = 0.0;
  cache.emplace(n, std::make_pair(x, w));
  return {x, w};
}

namespace {

QuadratureResult gauss_legendre(const Box& box, const Integrand& f, const QuadratureSpec& spec) {
  const int dim = box.dim();
  const auto [x, w] = gauss_legendre_rule(spec.nodes);
  const int per_axis = spec.nodes * spec.panels;

  // 1-D composite nodes and weights per axis.
  std::vector<Vec> nodes(static_cast<std::size_t>(dim)), weights(static_cast<std::size_t>(dim));
  for (int d = 0; d < dim; ++d) {
    Vec& nd = nodes[static_cast<std::size_t>(d)];
    Vec& wd = weights[static_cast<std::size_t>(d)];
    nd.resize(per_axis);
    wd.resize(per_axis);
    const double h = (box.upper(d) - box.lower(d)) / spec.panels;
    for (int p = 0; p < spec.panels; ++p) {
      const double a = box.lower(d) + p * h;
      for (int j = 0; j < spec.nodes; ++j) {
        nd(p * spec.nodes + j) = a + 0.5 * h * (x(j) + 1.0);
        wd(p * spec.nodes + j) = 0.5 * h * w(j);
      }
    }
  }

  QuadratureResult out;
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  Vec u(dim);
  // Fixed lexicographic traversal keeps the summation order deterministic.
  while (true) {
    double weight = 1.0;
    for (int d = 0; d < dim; ++d) {
      u(d) = nodes[static_cast<std::size_t>(d)](idx[static_cast<std::size_t>(d)]);
      weight *= weights[static_cast<std::size_t>(d)](idx[static_cast<std::size_t>(d)]);
    }
    out.value += weight * f(u);
    ++out.evaluations;
    int d = dim - 1;
    while (d >= 0 && ++idx[static_cast<std::size_t>(d)] == per_axis) idx[static_cast<std::size_t>(d--)] = 0;
    if (d < 0) break;
  }
  out.method = QuadratureMethod::GaussLegendre;
  return out;
}

QuadratureResult stratified_monte_carlo(const Box& box, const Integrand& f, const QuadratureSpec& spec) {
  const int dim = box.dim();
  // m strata per axis with at least two samples per stratum.
  int m = static_cast<int>(std::floor(std::pow(static_cast<double>(spec.mc_samples) / 2.0, 1.0 / dim)));
  m = std::max(m, 1);
  std::size_t strata = 1;
  for (int d = 0; d < dim; ++d) strata *= static_cast<std::size_t>(m);
  const std::size_t per = std::max<std::size_t>(2, spec.mc_samples / strata);

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Vec cell = box.widths() / m;
  const double cell_measure = cell.prod();

  QuadratureResult out;
  double variance = 0.0;
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  Vec u(dim);
  for (std::size_t s = 0; s < strata; ++s) {
    double mean = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < per; ++k) {
      for (int d = 0; d < dim; ++d) u(d) = box.lower(d) + (idx[static_cast<std::size_t>(d)] + unif(rng)) * cell(d);
      const double y = f(u);
      const double delta = y - mean;
      mean += delta / static_cast<double>(k + 1);
      m2 += delta * (y - mean);
    }
    out.value += cell_measure * mean;
    const double sample_var = m2 / static_cast<double>(per - 1);
    variance += cell_measure * cell_measure * sample_var / static_cast<double>(per);
    out.evaluations += per;
    int d = dim - 1;
    while (d >= 0 && ++idx[static_cast<std::size_t>(d)] == m) idx[static_cast<std::size_t>(d--)] = 0;
  }
  out.std_error = std::sqrt(variance);
  out.method = QuadratureMethod::MonteCarlo;
  out.seed = spec.seed;
  return out;
}

}  // namespace

QuadratureResult integrate(const Box& box, const Integrand& f, const QuadratureSpec& spec) {
  box.validate();
  if (!box.lower.allFinite() || !box.upper.allFinite()) throw DomainError("integrate: box must be bounded");
  if (spec.nodes < 1 || spec.panels < 1) throw DomainError("integrate: nodes and panels must be positive");
  QuadratureMethod method = spec.method;
  if (method == QuadratureMethod::Auto)
    method = box.dim() > spec.mc_dimension_threshold ? QuadratureMethod::MonteCarlo : QuadratureMethod::GaussLegendre;
  if (method == QuadratureMethod::MonteCarlo) {
    if (spec.mc_samples < 2) throw DomainError("integrate: Monte Carlo needs at least two samples");
    return stratified_monte_carlo(box, f, spec);
  }
  return gauss_legendre(box, f, spec);
}

}  // namespace eqlab
