#pragma once

// Tensor-product Gauss-Legendre quadrature over parameter boxes, with a
// seeded stratified Monte Carlo fallback for high-dimensional boxes.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <utility>

namespace eqlab {

using Vec = Eigen::VectorXd;

/// Axis-aligned box in chart parameters.
struct Box {
  Vec lower;
  Vec upper;

  int dim() const { return static_cast<int>(lower.size()); }
  Vec center() const { return 0.5 * (lower + upper); }
  Vec widths() const { return upper - lower; }
  double measure() const { return widths().prod(); }
  bool contains(const Vec& u, double margin = 0.0) const;
  bool contains(const Box& inner) const;
  /// Throws DomainError unless lower < upper componentwise.
  void validate() const;

  static Box unbounded(int n);
  static Box unit(int n);
};

enum class QuadratureMethod { Auto, GaussLegendre, MonteCarlo };

struct QuadratureSpec {
  int nodes = 16;   // Gauss-Legendre nodes per axis and panel
  int panels = 1;   // composite panels per axis
  QuadratureMethod method = QuadratureMethod::Auto;
  int mc_dimension_threshold = 4;  // Auto switches to Monte Carlo above this
  std::size_t mc_samples = 1u << 16;
  std::uint64_t seed = 0;
};

struct QuadratureResult {
  double value = 0.0;
  double std_error = 0.0;  // zero for Gauss-Legendre
  QuadratureMethod method = QuadratureMethod::GaussLegendre;
  std::size_t evaluations = 0;
  std::uint64_t seed = 0;
};

using Integrand = std::function<double(const Vec&)>;

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
std::pair<Vec, Vec> gauss_legendre_rule(int n);

QuadratureResult integrate(const Box& box, const Integrand& f, const QuadratureSpec& spec = {});

}  // namespace eqlab
