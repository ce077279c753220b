#pragma once

// Generalized helicoids M^n(a_1, ..., a_k, b) in R^{n+k}:
//   (s, t_1, ..., t_{n-1}) -> (t_1 cos(a_1 s), t_1 sin(a_1 s), ..., t_k cos(a_k s), t_k sin(a_k s),
//                             t_{k+1}, ..., t_{n-1}, b s)

#include <optional>
#include <vector>

#include "eqlab/geometry.hpp"

namespace eqlab {

struct HelicoidSpec {
  int n = 2;
  int k = 1;
  Vec a;           // length k
  double b = 1.0;

  int ambient_dim() const { return n + k; }
  /// Throws DomainError: needs n >= 2, 1 <= k <= n - 1 and a of length k.
  void validate() const;
};

/// Coefficients ordered (alpha_1, beta_1, ..., alpha_k, beta_k, alpha_{k+1}, ..., alpha_n)
/// against coordinates (x_1, y_1, ..., x_k, y_k, x_{k+1}, ..., x_n).
struct Hyperplane {
  Vec coefficients;  // length n + k, not all zero
  double delta = 0.0;

  double evaluate(const Vec& x) const { return coefficients.dot(x) - delta; }
};

Chart helicoid_chart(const HelicoidSpec& h);

/// Exact test b * prod a_i == 0 on the stored coefficients.
bool is_degenerate(const HelicoidSpec& h);

struct Intersection {
  double s = 0.0;
  Vec t;                // length n - 1
  double residual = 0.0;
};

/// A point of the helicoid on the hyperplane, or nothing when none is found
/// (possible only for degenerate helicoids, e.g. a parallel affine case).
std::optional<Intersection> hyperplane_intersection(const HelicoidSpec& h, const Hyperplane& plane);

/// |sum_i t_i (alpha_i cos(a_i s) + beta_i sin(a_i s)) + sum_j alpha_j t_j + alpha_n b s - delta|.
double intersection_residual(const HelicoidSpec& h, const Hyperplane& plane, double s, const Vec& t);

/// Standard minimality grid: s in [0, 2 pi / min |a_i|] (or [0, 2 pi] if all a_i
/// vanish), every t_i in [0.1, 2], with the given points per axis.
GridSpec standard_helicoid_grid(const HelicoidSpec& h, int points_per_axis = 11);

}  // namespace eqlab
