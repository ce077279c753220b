#include "eqlab/helicoid.hpp"

#include <cmath>
#include <numbers>

namespace eqlab {

void HelicoidSpec::validate() const {
  if (n < 2) throw DomainError("helicoid: need n >= 2");
  // The parametrization uses t_1..t_k, so k cannot exceed the n - 1 ruling parameters.
  if (k < 1 || k > n - 1) throw DomainError("helicoid: need 1 <= k <= n - 1");
  if (a.size() != k) throw DomainError("helicoid: a must have k entries");
}

bool is_degenerate(const HelicoidSpec& h) {
  // Factor-wise, so that an underflowing product of tiny coefficients is not zero.
  return h.b == 0.0 || (h.a.array() == 0.0).any();
}

Chart helicoid_chart(const HelicoidSpec& h) {
  h.validate();
  auto f = [h](auto u) {
    using T = typename decltype(u)::value_type;
    using std::cos;
    using std::sin;
    const T& s = u[0];
    std::vector<T> x;
    x.reserve(static_cast<std::size_t>(h.n + h.k));
    for (int i = 0; i < h.k; ++i) {
      const T& ti = u[static_cast<std::size_t>(i) + 1];
      const T angle = h.a(i) * s;
      x.push_back(ti * cos(angle));
      x.push_back(ti * sin(angle));
    }
    for (int j = h.k; j < h.n - 1; ++j) x.push_back(u[static_cast<std::size_t>(j) + 1]);
    x.push_back(h.b * s);
    return x;
  };
  Chart c = Chart::generic(h.n, h.n + h.k, f, {}, "helicoid");
  // All a_i = 0 makes the map linear; b = 0 with k = 1 sweeps a flat plane in polar form.
  c.set_affine((h.a.array() == 0.0).all() || (h.b == 0.0 && h.k == 1));
  return c;
}

double intersection_residual(const HelicoidSpec& h, const Hyperplane& plane, double s, const Vec& t) {
  const Vec& c = plane.coefficients;
  double lhs = 0.0;
  for (int i = 0; i < h.k; ++i) lhs += t(i) * (c(2 * i) * std::cos(h.a(i) * s) + c(2 * i + 1) * std::sin(h.a(i) * s));
  for (int j = h.k; j < h.n - 1; ++j) lhs += c(h.k + j) * t(j);
  lhs += c(h.n + h.k - 1) * h.b * s;
  return std::abs(lhs - plane.delta);
}

std::optional<Intersection> hyperplane_intersection(const HelicoidSpec& h, const Hyperplane& plane) {
  h.validate();
  const Vec& c = plane.coefficients;
  if (c.size() != h.n + h.k) throw DomainError("hyperplane: need n + k coefficients");
  if (c.squaredNorm() == 0.0) throw DomainError("hyperplane: coefficient vector must be nonzero");

  auto finish = [&](double s, Vec t) -> std::optional<Intersection> {
    Intersection out{s, std::move(t), 0.0};
    out.residual = intersection_residual(h, plane, out.s, out.t);
    return out;
  };
  const double slope = c(h.n + h.k - 1) * h.b;  // coefficient of s in the linear term

  // (i) a free coordinate t_j with nonzero coefficient: s = 0, solve for it.
  for (int j = h.k; j < h.n - 1; ++j) {
    if (c(h.k + j) != 0.0) {
      Vec t = Vec::Zero(h.n - 1);
      t(j) = plane.delta / c(h.k + j);
      return finish(0.0, std::move(t));
    }
  }

  // (ii) scan s until some c_i(s) = alpha_i cos(a_i s) + beta_i sin(a_i s) is nonzero.
  constexpr int kScan = 64;
  for (int step = 0; step < kScan; ++step) {
    const double s = 0.1 * step;
    for (int i = 0; i < h.k; ++i) {
      const double ci = c(2 * i) * std::cos(h.a(i) * s) + c(2 * i + 1) * std::sin(h.a(i) * s);
      if (std::abs(ci) > 1e-8) {
        Vec t = Vec::Zero(h.n - 1);
        t(i) = (plane.delta - slope * s) / ci;
        return finish(s, std::move(t));
      }
    }
  }

  // (iii) only the axis coefficient can be nonzero.
  if (slope != 0.0) return finish(plane.delta / slope, Vec::Zero(h.n - 1));
  // Degenerate helicoid whose axis term vanishes: parallel unless delta = 0.
  if (plane.delta == 0.0) return finish(0.0, Vec::Zero(h.n - 1));
  return std::nullopt;
}

GridSpec standard_helicoid_grid(const HelicoidSpec& h, int points_per_axis) {
  h.validate();
  double amin = 0.0;
  for (Eigen::Index i = 0; i < h.a.size(); ++i) {
    const double ai = std::abs(h.a(i));
    if (ai > 0.0 && (amin == 0.0 || ai < amin)) amin = ai;
  }
  const double period = amin > 0.0 ? 2.0 * std::numbers::pi / amin : 2.0 * std::numbers::pi;
  GridSpec grid;
  grid.box.lower = Vec::Constant(h.n, 0.1);
  grid.box.upper = Vec::Constant(h.n, 2.0);
  grid.box.lower(0) = 0.0;
  grid.box.upper(0) = period;
  grid.points.assign(static_cast<std::size_t>(h.n), points_per_axis);
  return grid;
}

}  // namespace eqlab
