#pragma once

// Test charts and small helpers shared by the unit and acceptance tests.

#include <cmath>
#include <vector>

#include "eqlab/economy.hpp"
#include "eqlab/geometry.hpp"

namespace eqlab::testing {

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// (s, t) -> (cos s, sin s, t)
inline Chart cylinder() {
  return Chart::generic(2, 3, [](auto u) {
    using T = typename decltype(u)::value_type;
    using std::cos;
    using std::sin;
    return std::vector<T>{cos(u[0]), sin(u[0]), u[1]};
  }, {}, "cylinder");
}

// (theta, phi) -> unit sphere, theta the latitude.
inline Chart sphere() {
  return Chart::generic(2, 3, [](auto u) {
    using T = typename decltype(u)::value_type;
    using std::cos;
    using std::sin;
    return std::vector<T>{cos(u[0]) * cos(u[1]), cos(u[0]) * sin(u[1]), sin(u[0])};
  }, {}, "sphere");
}

// u -> A u + b with A of full column rank.
inline Chart affine(const Mat& a, const Vec& b) {
  return Chart::generic(static_cast<int>(a.cols()), static_cast<int>(a.rows()), [a, b](auto u) {
    using T = typename decltype(u)::value_type;
    std::vector<T> x(static_cast<std::size_t>(a.rows()));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      T v(b(i));
      for (Eigen::Index j = 0; j < a.cols(); ++j) v += a(i, j) * u[static_cast<std::size_t>(j)];
      x[static_cast<std::size_t>(i)] = v;
    }
    return x;
  }, {}, "affine");
}

// The isometric embedding of R^n as the first n axes of R^{n+1}.
inline Chart flat(int n) {
  Mat a = Mat::Zero(n + 1, n);
  a.topRows(n) = Mat::Identity(n, n);
  return affine(a, Vec::Zero(n + 1));
}

inline Economy identical_cd() {
  return Economy(vec({2, 2}), {make_cobb_douglas(vec({0.5, 0.5})), make_cobb_douglas(vec({0.5, 0.5}))}, "identical-cd");
}

inline Economy heterogeneous_cd() {
  return Economy(vec({2, 2}), {make_cobb_douglas(vec({0.6, 0.4})), make_cobb_douglas(vec({0.4, 0.6}))},
                 "heterogeneous-cd");
}

inline Economy mirror_ces() {
  return Economy(vec({1, 1}), {make_ces(vec({1024, 1}), -4.0), make_ces(vec({1, 1024}), -4.0)}, "mirror-ces");
}

inline Endowment endowment(std::initializer_list<std::initializer_list<double>> rows) {
  Endowment e;
  e.omega = Mat(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double x : r) e.omega(i, j++) = x;
    ++i;
  }
  return e;
}

}  // namespace eqlab::testing
