#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// They use only demand evaluation, never the library's solvers.

#include <cmath>
#include <utility>
#include <vector>

#include "eqlab/economy.hpp"
#include "support.hpp"

namespace eqlab::testing {

// Hand-written mirror CES excess demand for good 1 at p = (p1, 1).
inline double mirror_ces_z1(double p1) {
  const double s = 1.0 / (1.0 - (-4.0));
  auto f1 = [&](double a1, double a2, double w) {
    const double denom = std::pow(a1, s) * std::pow(p1, 1.0 - s) + std::pow(a2, s);
    return std::pow(a1, s) * std::pow(p1, -s) * w / denom;
  };
  return f1(1024.0, 1.0, p1) + f1(1.0, 1024.0, 1.0) - 1.0;
}

// Dense sign-change scan with bisection; independent of the library.
inline std::vector<double> dense_scan_roots(double (*z)(double), double lo, double hi, int cells) {
  std::vector<double> roots;
  double x0 = lo, z0 = z(std::exp(lo));
  for (int c = 1; c <= cells; ++c) {
    const double x1 = lo + (hi - lo) * c / cells, z1 = z(std::exp(x1));
    if (z0 == 0.0) roots.push_back(std::exp(x0));
    else if ((z0 < 0.0) != (z1 < 0.0) && z1 != 0.0) {
      double a = x0, b = x1, za = z0;
      for (int i = 0; i < 200 && b - a > 1e-15; ++i) {
        const double m = 0.5 * (a + b), zm = z(std::exp(m));
        if ((zm < 0.0) == (za < 0.0)) a = m, za = zm;
        else b = m;
      }
      roots.push_back(std::exp(0.5 * (a + b)));
    }
    x0 = x1;
    z0 = z1;
  }
  return roots;
}

// Damped Newton on sum_i f_i(p, w_i) = r for L = M = 2 with w1 fixed; unknowns (p1, w2).
// Finite-difference Jacobian, written without the library's B(r) code.
inline std::pair<double, double> newton_br_oracle(const Economy& eco, double w1, double p1, double w2) {
  auto residual = [&](double p, double w) {
    const PriceVector pv(vec({p}));
    return Vec(demand(eco.consumer(0), pv, w1) + demand(eco.consumer(1), pv, w) - eco.resources());
  };
  for (int it = 0; it < 100; ++it) {
    const Vec f = residual(p1, w2);
    if (f.cwiseAbs().maxCoeff() < 1e-15) break;
    const double h = 1e-7;
    Eigen::Matrix2d j;
    j.col(0) = (residual(p1 + h, w2) - residual(p1 - h, w2)) / (2 * h);
    j.col(1) = (residual(p1, w2 + h) - residual(p1, w2 - h)) / (2 * h);
    const Eigen::Vector2d step = j.fullPivLu().solve(-Eigen::Vector2d(f));
    double lam = 1.0;
    while (lam > 1e-8 && (p1 + lam * step(0) <= 0.0 ||
                          residual(p1 + lam * step(0), w2 + lam * step(1)).norm() > f.norm()))
      lam *= 0.5;
    p1 += lam * step(0);
    w2 += lam * step(1);
  }
  return {p1, w2};
}

}  // namespace eqlab::testing
