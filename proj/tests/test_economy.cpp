#include "doctest.h"

#include <cmath>
#include <random>

#include "eqlab/economy.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace eqlab;
using namespace eqlab::testing;

namespace {

// Maximizes sum alpha_l log x_l on the budget line x1 + x2 = w (p = (1, 1)) by golden-section search.
double golden_cd_x1(double a1, double a2, double w) {
  auto u = [&](double x1) { return a1 * std::log(x1) + a2 * std::log(w - x1); };
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 1e-12, hi = w - 1e-12;
  for (int i = 0; i < 200; ++i) {
    const double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
    if (u(c) > u(d)) hi = d;
    else lo = c;
  }
  return 0.5 * (lo + hi);
}

DemandSpec random_spec(std::mt19937_64& rng, int L) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Vec v(L);
  for (int l = 0; l < L; ++l) v(l) = u(rng);
  if (std::uniform_int_distribution<int>(0, 1)(rng) == 0) return make_cobb_douglas(v / v.sum());
  std::uniform_real_distribution<double> rho(-6.0, 0.9);
  double r = rho(rng);
  if (std::abs(r) < 1e-3) r = 0.5;
  return make_ces(10.0 * v, r);
}

}  // namespace

TEST_CASE("demand examples") {
  const Vec d1 = demand(make_cobb_douglas(vec({0.5, 0.5})), PriceVector(vec({1})), 2.0);
  CHECK(d1(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(d1(1) == doctest::Approx(1.0).epsilon(1e-15));

  const Vec d2 = demand(make_cobb_douglas(vec({0.25, 0.75})), PriceVector(vec({1})), 4.0);
  const double oracle = golden_cd_x1(0.25, 0.75, 4.0);
  CHECK(oracle == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(d2(0) - oracle) < 1e-8);
  CHECK(std::abs(d2(1) - (4.0 - oracle)) < 1e-8);
  CHECK(d2(0) == doctest::Approx(1.0));
  CHECK(d2(1) == doctest::Approx(3.0));

  const Vec d3 = demand(make_ces(vec({1, 1}), -4.0), PriceVector(vec({1})), 2.0);
  CHECK(d3(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d3(1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("demand rejects invalid inputs") {
  CHECK_THROWS_AS(PriceVector(vec({0.0})), DomainError);
  CHECK_THROWS_AS(PriceVector(vec({-1.0})), DomainError);
  CHECK_THROWS_AS(demand_unnormalized(make_cobb_douglas(vec({0.5, 0.5})), vec({1.0, 0.0}), 1.0), DomainError);
  CHECK_THROWS_AS(make_cobb_douglas(vec({0.5, 0.6})), DomainError);
  CHECK_THROWS_AS(make_cobb_douglas(vec({1.0, 0.0})), DomainError);
  CHECK_THROWS_AS(make_ces(vec({1, 1}), 0.0), DomainError);
  CHECK_THROWS_AS(make_ces(vec({1, 1}), 1.0), DomainError);
  CHECK_THROWS_AS(make_ces(vec({1, -1}), 0.5), DomainError);
  CHECK_THROWS_AS(Economy(vec({1}), {make_cobb_douglas(vec({1.0}))}), DomainError);
  CHECK_THROWS_AS(Economy(vec({1, 0}), {make_cobb_douglas(vec({0.5, 0.5})), make_cobb_douglas(vec({0.5, 0.5}))}),
                  DomainError);
}

TEST_CASE("aggregate excess examples") {
  const Economy eco = identical_cd();
  const Endowment omega = endowment({{2, 0}, {0, 2}});
  const Vec z0 = aggregate_excess(eco, PriceVector(vec({1})), omega);
  CHECK(std::abs(z0(0)) < 1e-15);
  CHECK(std::abs(z0(1)) < 1e-15);

  const PriceVector p(vec({2}));
  const Vec z = aggregate_excess(eco, p, omega);
  // Oracle: sum of individual demand calls at wealths p . omega_i.
  const Vec oracle = demand(eco.consumer(0), p, 4.0) + demand(eco.consumer(1), p, 2.0) - vec({2, 2});
  CHECK(z(0) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(z(1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK((z - oracle).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("Walras law, budget identity and homogeneity on random draws") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> logp(-3.0, 3.0), wdist(-5.0, 5.0), lam(0.1, 10.0);
  double worst_walras = 0.0, worst_budget = 0.0, worst_homog = 0.0;
  for (int draw = 0; draw < 1000; ++draw) {
    const int L = 2 + draw % 3, M = 2 + draw % 2;
    std::vector<DemandSpec> specs;
    for (int i = 0; i < M; ++i) specs.push_back(random_spec(rng, L));
    Vec r(L);
    for (int l = 0; l < L; ++l) r(l) = 1.0 + std::exp(logp(rng) / 3.0);
    const Economy eco(r, specs);
    Vec pbar(L - 1);
    for (int l = 0; l < L - 1; ++l) pbar(l) = std::exp(logp(rng));
    const PriceVector p(pbar);
    Endowment omega{Mat(M, L)};
    for (int i = 0; i < M; ++i)
      for (int l = 0; l < L; ++l) omega.omega(i, l) = wdist(rng);
    const Vec z = aggregate_excess(eco, p, omega);
    worst_walras = std::max(worst_walras, std::abs(p.full().dot(z)) / (1.0 + z.cwiseAbs().sum()));

    const double w = wdist(rng);
    const Vec f = demand(specs[0], p, w);
    worst_budget = std::max(worst_budget, std::abs(p.full().dot(f) - w) / std::max(1.0, std::abs(w)));

    const double l = lam(rng);
    const Vec fa = demand_unnormalized(specs[0], p.full(), w);
    const Vec fb = demand_unnormalized(specs[0], l * p.full(), l * w);
    worst_homog = std::max(worst_homog, (fa - fb).cwiseAbs().maxCoeff() / std::max(1.0, fa.cwiseAbs().maxCoeff()));
  }
  CHECK(worst_walras < 1e-10);
  CHECK(worst_budget < 1e-12);
  CHECK(worst_homog < 1e-12);
}

TEST_CASE("utility of each family") {
  CHECK(*utility(make_cobb_douglas(vec({0.5, 0.5})), vec({1, 1})) == doctest::Approx(0.0));
  CHECK_FALSE(utility(make_cobb_douglas(vec({0.5, 0.5})), vec({-1, 1})).has_value());
  // CES aggregator (a1 x1^rho + a2 x2^rho)^(1/rho) at (1, 1) with a = (1, 1), rho = 0.5 -> 4.
  CHECK(*utility(make_ces(vec({1, 1}), 0.5), vec({1, 1})) == doctest::Approx(4.0));
}

TEST_CASE("equilibria of the identical Cobb-Douglas economy") {
  const Economy eco = identical_cd();
  const auto eq = find_equilibria(eco, endowment({{2, 0}, {0, 2}}));
  REQUIRE(eq.size() == 1);
  CHECK(std::abs(eq.prices[0][0] - 1.0) < 1e-10);
  CHECK(eq.residuals[0] < 1e-9);
  CHECK_FALSE(eq.boundary_warning);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int i = 0; i < 20; ++i) {
    const double a = u(rng), b = u(rng);
    CHECK(count_equilibria(eco, endowment({{a, b}, {2 - a, 2 - b}})) == 1);
  }
}

TEST_CASE("equilibrium of the heterogeneous Cobb-Douglas economy against a bisection oracle") {
  const Economy eco = heterogeneous_cd();
  // Z1(p) = 0.6 p / p + 0.4 (p + 2) / p - 2 for omega1 = (1, 0), omega2 = (1, 2).
  auto z1 = [](double p) { return 0.6 * p / p + 0.4 * (p + 2.0) / p - 2.0; };
  double lo = 0.1, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    if ((z1(m) > 0.0) == (z1(lo) > 0.0)) lo = m;
    else hi = m;
  }
  const double oracle = 0.5 * (lo + hi);
  CHECK(oracle == doctest::Approx(0.8).epsilon(1e-12));
  const auto eq = find_equilibria(eco, endowment({{1, 0}, {1, 2}}));
  REQUIRE(eq.size() == 1);
  CHECK(std::abs(eq.prices[0][0] - oracle) < 1e-10);
}

TEST_CASE("mirror CES economy has three reciprocal equilibria") {
  const Economy eco = mirror_ces();
  const Endowment omega = endowment({{1, 0}, {0, 1}});
  const auto oracle = dense_scan_roots(&mirror_ces_z1, -10.0, 10.0, 100000);
  REQUIRE(oracle.size() == 3);

  const auto eq = find_equilibria(eco, omega);
  REQUIRE(eq.size() == oracle.size());
  CHECK(eq.size() % 2 == 1);
  for (std::size_t i = 0; i < eq.size(); ++i) CHECK(rel_err(eq.prices[i][0], oracle[i]) < 1e-9);
  CHECK(std::abs(eq.prices[1][0] - 1.0) < 1e-9);
  CHECK(std::abs(eq.prices[0][0] * eq.prices[2][0] - 1.0) < 1e-6);
  CHECK_FALSE(eq.boundary_warning);
  for (double r : eq.residuals) CHECK(r < 1e-9);

  // A finer grid never loses roots.
  ScanConfig fine;
  fine.cells *= 4;
  CHECK(count_equilibria(eco, omega, fine) >= eq.size());
}

TEST_CASE("a narrow window misses the outer roots and raises the boundary warning") {
  ScanConfig narrow;
  narrow.log_p_min = -6.0;
  narrow.log_p_max = 6.0;
  narrow.cells = 20000;
  const auto eq = find_equilibria(mirror_ces(), endowment({{1, 0}, {0, 1}}), narrow);
  CHECK(eq.size() == 1);
  CHECK(eq.boundary_warning);
}

TEST_CASE("no root in the window gives an empty result") {
  // Identical Cobb-Douglas price is r2 / r1 = e^12, outside [-10, 10].
  const Economy eco(vec({1, std::exp(12.0)}),
                    {make_cobb_douglas(vec({0.5, 0.5})), make_cobb_douglas(vec({0.5, 0.5}))});
  const auto eq = find_equilibria(eco, endowment({{1, 0}, {0, std::exp(12.0)}}));
  CHECK(eq.empty());
  CHECK(eq.boundary_warning);
  CHECK(count_equilibria(eco, endowment({{1, 0}, {0, std::exp(12.0)}})) == 0);
}

TEST_CASE("multi-start Newton for three goods") {
  const Vec alpha = vec({0.2, 0.3, 0.5});
  const Economy eco(vec({1, 2, 3}), {make_cobb_douglas(alpha), make_cobb_douglas(alpha)});
  const auto eq = find_equilibria(eco, endowment({{1, 0, 1}, {0, 2, 2}}));
  REQUIRE(eq.size() == 1);
  // Identical Cobb-Douglas: p_l = alpha_l r_L / (alpha_L r_l).
  CHECK(eq.prices[0][0] == doctest::Approx(1.2).epsilon(1e-10));
  CHECK(eq.prices[0][1] == doctest::Approx(0.9).epsilon(1e-10));

  // Deterministic given the seed.
  ScanConfig s;
  s.seed = 99;
  const auto a = find_equilibria(eco, endowment({{1, 0, 1}, {0, 2, 2}}), s);
  const auto b = find_equilibria(eco, endowment({{1, 0, 1}, {0, 2, 2}}), s);
  REQUIRE(a.size() == b.size());
  CHECK(a.prices[0].normalized() == b.prices[0].normalized());
}
