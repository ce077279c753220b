#include "doctest.h"

#include <cmath>
#include <random>

#include "eqlab/manifold.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace eqlab;
using namespace eqlab::testing;

namespace {

double excess_norm(const Economy& eco, const AmbientPoint& x) {
  const auto [p, omega] = decode(eco, x);
  return aggregate_excess(eco, p, omega).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("closed-form Cobb-Douglas B(r) point against a Newton oracle") {
  const Economy eco = heterogeneous_cd();
  const PriceIncomePoint pi = br_point_cobb_douglas(eco, vec({1}));
  const auto [p_oracle, w2_oracle] = newton_br_oracle(eco, 1.0, 1.0, 1.0);
  CHECK(std::abs(p_oracle - 5.0 / 6.0) < 1e-12);
  CHECK(std::abs(w2_oracle - 8.0 / 3.0) < 1e-12);
  CHECK(std::abs(pi.p[0] - p_oracle) < 1e-12);
  CHECK(std::abs(pi.w(0) - 1.0) < 1e-12);
  CHECK(std::abs(pi.w(1) - w2_oracle) < 1e-12);
  CHECK(br_residual(eco, pi) < 1e-12);
}

TEST_CASE("identical Cobb-Douglas price does not depend on t") {
  const Economy eco = identical_cd();
  const PriceIncomePoint pi = br_point_cobb_douglas(eco, vec({2}));
  CHECK(pi.p[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pi.w(1) == doctest::Approx(2.0).epsilon(1e-15));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 100; ++i) CHECK(std::abs(br_point_cobb_douglas(eco, vec({u(rng)})).p[0] - 1.0) < 1e-14);
}

TEST_CASE("closed-form B(r) errors") {
  CHECK_THROWS_AS(br_point_cobb_douglas(mirror_ces(), vec({1})), UnsupportedFamilyError);
  CHECK_THROWS_AS(br_point_cobb_douglas(heterogeneous_cd(), vec({-5})), OutOfConeError);
  CHECK_THROWS_AS(br_point_cobb_douglas(heterogeneous_cd(), vec({1, 2})), DomainError);
}

TEST_CASE("numeric B(r) solve") {
  const Economy ces = mirror_ces();
  const PriceIncomePoint guess{PriceVector(vec({1.05})), vec({1.0, 1.05})};
  const PriceIncomePoint sym = br_point_numeric(ces, vec({1}), guess);
  CHECK(std::abs(sym.p[0] - 1.0) < 1e-10);
  CHECK(br_residual(ces, sym) < 1e-9);

  const Economy cd = heterogeneous_cd();
  const PriceIncomePoint exact = br_point_cobb_douglas(cd, vec({1.1}));
  const PriceIncomePoint near{PriceVector(vec({0.9})), vec({1.1, 2.5})};
  const PriceIncomePoint num = br_point_numeric(cd, vec({1.1}), near);
  CHECK(std::abs(num.p[0] - exact.p[0]) < 1e-10);
  CHECK((num.w - exact.w).cwiseAbs().maxCoeff() < 1e-10);

  const PriceIncomePoint bad{PriceVector(vec({1000.0})), vec({1.1, 1.0})};
  CHECK_THROWS_AS(br_point_numeric(cd, vec({1.1}), bad), ConvergenceError);
  try {
    br_point_numeric(cd, vec({1.1}), bad);
  } catch (const ConvergenceError& e) {
    CHECK(e.last_residual() > 0.0);
  }
}

TEST_CASE("continuation follows B(r) for CES economies") {
  const Economy ces = mirror_ces();
  const auto anchor = br_anchor(ces, equal_split(ces));
  REQUIRE(anchor.has_value());
  CHECK(std::abs(anchor->p[0] - 1.0) < 1e-9);
  for (double t : {0.8, 0.9, 1.1, 1.2}) {
    const PriceIncomePoint pi = continue_br(ces, *anchor, vec({t}));
    CHECK(br_residual(ces, pi) < 1e-9);
    CHECK(pi.w(0) == doctest::Approx(t).epsilon(1e-14));
  }
  // Mirror symmetry: swapping consumers and goods maps (p, w1, w2) to (1/p, w2/p, w1/p).
  const PriceIncomePoint a = continue_br(ces, *anchor, vec({0.9}));
  const PriceIncomePoint b = continue_br(ces, *anchor, vec({a.w(1) / a.p[0]}));
  CHECK(std::abs(b.p[0] - 1.0 / a.p[0]) < 1e-9);
  CHECK(std::abs(b.w(1) - a.w(0) / a.p[0]) < 1e-9);
}

TEST_CASE("phi chart examples") {
  ChartPoint cp{vec({1}), Mat::Zero(1, 1)};
  const AmbientPoint x = phi_chart(heterogeneous_cd(), cp);
  CHECK(std::abs(x.coords(0) - 5.0 / 6.0) < 1e-14);
  CHECK(std::abs(x.coords(1)) < 1e-15);
  CHECK(std::abs(x.coords(2) - 1.0) < 1e-14);

  ChartPoint cp2{vec({2}), Mat::Constant(1, 1, 1.0)};
  const AmbientPoint y = phi_chart(identical_cd(), cp2);
  CHECK((y.coords - vec({1, 1, 1})).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("phi is affine in the fiber parameters") {
  const Economy eco(vec({1, 2, 3}), {make_cobb_douglas(vec({0.2, 0.3, 0.5})), make_cobb_douglas(vec({0.5, 0.3, 0.2})),
                                     make_cobb_douglas(vec({0.3, 0.4, 0.3}))});
  const EquilibriumManifold m(eco);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    ChartPoint cp{vec({1.0 + 0.2 * u(rng), 1.5 + 0.2 * u(rng)}), Mat(2, 2)};
    for (int i = 0; i < 2; ++i)
      for (int l = 0; l < 2; ++l) cp.omega_bar(i, l) = u(rng);
    Mat d(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int l = 0; l < 2; ++l) d(i, l) = u(rng);
    ChartPoint plus = cp, minus = cp;
    plus.omega_bar += d;
    minus.omega_bar -= d;
    const Vec second = m.phi(plus).coords - 2.0 * m.phi(cp).coords + m.phi(minus).coords;
    worst = std::max(worst, second.cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-14);
}

TEST_CASE("chart points lie on E(r)") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const Economy& eco : {identical_cd(), heterogeneous_cd()}) {
    const EquilibriumManifold m(eco);
    for (int i = 0; i < 100; ++i) {
      const ChartPoint cp{vec({1.5 + 0.5 * u(rng)}), Mat::Constant(1, 1, 2.0 * u(rng))};
      CHECK(excess_norm(eco, m.phi(cp)) < 1e-8);
    }
  }
  const Economy ces = mirror_ces();
  const EquilibriumManifold m(ces);
  for (int i = 0; i < 20; ++i) {
    const ChartPoint cp{vec({1.0 + 0.15 * u(rng)}), Mat::Constant(1, 1, 0.5 + 0.3 * u(rng))};
    CHECK(excess_norm(ces, m.phi(cp)) < 1e-8);
  }
}

TEST_CASE("ambient round trip through the bundle map") {
  const Economy eco = heterogeneous_cd();
  const EquilibriumManifold m(eco);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const ChartPoint cp{vec({1.5 + 0.5 * u(rng)}), Mat::Constant(1, 1, u(rng))};
    const AmbientPoint x = m.phi(cp);
    const auto [p, omega] = decode(eco, x);
    CHECK((encode(eco, p, omega).coords - x.coords).cwiseAbs().maxCoeff() < 1e-14);
    const ChartPoint back = chart_point_of(eco, x);
    CHECK((m.phi(back).coords - x.coords).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((pack_chart_point(back) - pack_chart_point(cp)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("theta") {
  const Economy eco = identical_cd();
  const Theta th = theta(eco, PriceIncomePoint{PriceVector(vec({1})), vec({2, 2})});
  CHECK((th.aggregate_demand - vec({2, 2})).cwiseAbs().maxCoeff() < 1e-15);
  REQUIRE(th.utilities.size() == 1);
  CHECK(std::abs(*th.utilities[0]) < 1e-15);

  const Economy het = heterogeneous_cd();
  const Theta t2 = theta(het, br_point_cobb_douglas(het, vec({1})));
  CHECK((t2.aggregate_demand - vec({2, 2})).cwiseAbs().maxCoeff() < 1e-12);

  // Negative wealth gives a bundle outside the log utility's domain.
  const Theta t3 = theta(het, br_point_cobb_douglas(het, vec({-0.5})));
  CHECK_FALSE(t3.utilities[0].has_value());
}

TEST_CASE("no-trade points") {
  const Endowment a = no_trade_point(identical_cd(), PriceIncomePoint{PriceVector(vec({1})), vec({2, 2})});
  CHECK((a.omega - Mat::Ones(2, 2)).cwiseAbs().maxCoeff() < 1e-15);

  const Economy het = heterogeneous_cd();
  const PriceIncomePoint pi{PriceVector(vec({5.0 / 6.0})), vec({1.0, 8.0 / 3.0})};
  const Endowment b = no_trade_point(het, pi);
  CHECK(std::abs(b.omega(0, 0) - 0.72) < 1e-12);
  CHECK(std::abs(b.omega(0, 1) - 0.4) < 1e-12);
  CHECK(std::abs(b.omega(1, 0) - 1.28) < 1e-12);
  CHECK(std::abs(b.omega(1, 1) - 1.6) < 1e-12);
  CHECK(b.resource_feasible(het.resources()));
  CHECK(aggregate_excess(het, pi.p, b).cwiseAbs().maxCoeff() < 1e-12);

  // The chart reproduces it at (t, omega_bar) read off the result.
  const ChartPoint cp{vec({1.0}), Mat::Constant(1, 1, b.omega(0, 0))};
  CHECK((phi_chart(het, cp).coords - encode(het, pi.p, b).coords).cwiseAbs().maxCoeff() < 1e-10);

  // Uniqueness on the fiber: moving along it changes the trade f_1 - omega_1 linearly with nonzero slope.
  const FiberBasis fb = fiber_basis(het, pi);
  for (double c : {-0.5, -0.1, 0.1, 0.5}) {
    const auto [p, omega] = decode(het, AmbientPoint{fb.origin.coords + c * fb.directions[0]});
    const Vec trade = demand(het.consumer(0), p, p.full().dot(omega.omega.row(0))) - omega.omega.row(0).transpose();
    CHECK(trade.cwiseAbs().maxCoeff() > 1e-3 * std::abs(c));
  }

  CHECK_THROWS_AS(no_trade_point(het, PriceIncomePoint{PriceVector(vec({1.0})), vec({1.0, 1.0})}), PreconditionError);
}

TEST_CASE("fiber basis") {
  const FiberBasis fb = fiber_basis(identical_cd(), PriceIncomePoint{PriceVector(vec({1})), vec({2, 2})});
  REQUIRE(fb.directions.size() == 1);
  const Vec d = fb.directions[0].normalized();
  CHECK((d - vec({0, 1, -1}).normalized()).cwiseAbs().maxCoeff() < 1e-15);

  const Economy eco(vec({1, 2, 3}), {make_cobb_douglas(vec({0.2, 0.3, 0.5})), make_cobb_douglas(vec({0.5, 0.3, 0.2})),
                                     make_cobb_douglas(vec({0.3, 0.4, 0.3}))});
  const PriceIncomePoint pi = br_point_cobb_douglas(eco, vec({1.0, 1.5}));
  const FiberBasis big = fiber_basis(eco, pi);
  REQUIRE(big.directions.size() == 4);
  Mat dirs(big.origin.coords.size(), 4);
  for (int j = 0; j < 4; ++j) {
    dirs.col(j) = big.directions[static_cast<std::size_t>(j)];
    CHECK(dirs.col(j).head(2).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(Eigen::FullPivLU<Mat>(dirs).rank() == 4);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    Vec x = big.origin.coords;
    for (int j = 0; j < 4; ++j) x += u(rng) * dirs.col(j);
    CHECK(excess_norm(eco, AmbientPoint{x}) < 1e-9);
  }
}

TEST_CASE("no-trade curve of the Cobb-Douglas economies") {
  // p(t) and w(t) are linear in t, so the curve is a straight line and the triple vanishes.
  const EquilibriumManifold m(heterogeneous_cd());
  for (double t : {0.6, 1.0, 1.4}) {
    const NoTradeGeodesic g = no_trade_geodesic(m, t);
    CHECK(g.residual < 5e-6);
    CHECK(g.triple_norm < 1e-6);
  }
  CHECK_THROWS_AS(no_trade_geodesic(EquilibriumManifold(Economy(
                                        vec({1, 1, 1}), {make_cobb_douglas(vec({0.2, 0.3, 0.5})),
                                                         make_cobb_douglas(vec({0.5, 0.3, 0.2}))})),
                                    1.0),
                  PreconditionError);
}
