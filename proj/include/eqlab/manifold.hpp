#pragma once

// The equilibrium manifold E(r) and the price-income equilibria B(r) in flat
// ambient coordinates (pbar, w1bar, w1^L, ..., w_{M-1}bar, w_{M-1}^L), i.e.
// R^{LM-1}, with omega_M = r - sum_{i<M} omega_i and p_L = 1 eliminated.
//
// B(r) is parametrized by the first M-1 wealths t = (w_1, ..., w_{M-1}).
// Chart parameters for E(r) are laid out as (t, omega_1bar, ..., omega_{M-1}bar).

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "eqlab/economy.hpp"
#include "eqlab/geometry.hpp"

namespace eqlab {

struct AmbientPoint {
  Vec coords;  // length LM - 1
};

struct PriceIncomePoint {
  PriceVector p;
  Vec w;  // wealths, length M
};

struct ChartPoint {
  Vec t;           // length M - 1
  Mat omega_bar;   // (M - 1) x (L - 1)
};

/// Sup-norm of sum_i f_i(p, w_i) - r.
double br_residual(const Economy& eco, const PriceIncomePoint& pi);

namespace detail {

// Closed-form Cobb-Douglas B(r) point. Returns (pbar, w) with w of length M.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> br_cobb_douglas(const Economy& eco, std::span<const T> t) {
  const int L = eco.goods(), M = eco.consumers();
  const Vec& r = eco.resources();
  auto alpha = [&](int i, int l) { return std::get<CobbDouglas>(eco.consumer(i)).alpha(l); };
  std::vector<T> w(static_cast<std::size_t>(M));
  T spent(0.0);
  for (int i = 0; i < M - 1; ++i) {
    w[static_cast<std::size_t>(i)] = t[static_cast<std::size_t>(i)];
    spent += alpha(i, L - 1) * t[static_cast<std::size_t>(i)];
  }
  w.back() = (r(L - 1) - spent) / alpha(M - 1, L - 1);
  std::vector<T> pbar(static_cast<std::size_t>(L - 1));
  for (int l = 0; l < L - 1; ++l) {
    T v(0.0);
    for (int i = 0; i < M; ++i) v += alpha(i, l) * w[static_cast<std::size_t>(i)];
    pbar[static_cast<std::size_t>(l)] = v / r(l);
  }
  return {std::move(pbar), std::move(w)};
}

// Phi(t, omega_bar) given the B(r) values at t. u holds the omega_bar block
// starting at offset M - 1.
template <typename T>
std::vector<T> assemble_ambient(int L, int M, const std::vector<T>& pbar, const std::vector<T>& w,
                                std::span<const T> u) {
  std::vector<T> x;
  x.reserve(static_cast<std::size_t>(L * M - 1));
  for (const T& p : pbar) x.push_back(p);
  std::size_t k = static_cast<std::size_t>(M - 1);
  for (int i = 0; i < M - 1; ++i) {
    T last = w[static_cast<std::size_t>(i)];
    for (int l = 0; l < L - 1; ++l) {
      const T& om = u[k++];
      x.push_back(om);
      last -= pbar[static_cast<std::size_t>(l)] * om;
    }
    x.push_back(last);
  }
  return x;
}

}  // namespace detail

/// Explicit Cobb-Douglas realization of the B(r) parametrization.
/// Throws UnsupportedFamilyError for non-Cobb-Douglas consumers and
/// OutOfConeError if some price is non-positive.
PriceIncomePoint br_point_cobb_douglas(const Economy& eco, const Vec& t);

struct ContinuationOptions {
  double tol_residual = 1e-9;
  int max_iter = 60;
  double step_cap = 0.1;   // max |delta log p| per continuation step
  double t_step = 0.05;    // initial step in t (sup-norm)
  int max_subdivisions = 24;
};

/// Newton solve of B(r) at t for the unknown prices; w_M follows from the
/// budget identity sum_i w_i = p . r. Throws ConvergenceError or, when the
/// solution is further than step_cap (log-price) from the guess, ContinuationError.
PriceIncomePoint br_point_numeric(const Economy& eco, const Vec& t, const PriceIncomePoint& guess,
                                  const ContinuationOptions& opts = {});

/// Follows B(r) from a solved point to parameter t along a straight path,
/// subdividing steps that exceed the cap.
PriceIncomePoint continue_br(const Economy& eco, const PriceIncomePoint& from, const Vec& t,
                             const ContinuationOptions& opts = {});

/// A B(r) point obtained from an equilibrium of the given endowment
/// (the root closest to p = 1 in log-price). Empty if there is none.
std::optional<PriceIncomePoint> br_anchor(const Economy& eco, const Endowment& omega, const ScanConfig& scan = {});

/// The equal-split endowment r / M for every consumer.
Endowment equal_split(const Economy& eco);

/// E(r) with a fixed strategy for evaluating B(r): closed form for all
/// Cobb-Douglas economies, continuation from an anchor otherwise.
class EquilibriumManifold {
 public:
  explicit EquilibriumManifold(Economy eco, std::optional<PriceIncomePoint> anchor = std::nullopt,
                               ContinuationOptions opts = {});

  const Economy& economy() const { return eco_; }
  int param_dim() const { return eco_.goods() * (eco_.consumers() - 1); }
  int ambient_dim() const { return eco_.goods() * eco_.consumers() - 1; }
  bool closed_form() const { return closed_form_; }
  const std::optional<PriceIncomePoint>& anchor() const { return anchor_; }

  PriceIncomePoint price_income(const Vec& t) const;
  AmbientPoint phi(const ChartPoint& cp) const;
  Chart chart(Box domain = {}) const;

 private:
  Economy eco_;
  std::optional<PriceIncomePoint> anchor_;
  ContinuationOptions opts_;
  bool closed_form_;
};

/// Phi(t, omega_bar). Uses the closed form for Cobb-Douglas economies and
/// continuation from the equal-split equilibrium otherwise.
AmbientPoint phi_chart(const Economy& eco, const ChartPoint& cp);

/// Packs / unpacks chart parameters u = (t, omega_1bar, ..., omega_{M-1}bar).
Vec pack_chart_point(const ChartPoint& cp);
ChartPoint unpack_chart_point(const Economy& eco, const Vec& u);

/// (p, omega) <-> ambient coordinates.
AmbientPoint encode(const Economy& eco, const PriceVector& p, const Endowment& omega);
std::pair<PriceVector, Endowment> decode(const Economy& eco, const AmbientPoint& x);

/// Reads (t, omega_bar) off an ambient point: t_i = p . omega_i.
ChartPoint chart_point_of(const Economy& eco, const AmbientPoint& x);

struct Theta {
  Vec aggregate_demand;                          // length L
  std::vector<std::optional<double>> utilities;  // u_i(f_i) for i < M; empty outside the domain
};

Theta theta(const Economy& eco, const PriceIncomePoint& pi);

/// The no-trade equilibrium omega_i = f_i(p, w_i) of the fiber over pi.
/// Throws PreconditionError if pi is not on B(r) within tol.
Endowment no_trade_point(const Economy& eco, const PriceIncomePoint& pi, double tol = 1e-9);

struct FiberBasis {
  AmbientPoint origin;          // the no-trade point
  std::vector<Vec> directions;  // (L-1)(M-1) affine directions
};

FiberBasis fiber_basis(const Economy& eco, const PriceIncomePoint& pi, double tol = 1e-9);

struct NoTradeGeodesic {
  double residual = 0.0;     // tangential acceleration of t -> Phi(t, 0)
  Eigen::Vector3d triple;    // (-p p' w'', p p'' + w' w'', p p' p'')
  double triple_norm = 0.0;
};

/// L = 2, M = 2 only: geodesic test of the curve t -> Phi(t, 0) together with
/// the explicit wedge triple in p(t) and w(t) = w_1(t).
NoTradeGeodesic no_trade_geodesic(const EquilibriumManifold& manifold, double t, double h_c = 1e-4,
                                  const DiffOptions& opts = {});

}  // namespace eqlab
