#include "eqlab/manifold.hpp"

#include <algorithm>
#include <cmath>

namespace eqlab {

namespace {

double sup_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

void check_t(const Economy& eco, const Vec& t) {
  if (t.size() != eco.consumers() - 1) throw DomainError("B(r) parameter t must have M - 1 entries");
}

// First L-1 components of sum_i f_i(p, w_i) - r, with w_M = p.r - sum(t).
template <typename T>
std::vector<T> br_system(const Economy& eco, const Vec& t, std::span<const T> pbar) {
  const int L = eco.goods(), M = eco.consumers();
  const Vec& r = eco.resources();
  std::vector<T> p(static_cast<std::size_t>(L));
  for (int l = 0; l < L - 1; ++l) p[static_cast<std::size_t>(l)] = pbar[static_cast<std::size_t>(l)];
  p.back() = T(1.0);
  T wealth_m(0.0);
  for (int l = 0; l < L; ++l) wealth_m += p[static_cast<std::size_t>(l)] * r(l);
  for (int i = 0; i < M - 1; ++i) wealth_m -= t(i);

  std::vector<T> total(static_cast<std::size_t>(L), T(0.0)), f(static_cast<std::size_t>(L));
  for (int i = 0; i < M; ++i) {
    const T w = i < M - 1 ? T(t(i)) : wealth_m;
    detail::demand_into<T>(eco.consumer(i), p, w, f);
    for (int l = 0; l < L; ++l) total[static_cast<std::size_t>(l)] += f[static_cast<std::size_t>(l)];
  }
  std::vector<T> out(static_cast<std::size_t>(L - 1));
  for (int l = 0; l < L - 1; ++l) out[static_cast<std::size_t>(l)] = total[static_cast<std::size_t>(l)] - r(l);
  return out;
}

Vec wealths_for(const Economy& eco, const Vec& t, const Vec& pbar) {
  const int M = eco.consumers();
  Vec w(M);
  w.head(M - 1) = t;
  w(M - 1) = PriceVector(pbar).full().dot(eco.resources()) - t.sum();
  return w;
}

}  // namespace

double br_residual(const Economy& eco, const PriceIncomePoint& pi) {
  if (pi.w.size() != eco.consumers()) throw DomainError("price-income point must carry M wealths");
  Vec total = Vec::Zero(eco.goods());
  for (int i = 0; i < eco.consumers(); ++i) total += demand(eco.consumer(i), pi.p, pi.w(i));
  return sup_norm(total - eco.resources());
}

PriceIncomePoint br_point_cobb_douglas(const Economy& eco, const Vec& t) {
  if (!eco.all_cobb_douglas()) throw UnsupportedFamilyError("br_point_cobb_douglas: every consumer must be Cobb-Douglas");
  check_t(eco, t);
  auto [pbar, w] = detail::br_cobb_douglas<double>(eco, std::span<const double>(t.data(), static_cast<std::size_t>(t.size())));
  for (double p : pbar) {
    if (!(p > 0.0)) throw OutOfConeError("br_point_cobb_douglas: parameter maps outside the positive price cone");
  }
  return {PriceVector(Eigen::Map<Vec>(pbar.data(), static_cast<Eigen::Index>(pbar.size()))),
          Eigen::Map<Vec>(w.data(), static_cast<Eigen::Index>(w.size()))};
}

PriceIncomePoint br_point_numeric(const Economy& eco, const Vec& t, const PriceIncomePoint& guess,
                                  const ContinuationOptions& opts) {
  check_t(eco, t);
  const int n = eco.goods() - 1;
  const Vec x_guess = guess.p.normalized().array().log();
  Vec x = x_guess;

  // Newton in log-price, confined to the step-cap box around the guess.
  auto residual = [&](const Vec& xs) {
    const Vec pb = xs.array().exp();
    auto r = br_system<double>(eco, t, std::span<const double>(pb.data(), static_cast<std::size_t>(pb.size())));
    return Vec(Eigen::Map<Vec>(r.data(), n));
  };
  Vec res = residual(x);
  double norm = sup_norm(res);
  std::vector<Dual<double>> pd(static_cast<std::size_t>(n));
  Mat jac(n, n);
  for (int it = 0; it < opts.max_iter && std::isfinite(norm); ++it) {
    const Vec pb = x.array().exp();
    for (int c = 0; c < n; ++c) {
      for (int j = 0; j < n; ++j) pd[static_cast<std::size_t>(j)] = Dual<double>(pb(j), j == c ? pb(j) : 0.0);
      auto r = br_system<Dual<double>>(eco, t, pd);
      for (int k = 0; k < n; ++k) jac(k, c) = r[static_cast<std::size_t>(k)].d;
    }
    const Vec step = jac.colPivHouseholderQr().solve(-res);
    if (!step.allFinite()) break;
    double lambda = 1.0;
    bool improved = false;
    Vec trial, trial_res;
    for (int h = 0; h <= 50; ++h, lambda *= 0.5) {
      trial = x + lambda * step;
      trial = trial.cwiseMax((x_guess.array() - opts.step_cap).matrix()).cwiseMin((x_guess.array() + opts.step_cap).matrix());
      trial_res = residual(trial);
      if (sup_norm(trial_res) < norm) {
        improved = true;
        break;
      }
    }
    if (!improved) break;
    const double moved = sup_norm(trial - x);
    x = trial;
    res = trial_res;
    norm = sup_norm(res);
    if (moved < 1e-16) break;
  }
  if (!(norm < opts.tol_residual))
    throw ConvergenceError("br_point_numeric: Newton did not converge within the step cap", norm);

  const Vec pbar = x.array().exp();
  PriceIncomePoint out{PriceVector(pbar), wealths_for(eco, t, pbar)};
  const double full = br_residual(eco, out);
  if (!(full < opts.tol_residual)) throw ConvergenceError("br_point_numeric: residual above tolerance", full);
  return out;
}

PriceIncomePoint continue_br(const Economy& eco, const PriceIncomePoint& from, const Vec& t,
                             const ContinuationOptions& opts) {
  check_t(eco, t);
  const Vec t0 = from.w.head(eco.consumers() - 1);
  const double dist = sup_norm(t - t0);
  if (dist == 0.0) return br_point_numeric(eco, t, from, opts);

  const double base = std::min(1.0, opts.t_step / dist);
  const double floor = base * std::ldexp(1.0, -opts.max_subdivisions);
  PriceIncomePoint current = from;
  double s = 0.0, ds = base;
  while (s < 1.0) {
    const double next = std::min(1.0, s + ds);
    try {
      current = br_point_numeric(eco, t0 + next * (t - t0), current, opts);
      s = next;
      ds = std::min(base, 2.0 * ds);
    } catch (const ConvergenceError&) {
      ds *= 0.5;
      if (ds < floor)
        throw ContinuationError("continue_br: price jump exceeds the step cap; B(r) folds or branches near t");
    }
  }
  return current;
}

Endowment equal_split(const Economy& eco) {
  Endowment e;
  e.omega = eco.resources().transpose().replicate(eco.consumers(), 1) / eco.consumers();
  return e;
}

std::optional<PriceIncomePoint> br_anchor(const Economy& eco, const Endowment& omega, const ScanConfig& scan) {
  const auto eq = find_equilibria(eco, omega, scan);
  if (eq.empty()) return std::nullopt;
  const auto best = std::min_element(eq.prices.begin(), eq.prices.end(), [](const auto& a, const auto& b) {
    return a.normalized().array().log().abs().maxCoeff() < b.normalized().array().log().abs().maxCoeff();
  });
  return PriceIncomePoint{*best, omega.wealths(*best)};
}

EquilibriumManifold::EquilibriumManifold(Economy eco, std::optional<PriceIncomePoint> anchor, ContinuationOptions opts)
    : eco_(std::move(eco)), anchor_(std::move(anchor)), opts_(opts), closed_form_(eco_.all_cobb_douglas()) {
  if (!closed_form_ && !anchor_) {
    anchor_ = br_anchor(eco_, equal_split(eco_));
    if (!anchor_) throw PreconditionError("equilibrium manifold: no equilibrium at the equal-split endowment to anchor B(r)");
  }
  if (anchor_ && !(br_residual(eco_, *anchor_) < opts_.tol_residual))
    throw PreconditionError("equilibrium manifold: anchor is not on B(r)");
}

PriceIncomePoint EquilibriumManifold::price_income(const Vec& t) const {
  if (closed_form_) return br_point_cobb_douglas(eco_, t);
  return continue_br(eco_, *anchor_, t, opts_);
}

AmbientPoint EquilibriumManifold::phi(const ChartPoint& cp) const {
  const int L = eco_.goods(), M = eco_.consumers();
  if (cp.omega_bar.rows() != M - 1 || cp.omega_bar.cols() != L - 1)
    throw DomainError("chart point: omega_bar must be (M-1) x (L-1)");
  const PriceIncomePoint pi = price_income(cp.t);
  const Vec u = pack_chart_point(cp);
  const Vec& pbar = pi.p.normalized();
  std::vector<double> pb(pbar.data(), pbar.data() + pbar.size());
  std::vector<double> w(pi.w.data(), pi.w.data() + pi.w.size());
  auto x = detail::assemble_ambient<double>(L, M, pb, w, std::span<const double>(u.data(), static_cast<std::size_t>(u.size())));
  return {Eigen::Map<Vec>(x.data(), static_cast<Eigen::Index>(x.size()))};
}

Chart EquilibriumManifold::chart(Box domain) const {
  const int L = eco_.goods(), M = eco_.consumers();
  const std::string name = eco_.id().empty() ? "equilibrium-manifold" : eco_.id();
  if (closed_form_) {
    const Economy eco = eco_;
    auto f = [eco, L, M](auto u) {
      using T = typename decltype(u)::value_type;
      auto [pbar, w] = detail::br_cobb_douglas<T>(eco, u.first(static_cast<std::size_t>(M - 1)));
      for (const T& p : pbar) {
        if (!(value_of(p) > 0.0)) throw OutOfConeError("equilibrium chart: parameter maps outside the positive price cone");
      }
      return detail::assemble_ambient<T>(L, M, pbar, w, u);
    };
    return Chart::generic(param_dim(), ambient_dim(), f, std::move(domain), name);
  }
  EquilibriumManifold self = *this;
  return Chart(
      param_dim(), ambient_dim(),
      [self](std::span<const double> u) {
        const Vec uv = Eigen::Map<const Vec>(u.data(), static_cast<Eigen::Index>(u.size()));
        const AmbientPoint x = self.phi(unpack_chart_point(self.economy(), uv));
        return std::vector<double>(x.coords.data(), x.coords.data() + x.coords.size());
      },
      std::move(domain), name);
}

AmbientPoint phi_chart(const Economy& eco, const ChartPoint& cp) { return EquilibriumManifold(eco).phi(cp); }

Vec pack_chart_point(const ChartPoint& cp) {
  const auto m1 = cp.omega_bar.rows(), l1 = cp.omega_bar.cols();
  Vec u(cp.t.size() + m1 * l1);
  u.head(cp.t.size()) = cp.t;
  for (Eigen::Index i = 0; i < m1; ++i) u.segment(cp.t.size() + i * l1, l1) = cp.omega_bar.row(i).transpose();
  return u;
}

ChartPoint unpack_chart_point(const Economy& eco, const Vec& u) {
  const int L = eco.goods(), M = eco.consumers();
  if (u.size() != L * (M - 1)) throw DomainError("chart parameters must have L(M-1) entries");
  ChartPoint cp;
  cp.t = u.head(M - 1);
  cp.omega_bar.resize(M - 1, L - 1);
  for (int i = 0; i < M - 1; ++i) cp.omega_bar.row(i) = u.segment((M - 1) + i * (L - 1), L - 1).transpose();
  return cp;
}

AmbientPoint encode(const Economy& eco, const PriceVector& p, const Endowment& omega) {
  const int L = eco.goods(), M = eco.consumers();
  if (p.goods() != L || omega.omega.rows() != M || omega.omega.cols() != L)
    throw DomainError("encode: dimensions differ from the economy");
  Vec x(L * M - 1);
  x.head(L - 1) = p.normalized();
  for (int i = 0; i < M - 1; ++i) x.segment((L - 1) + i * L, L) = omega.omega.row(i).transpose();
  return {x};
}

std::pair<PriceVector, Endowment> decode(const Economy& eco, const AmbientPoint& x) {
  const int L = eco.goods(), M = eco.consumers();
  if (x.coords.size() != L * M - 1) throw DomainError("decode: ambient point must have LM - 1 coordinates");
  PriceVector p(x.coords.head(L - 1));
  Endowment e;
  e.omega.resize(M, L);
  Vec rest = eco.resources();
  for (int i = 0; i < M - 1; ++i) {
    e.omega.row(i) = x.coords.segment((L - 1) + i * L, L).transpose();
    rest -= e.omega.row(i).transpose();
  }
  e.omega.row(M - 1) = rest.transpose();
  return {std::move(p), std::move(e)};
}

ChartPoint chart_point_of(const Economy& eco, const AmbientPoint& x) {
  const int L = eco.goods(), M = eco.consumers();
  auto [p, e] = decode(eco, x);
  ChartPoint cp;
  cp.t = e.wealths(p).head(M - 1);
  cp.omega_bar = e.omega.topLeftCorner(M - 1, L - 1);
  return cp;
}

Theta theta(const Economy& eco, const PriceIncomePoint& pi) {
  if (pi.w.size() != eco.consumers()) throw DomainError("theta: price-income point must carry M wealths");
  Theta out;
  out.aggregate_demand = Vec::Zero(eco.goods());
  for (int i = 0; i < eco.consumers(); ++i) {
    const Vec f = demand(eco.consumer(i), pi.p, pi.w(i));
    out.aggregate_demand += f;
    if (i < eco.consumers() - 1) out.utilities.push_back(utility(eco.consumer(i), f));
  }
  return out;
}

Endowment no_trade_point(const Economy& eco, const PriceIncomePoint& pi, double tol) {
  const double res = br_residual(eco, pi);
  if (!(res < tol)) throw PreconditionError("no_trade_point: input is not on B(r)");
  const int M = eco.consumers();
  Endowment e;
  e.omega.resize(M, eco.goods());
  Vec rest = eco.resources();
  for (int i = 0; i < M - 1; ++i) {
    e.omega.row(i) = demand(eco.consumer(i), pi.p, pi.w(i)).transpose();
    rest -= e.omega.row(i).transpose();
  }
  // Equal to f_M(p, w_M) up to the B(r) residual; exact resource balance.
  e.omega.row(M - 1) = rest.transpose();
  return e;
}

FiberBasis fiber_basis(const Economy& eco, const PriceIncomePoint& pi, double tol) {
  const int L = eco.goods(), M = eco.consumers();
  FiberBasis out;
  out.origin = encode(eco, pi.p, no_trade_point(eco, pi, tol));
  const Vec& pbar = pi.p.normalized();
  for (int i = 0; i < M - 1; ++i) {
    for (int l = 0; l < L - 1; ++l) {
      Vec d = Vec::Zero(L * M - 1);
      d((L - 1) + i * L + l) = 1.0;
      d((L - 1) + i * L + (L - 1)) = -pbar(l);
      out.directions.push_back(std::move(d));
    }
  }
  return out;
}

NoTradeGeodesic no_trade_geodesic(const EquilibriumManifold& manifold, double t, double h_c, const DiffOptions& opts) {
  const Economy& eco = manifold.economy();
  if (eco.goods() != 2 || eco.consumers() != 2) throw PreconditionError("no_trade_geodesic: needs L = 2 and M = 2");
  const Chart chart = manifold.chart();
  const Curve curve = [](double s) { return Vec(Eigen::Vector2d(s, 0.0)); };

  NoTradeGeodesic out;
  out.residual = geodesic_residual(chart, curve, t, h_c, opts);

  const double h = h_c * (1.0 + std::abs(t));
  auto price = [&](double s) { return manifold.price_income(Vec::Constant(1, s)).p.normalized()(0); };
  auto wealth = [&](double s) { return manifold.price_income(Vec::Constant(1, s)).w(0); };
  const double p = price(t), pp = price(t + h), pm = price(t - h);
  const double w = wealth(t), wp = wealth(t + h), wm = wealth(t - h);
  const double p1 = (pp - pm) / (2.0 * h), p2 = (pp - 2.0 * p + pm) / (h * h);
  const double w1 = (wp - wm) / (2.0 * h), w2 = (wp - 2.0 * w + wm) / (h * h);
  out.triple = Eigen::Vector3d(-p * p1 * w2, p * p2 + w1 * w2, p * p1 * p2);
  out.triple_norm = out.triple.norm();
  return out;
}

}  // namespace eqlab
