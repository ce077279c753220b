#include "eqlab/economy.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace eqlab {

DemandSpec make_cobb_douglas(Vec alpha) {
  if (alpha.size() < 2) throw DomainError("cobb-douglas: need at least two goods");
  if ((alpha.array() <= 0.0).any()) throw DomainError("cobb-douglas: shares must be positive");
  if (std::abs(alpha.sum() - 1.0) > 1e-12) throw DomainError("cobb-douglas: shares must sum to 1");
  return CobbDouglas{std::move(alpha)};
}

DemandSpec make_ces(Vec a, double rho) {
  if (a.size() < 2) throw DomainError("ces: need at least two goods");
  if ((a.array() <= 0.0).any()) throw DomainError("ces: weights must be positive");
  if (!(rho < 1.0)) throw DomainError("ces: rho must be < 1");
  // The rho -> 0 limit is Cobb-Douglas and must be requested as such.
  if (rho == 0.0) throw DomainError("ces: rho = 0 is Cobb-Douglas; use make_cobb_douglas");
  return Ces{std::move(a), rho};
}

int goods_of(const DemandSpec& spec) {
  return std::visit(
      [](const auto& s) -> int {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, CobbDouglas>)
          return static_cast<int>(s.alpha.size());
        else
          return static_cast<int>(s.a.size());
      },
      spec);
}

bool is_cobb_douglas(const DemandSpec& spec) { return std::holds_alternative<CobbDouglas>(spec); }

PriceVector::PriceVector(Vec normalized) : pbar_(std::move(normalized)) {
  if (pbar_.size() < 1) throw DomainError("price vector: need at least two goods");
  if (!(pbar_.array() > 0.0).all()) throw DomainError("price vector: components must be strictly positive");
}

PriceVector PriceVector::from_full(const Vec& p) {
  if (p.size() < 2) throw DomainError("price vector: need at least two goods");
  if (!(p.array() > 0.0).all()) throw DomainError("price vector: components must be strictly positive");
  return PriceVector(p.head(p.size() - 1) / p(p.size() - 1));
}

Vec PriceVector::full() const {
  Vec p(pbar_.size() + 1);
  p.head(pbar_.size()) = pbar_;
  p(pbar_.size()) = 1.0;
  return p;
}

Economy::Economy(Vec resources, std::vector<DemandSpec> consumers, std::string id)
    : r_(std::move(resources)), consumers_(std::move(consumers)), id_(std::move(id)) {
  if (r_.size() < 2) throw DomainError("economy: need L >= 2 goods");
  if (consumers_.size() < 2) throw DomainError("economy: need M >= 2 consumers");
  if (!(r_.array() > 0.0).all()) throw DomainError("economy: total resources must be strictly positive");
  for (const auto& c : consumers_) {
    if (goods_of(c) != goods()) throw DomainError("economy: demand spec dimension differs from L");
  }
}

bool Economy::all_cobb_douglas() const {
  return std::all_of(consumers_.begin(), consumers_.end(), is_cobb_douglas);
}

bool Endowment::resource_feasible(const Vec& r, double tol) const {
  if (omega.cols() != r.size()) return false;
  return ((omega.colwise().sum().transpose() - r).cwiseAbs().array() <= tol).all();
}

Vec Endowment::wealths(const PriceVector& p) const { return omega * p.full(); }

Vec demand_unnormalized(const DemandSpec& spec, const Vec& p, double w) {
  if (p.size() != goods_of(spec)) throw DomainError("demand: price dimension differs from spec");
  Vec out(p.size());
  detail::demand_into<double>(spec, std::span<const double>(p.data(), static_cast<std::size_t>(p.size())), w,
                              std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

Vec demand(const DemandSpec& spec, const PriceVector& p, double w) { return demand_unnormalized(spec, p.full(), w); }

Vec aggregate_excess(const Economy& eco, const PriceVector& p, const Endowment& omega) {
  if (p.goods() != eco.goods()) throw DomainError("aggregate_excess: price dimension differs from L");
  if (omega.omega.rows() != eco.consumers() || omega.omega.cols() != eco.goods())
    throw DomainError("aggregate_excess: endowment must be M x L");
  const Vec& pbar = p.normalized();
  auto z = detail::excess_demand<double>(eco, std::span<const double>(pbar.data(), static_cast<std::size_t>(pbar.size())),
                                         omega.omega);
  return Eigen::Map<Vec>(z.data(), static_cast<Eigen::Index>(z.size()));
}

std::optional<double> utility(const DemandSpec& spec, const Vec& bundle) {
  if (!(bundle.array() > 0.0).all()) return std::nullopt;
  if (const auto* cd = std::get_if<CobbDouglas>(&spec)) {
    return cd->alpha.dot(bundle.array().log().matrix());
  }
  const auto& ces = std::get<Ces>(spec);
  const double inner = (ces.a.array() * bundle.array().pow(ces.rho)).sum();
  return std::pow(inner, 1.0 / ces.rho);
}

namespace {

double sup_norm(const Vec& v) { return v.cwiseAbs().maxCoeff(); }

double excess_first(const Economy& eco, const Endowment& omega, double log_p) {
  Vec pbar(1);
  pbar(0) = std::exp(log_p);
  return aggregate_excess(eco, PriceVector(pbar), omega)(0);
}

// Keeps, among roots closer than tol in log-price, the one with the smaller residual.
void dedupe(std::vector<std::pair<Vec, double>>& roots, double tol) {
  std::vector<std::pair<Vec, double>> kept;
  for (auto& cand : roots) {
    bool merged = false;
    for (auto& k : kept) {
      const double dist = (cand.first.array().log() - k.first.array().log()).abs().maxCoeff();
      if (dist < tol) {
        if (cand.second < k.second) k = cand;
        merged = true;
        break;
      }
    }
    if (!merged) kept.push_back(std::move(cand));
  }
  roots = std::move(kept);
}

EquilibriumSet scan_two_goods(const Economy& eco, const Endowment& omega, const ScanConfig& scan) {
  if (scan.cells < 1 || !(scan.log_p_max > scan.log_p_min))
    throw DomainError("find_equilibria: invalid scan window");
  const double width = (scan.log_p_max - scan.log_p_min) / scan.cells;
  auto node = [&](int j) { return scan.log_p_min + width * j; };

  std::vector<double> values(static_cast<std::size_t>(scan.cells) + 1);
  for (int j = 0; j <= scan.cells; ++j) values[static_cast<std::size_t>(j)] = excess_first(eco, omega, node(j));

  EquilibriumSet out;
  std::vector<std::pair<Vec, double>> roots;
  std::vector<int> root_cells;
  auto accept = [&](double log_p, int cell) {
    Vec pbar(1);
    pbar(0) = std::exp(log_p);
    const double res = sup_norm(aggregate_excess(eco, PriceVector(pbar), omega));
    if (res < scan.tol_residual) {
      roots.emplace_back(pbar, res);
      root_cells.push_back(cell);
    }
  };

  for (int j = 0; j <= scan.cells; ++j) {
    const double fa = values[static_cast<std::size_t>(j)];
    if (fa == 0.0) {
      accept(node(j), std::min(j, scan.cells - 1));
      continue;
    }
    if (j == scan.cells) break;
    const double fb = values[static_cast<std::size_t>(j) + 1];
    if (fb == 0.0 || (fa > 0.0) == (fb > 0.0)) continue;
    double lo = node(j), hi = node(j + 1), flo = fa;
    while (hi - lo > scan.tol_p) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double fm = excess_first(eco, omega, mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm > 0.0) == (flo > 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    accept(0.5 * (lo + hi), j);
  }

  // Standard boundary behaviour is Z1 > 0 as p1 -> 0 and Z1 < 0 as p1 -> inf;
  // anything else, or a root in an end cell, means roots may lie outside.
  out.boundary_warning = !(values.front() > 0.0) || !(values.back() < 0.0);
  for (int c : root_cells) {
    if (c == 0 || c == scan.cells - 1) out.boundary_warning = true;
  }

  dedupe(roots, scan.tol_dedupe);
  std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) { return a.first(0) < b.first(0); });
  for (auto& [p, res] : roots) {
    out.prices.emplace_back(p);
    out.residuals.push_back(res);
  }
  return out;
}

// Residual of the first L-1 excess demands and its Jacobian (forward mode).
void newton_system(const Economy& eco, const Mat& omega, const Vec& pbar, Vec& z, Mat& jac) {
  const int n = static_cast<int>(pbar.size());
  z.resize(n);
  jac.resize(n, n);
  std::vector<Dual<double>> x(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    for (int j = 0; j < n; ++j) x[static_cast<std::size_t>(j)] = Dual<double>(pbar(j), j == c ? 1.0 : 0.0);
    auto zz = detail::excess_demand<Dual<double>>(eco, x, omega);
    for (int r = 0; r < n; ++r) {
      jac(r, c) = zz[static_cast<std::size_t>(r)].d;
      z(r) = zz[static_cast<std::size_t>(r)].v;
    }
  }
}

std::optional<Vec> damped_newton(const Economy& eco, const Endowment& omega, Vec pbar, const ScanConfig& scan) {
  Vec z;
  Mat jac;
  for (int it = 0; it < scan.newton_max_iter; ++it) {
    newton_system(eco, omega.omega, pbar, z, jac);
    const double res = sup_norm(z);
    if (!std::isfinite(res)) return std::nullopt;
    Vec step = jac.colPivHouseholderQr().solve(-z);
    if (!step.allFinite()) return std::nullopt;
    double lambda = 1.0;
    bool improved = false;
    Vec trial;
    for (int h = 0; h <= scan.max_halvings; ++h, lambda *= 0.5) {
      trial = pbar + lambda * step;
      if (!(trial.array() > 0.0).all()) continue;
      const Vec zt = aggregate_excess(eco, PriceVector(trial), omega).head(pbar.size());
      if (sup_norm(zt) < res) {
        improved = true;
        break;
      }
    }
    if (!improved) {
      // No decrease possible: either converged to roundoff or stuck.
      break;
    }
    const double rel_step = (trial - pbar).cwiseAbs().maxCoeff() / pbar.cwiseAbs().maxCoeff();
    pbar = trial;
    if (rel_step < 1e-15) break;
  }
  if (!(pbar.array() > 0.0).all()) return std::nullopt;
  return pbar;
}

EquilibriumSet newton_many_goods(const Economy& eco, const Endowment& omega, const ScanConfig& scan) {
  const int n = eco.goods() - 1;
  std::mt19937_64 rng(scan.seed);
  std::uniform_real_distribution<double> unif(scan.log_p_min, scan.log_p_max);
  std::vector<std::pair<Vec, double>> roots;
  EquilibriumSet out;
  for (int s = 0; s < scan.newton_starts; ++s) {
    Vec start(n);
    for (int l = 0; l < n; ++l) start(l) = std::exp(unif(rng));
    auto sol = damped_newton(eco, omega, start, scan);
    if (!sol) continue;
    const double res = sup_norm(aggregate_excess(eco, PriceVector(*sol), omega));
    if (res < scan.tol_residual) roots.emplace_back(*sol, res);
  }
  dedupe(roots, scan.tol_dedupe);
  std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
    return std::lexicographical_compare(a.first.data(), a.first.data() + a.first.size(), b.first.data(),
                                        b.first.data() + b.first.size());
  });
  for (auto& [p, res] : roots) {
    const Vec lp = p.array().log();
    if (lp.minCoeff() < scan.log_p_min || lp.maxCoeff() > scan.log_p_max) out.boundary_warning = true;
    out.prices.emplace_back(p);
    out.residuals.push_back(res);
  }
  return out;
}

}  // namespace

EquilibriumSet find_equilibria(const Economy& eco, const Endowment& omega, const ScanConfig& scan) {
  if (omega.omega.rows() != eco.consumers() || omega.omega.cols() != eco.goods())
    throw DomainError("find_equilibria: endowment must be M x L");
  if (eco.goods() == 2) return scan_two_goods(eco, omega, scan);
  return newton_many_goods(eco, omega, scan);
}

std::size_t count_equilibria(const Economy& eco, const Endowment& omega, const ScanConfig& scan) {
  return find_equilibria(eco, omega, scan).size();
}

}  // namespace eqlab
