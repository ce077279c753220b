#pragma once

// Pure exchange economies with closed-form demand: Cobb-Douglas and CES
// consumers, aggregate excess demand, and equilibrium price enumeration.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "eqlab/dual.hpp"
#include "eqlab/error.hpp"

namespace eqlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct CobbDouglas {
  Vec alpha;  // expenditure shares, positive, summing to one
};

struct Ces {
  Vec a;       // positive weights
  double rho;  // rho < 1, rho != 0
  double sigma() const { return 1.0 / (1.0 - rho); }
};

using DemandSpec = std::variant<CobbDouglas, Ces>;

/// Validated constructors. Throw DomainError on invalid parameters.
DemandSpec make_cobb_douglas(Vec alpha);
DemandSpec make_ces(Vec a, double rho);

int goods_of(const DemandSpec& spec);
bool is_cobb_douglas(const DemandSpec& spec);

/// Price vector normalized so that the last good is the numeraire. Only the
/// first L-1 coordinates are stored; each is strictly positive.
class PriceVector {
 public:
  explicit PriceVector(Vec normalized);
  static PriceVector from_full(const Vec& p);

  const Vec& normalized() const { return pbar_; }
  Vec full() const;
  int goods() const { return static_cast<int>(pbar_.size()) + 1; }
  double operator[](int l) const { return l == goods() - 1 ? 1.0 : pbar_(l); }

 private:
  Vec pbar_;
};

class Economy {
 public:
  Economy(Vec resources, std::vector<DemandSpec> consumers, std::string id = {});

  int goods() const { return static_cast<int>(r_.size()); }
  int consumers() const { return static_cast<int>(consumers_.size()); }
  const Vec& resources() const { return r_; }
  const DemandSpec& consumer(int i) const { return consumers_.at(static_cast<std::size_t>(i)); }
  const std::vector<DemandSpec>& specs() const { return consumers_; }
  const std::string& id() const { return id_; }
  bool all_cobb_douglas() const;

 private:
  Vec r_;
  std::vector<DemandSpec> consumers_;
  std::string id_;
};

/// Endowment matrix, one row per consumer. Entries may be negative.
struct Endowment {
  Mat omega;  // M x L

  bool resource_feasible(const Vec& r, double tol = 1e-10) const;
  Vec wealths(const PriceVector& p) const;
};

namespace detail {

// Demand of one consumer at an un-normalized price vector of length L.
// Written once for double and for dual numbers.
template <typename T>
void demand_into(const DemandSpec& spec, std::span<const T> p, const T& w, std::span<T> out) {
  for (const T& pl : p) {
    if (!(value_of(pl) > 0.0)) throw DomainError("demand: price components must be strictly positive");
  }
  if (const auto* cd = std::get_if<CobbDouglas>(&spec)) {
    for (std::size_t l = 0; l < p.size(); ++l) out[l] = cd->alpha(static_cast<Eigen::Index>(l)) * w / p[l];
    return;
  }
  using std::pow;
  const auto& ces = std::get<Ces>(spec);
  const double s = ces.sigma();
  T denom(0.0);
  for (std::size_t l = 0; l < p.size(); ++l)
    denom += std::pow(ces.a(static_cast<Eigen::Index>(l)), s) * pow(p[l], 1.0 - s);
  for (std::size_t l = 0; l < p.size(); ++l)
    out[l] = std::pow(ces.a(static_cast<Eigen::Index>(l)), s) * pow(p[l], -s) * w / denom;
}

// Z(p, omega) for the normalized price pbar (length L-1).
template <typename T>
std::vector<T> excess_demand(const Economy& eco, std::span<const T> pbar, const Mat& omega) {
  const int L = eco.goods();
  std::vector<T> p(static_cast<std::size_t>(L));
  for (int l = 0; l < L - 1; ++l) p[static_cast<std::size_t>(l)] = pbar[static_cast<std::size_t>(l)];
  p.back() = T(1.0);
  std::vector<T> z(static_cast<std::size_t>(L), T(0.0));
  std::vector<T> f(static_cast<std::size_t>(L));
  for (int i = 0; i < eco.consumers(); ++i) {
    T w(0.0);
    for (int l = 0; l < L; ++l) w += p[static_cast<std::size_t>(l)] * omega(i, l);
    demand_into<T>(eco.consumer(i), p, w, f);
    for (int l = 0; l < L; ++l) z[static_cast<std::size_t>(l)] += f[static_cast<std::size_t>(l)] - omega(i, l);
  }
  return z;
}

}  // namespace detail

/// Demand f_i(p, w). The budget identity p.f = w holds for any real w.
Vec demand(const DemandSpec& spec, const PriceVector& p, double w);

/// Demand at an un-normalized price vector (all L coordinates given).
Vec demand_unnormalized(const DemandSpec& spec, const Vec& p, double w);

/// Z(p, omega) = sum_i f_i(p, p.omega_i) - sum_i omega_i.
Vec aggregate_excess(const Economy& eco, const PriceVector& p, const Endowment& omega);

/// Direct utility at a bundle: sum alpha log x (Cobb-Douglas) or the CES
/// aggregator. Empty when the bundle is outside the utility's domain.
std::optional<double> utility(const DemandSpec& spec, const Vec& bundle);

struct ScanConfig {
  // L = 2 grid scan in log p1.
  double log_p_min = -10.0;
  double log_p_max = 10.0;
  int cells = 40000;
  double tol_p = 1e-12;
  double tol_residual = 1e-9;
  double tol_dedupe = 1e-6;
  // L > 2 multi-start damped Newton.
  int newton_starts = 64;
  int newton_max_iter = 100;
  int max_halvings = 50;
  std::uint64_t seed = 0;
};

struct EquilibriumSet {
  std::vector<PriceVector> prices;  // ascending in p1
  std::vector<double> residuals;    // sup-norm of Z at each price
  bool boundary_warning = false;    // roots may lie outside the scanned window

  std::size_t size() const { return prices.size(); }
  bool empty() const { return prices.empty(); }
};

/// All positive equilibrium prices for a fixed endowment. For L = 2 the count
/// is exact for roots separated by more than one grid cell.
EquilibriumSet find_equilibria(const Economy& eco, const Endowment& omega, const ScanConfig& scan = {});

std::size_t count_equilibria(const Economy& eco, const Endowment& omega, const ScanConfig& scan = {});

}  // namespace eqlab
