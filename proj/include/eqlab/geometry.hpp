#pragma once

// Extrinsic geometry of parametrized submanifolds M^n in R^{n+k}: induced
// metric, normal frames, mean curvature, Gauss map dispersion, geodesic
// residuals and the first variation of volume.

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eqlab/dual.hpp"
#include "eqlab/error.hpp"
#include "eqlab/quadrature.hpp"

namespace eqlab {

using Mat = Eigen::MatrixXd;

/// A smooth map from a parameter box into Euclidean space. Charts built with
/// `Chart::generic` also carry dual-number evaluations, which give exact
/// first and second derivatives.
class Chart {
 public:
  template <typename T>
  using Map = std::function<std::vector<T>(std::span<const T>)>;
  using D1 = Dual<double>;
  using D2 = Dual<Dual<double>>;

  Chart(int param_dim, int ambient_dim, Map<double> map, Box domain = {}, std::string name = {});

  /// Builds a chart from a generic callable `f(std::span<const T>) -> std::vector<T>`
  /// usable with T = double and nested dual numbers.
  template <typename F>
  static Chart generic(int param_dim, int ambient_dim, F f, Box domain = {}, std::string name = {}) {
    Chart c(param_dim, ambient_dim, Map<double>(f), std::move(domain), std::move(name));
    c.dual_ = std::make_shared<DualMaps>(DualMaps{Map<D1>(f), Map<D2>(f)});
    return c;
  }

  Vec operator()(const Vec& u) const;
  std::vector<D1> eval(std::span<const D1> u) const;
  std::vector<D2> eval(std::span<const D2> u) const;

  int param_dim() const { return n_; }
  int ambient_dim() const { return m_; }
  int codim() const { return m_ - n_; }
  const Box& domain() const { return domain_; }
  const std::string& name() const { return name_; }
  bool has_dual() const { return dual_ != nullptr; }

  /// Set when the image is known to be an affine subspace (e.g. a degenerate helicoid).
  bool affine() const { return affine_; }
  Chart& set_affine(bool v) {
    affine_ = v;
    return *this;
  }

 private:
  struct DualMaps {
    Map<D1> first;
    Map<D2> second;
  };
  int n_;
  int m_;
  Map<double> map_;
  std::shared_ptr<const DualMaps> dual_;
  Box domain_;
  std::string name_;
  bool affine_ = false;
};

/// x -> A * chart(u) + shift. Keeps dual support.
Chart transform(const Chart& chart, const Mat& linear, const Vec& shift);

enum class Backend { Auto, Dual, FiniteDifference };

struct DiffOptions {
  Backend backend = Backend::Auto;  // Auto: dual numbers when the chart supports them
  double h_rel = 1e-6;              // first-derivative step, h_j = h_rel * (1 + |u_j|)
  double h2_rel = 1e-4;             // second-derivative step
  bool richardson = false;          // Richardson-extrapolate finite differences
  double rank_tol = 1e-10;
};

/// (n+k) x n Jacobian. Throws DegenerateChartError below rank_tol.
Mat jacobian(const Chart& chart, const Vec& u, const DiffOptions& opts = {});

/// Second partials d2(chart)/du_a du_b, stored at index a * n + b.
std::vector<Vec> second_derivatives(const Chart& chart, const Vec& u, const DiffOptions& opts = {});

struct Metric {
  Mat g;  // J^T J
  double sqrt_det = 0.0;
};

Metric metric(const Chart& chart, const Vec& u, const DiffOptions& opts = {});

/// Orthonormal basis (columns) of the normal space. For k = 1 the sign makes
/// the largest-magnitude component positive, ties going to the lowest axis.
Mat normal_frame(const Chart& chart, const Vec& u, const DiffOptions& opts = {});
Mat normal_frame_of(const Mat& jacobian);

struct CurvatureReport {
  Vec point;
  double metric_det = 0.0;
  double sqrt_metric_det = 0.0;
  Mat normal_frame;             // (n+k) x k
  Vec mean_curvature;           // (1/n) g^{ab} (d2 phi / du_a du_b)^normal
  double mean_curvature_norm = 0.0;
  double second_derivative_norm = 0.0;
};

CurvatureReport mean_curvature(const Chart& chart, const Vec& u, const DiffOptions& opts = {});

/// H = 0 test: |H| < tol_minimal * (1 + |second derivatives|).
bool is_minimal(const CurvatureReport& report, double tol_minimal = 1e-5);

struct GridSpec {
  Box box;
  std::vector<int> points;  // per axis, >= 1; a single point sits at the box centre

  std::size_t size() const;
  /// Lexicographic order, first axis slowest.
  std::vector<Vec> nodes() const;
};

struct ScanCell {
  Vec point;
  std::optional<CurvatureReport> report;
  std::string error;  // set when the point was degenerate
};

struct MinimalityScan {
  double sup_norm = 0.0;
  Vec argmax;
  std::vector<ScanCell> cells;
  int degenerate_count = 0;
};

MinimalityScan minimality_scan(const Chart& chart, const GridSpec& grid, const DiffOptions& opts = {});

/// Unit normals over the grid with orientation propagated from the first node.
std::vector<Vec> oriented_normals(const Chart& chart, const GridSpec& grid, const DiffOptions& opts = {});

/// Largest pairwise angle (radians) between oriented unit normals; k = 1 only.
double gauss_map_dispersion(const Chart& chart, const GridSpec& grid, const DiffOptions& opts = {});

using Curve = std::function<Vec(double)>;

/// |tangential part of gamma''(t)| for gamma = chart o curve. Zero along geodesics.
double geodesic_residual(const Chart& chart, const Curve& curve, double t, double h_c = 1e-4,
                         const DiffOptions& opts = {});

using ScalarField = std::function<double(const Vec&)>;

/// amplitude * prod_j sin(pi (u_j - lower_j) / width_j); vanishes on the box boundary.
ScalarField sine_bump(const Box& box, double amplitude = 1.0);

/// amplitude * prod_j sin(modes_j pi (u_j - lower_j) / width_j); also zero on the boundary.
ScalarField sine_mode(const Box& box, double amplitude, std::vector<int> modes);

/// Volume of the normal graph u -> chart(u) + eps psi(u) N(u) over the box,
/// N oriented to agree with the normal at the box centre (k = 1).
double perturbed_volume(const Chart& chart, const Box& box, const ScalarField& psi, double eps,
                        const QuadratureSpec& quad = {}, const DiffOptions& opts = {});

/// The perturbed map itself, as an FD-only chart.
Chart normal_perturbation(const Chart& chart, const Box& box, const ScalarField& psi, double eps,
                          const DiffOptions& opts = {});

struct FirstVariation {
  double numeric = 0.0;  // central difference of the perturbed volume
  double formula = 0.0;  // -n * integral of psi <N, H> dvol
};

FirstVariation first_variation_volume(const Chart& chart, const Box& box, const ScalarField& psi,
                                      const QuadratureSpec& quad = {}, const DiffOptions& opts = {},
                                      double eps = 1e-4);

}  // namespace eqlab
