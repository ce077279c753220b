#include "eqlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace eqlab {

Chart::Chart(int param_dim, int ambient_dim, Map<double> map, Box domain, std::string name)
    : n_(param_dim), m_(ambient_dim), map_(std::move(map)), domain_(std::move(domain)), name_(std::move(name)) {
  if (n_ < 1 || m_ <= n_) throw DomainError("chart: need 1 <= n < ambient dimension");
  if (domain_.dim() == 0) domain_ = Box::unbounded(n_);
  if (domain_.dim() != n_) throw DomainError("chart: domain dimension differs from parameter dimension");
}

Vec Chart::operator()(const Vec& u) const {
  if (u.size() != n_) throw DomainError("chart: parameter vector has wrong length");
  auto x = map_(std::span<const double>(u.data(), static_cast<std::size_t>(u.size())));
  if (static_cast<int>(x.size()) != m_) throw DomainError("chart: map returned wrong ambient dimension");
  return Eigen::Map<Vec>(x.data(), m_);
}

std::vector<Chart::D1> Chart::eval(std::span<const D1> u) const {
  if (!dual_) throw PreconditionError("chart '" + name_ + "' has no dual-number evaluation");
  return dual_->first(u);
}

std::vector<Chart::D2> Chart::eval(std::span<const D2> u) const {
  if (!dual_) throw PreconditionError("chart '" + name_ + "' has no dual-number evaluation");
  return dual_->second(u);
}

namespace {

template <typename T>
std::vector<T> apply_affine(const std::vector<T>& x, const Mat& linear, const Vec& shift) {
  std::vector<T> y(static_cast<std::size_t>(linear.rows()));
  for (Eigen::Index r = 0; r < linear.rows(); ++r) {
    T acc(shift(r));
    for (Eigen::Index c = 0; c < linear.cols(); ++c) acc += linear(r, c) * x[static_cast<std::size_t>(c)];
    y[static_cast<std::size_t>(r)] = acc;
  }
  return y;
}

bool use_dual(const Chart& chart, const DiffOptions& opts) {
  switch (opts.backend) {
    case Backend::Dual:
      if (!chart.has_dual()) throw PreconditionError("dual backend requested for a chart without dual support");
      return true;
    case Backend::FiniteDifference:
      return false;
    case Backend::Auto:
      break;
  }
  return chart.has_dual();
}

double step_for(double h_rel, double uj) { return h_rel * (1.0 + std::abs(uj)); }

void require_inside(const Chart& chart, const Vec& u, double margin) {
  if (u.size() != chart.param_dim()) throw DomainError("chart: parameter vector has wrong length");
  if (!chart.domain().contains(u, margin))
    throw PreconditionError("point lies outside the chart domain (or within the finite-difference margin)");
}

Mat jacobian_dual(const Chart& chart, const Vec& u) {
  const int n = chart.param_dim();
  Mat jac(chart.ambient_dim(), n);
  std::vector<Chart::D1> x(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    for (int j = 0; j < n; ++j) x[static_cast<std::size_t>(j)] = Chart::D1(u(j), j == c ? 1.0 : 0.0);
    auto y = chart.eval(std::span<const Chart::D1>(x));
    for (int r = 0; r < chart.ambient_dim(); ++r) jac(r, c) = y[static_cast<std::size_t>(r)].d;
  }
  return jac;
}

Mat jacobian_fd_step(const Chart& chart, const Vec& u, double h_rel) {
  const int n = chart.param_dim();
  Mat jac(chart.ambient_dim(), n);
  for (int j = 0; j < n; ++j) {
    const double h = step_for(h_rel, u(j));
    Vec up = u, um = u;
    up(j) += h;
    um(j) -= h;
    jac.col(j) = (chart(up) - chart(um)) / (up(j) - um(j));
  }
  return jac;
}

Mat jacobian_fd(const Chart& chart, const Vec& u, const DiffOptions& opts) {
  Mat jac = jacobian_fd_step(chart, u, opts.h_rel);
  if (opts.richardson) jac = (4.0 * jacobian_fd_step(chart, u, 0.5 * opts.h_rel) - jac) / 3.0;
  return jac;
}

void check_rank(const Mat& jac, double rank_tol) {
  Eigen::JacobiSVD<Mat> svd(jac);
  const auto& s = svd.singularValues();
  const double smax = s(0), smin = s(s.size() - 1);
  if (!(smin > rank_tol * std::max(1.0, smax)))
    throw DegenerateChartError("chart Jacobian is rank deficient (smallest singular value " + std::to_string(smin) + ")");
}

std::vector<Vec> second_fd_step(const Chart& chart, const Vec& u, double h2_rel) {
  const int n = chart.param_dim();
  std::vector<Vec> out(static_cast<std::size_t>(n * n));
  const Vec f0 = chart(u);
  for (int a = 0; a < n; ++a) {
    const double ha = step_for(h2_rel, u(a));
    Vec up = u, um = u;
    up(a) += ha;
    um(a) -= ha;
    out[static_cast<std::size_t>(a * n + a)] = (chart(up) - 2.0 * f0 + chart(um)) / (ha * ha);
    for (int b = a + 1; b < n; ++b) {
      const double hb = step_for(h2_rel, u(b));
      Vec pp = u, pm = u, mp = u, mm = u;
      pp(a) += ha, pp(b) += hb;
      pm(a) += ha, pm(b) -= hb;
      mp(a) -= ha, mp(b) += hb;
      mm(a) -= ha, mm(b) -= hb;
      Vec v = (chart(pp) - chart(pm) - chart(mp) + chart(mm)) / (4.0 * ha * hb);
      out[static_cast<std::size_t>(a * n + b)] = v;
      out[static_cast<std::size_t>(b * n + a)] = std::move(v);
    }
  }
  return out;
}

std::vector<Vec> second_dual(const Chart& chart, const Vec& u) {
  const int n = chart.param_dim();
  const int m = chart.ambient_dim();
  std::vector<Vec> out(static_cast<std::size_t>(n * n), Vec(m));
  std::vector<Chart::D2> x(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      for (int j = 0; j < n; ++j) {
        x[static_cast<std::size_t>(j)] =
            Chart::D2(Chart::D1(u(j), j == a ? 1.0 : 0.0), Chart::D1(j == b ? 1.0 : 0.0, 0.0));
      }
      auto y = chart.eval(std::span<const Chart::D2>(x));
      Vec v(m);
      for (int r = 0; r < m; ++r) v(r) = y[static_cast<std::size_t>(r)].d.d;
      out[static_cast<std::size_t>(a * n + b)] = v;
      out[static_cast<std::size_t>(b * n + a)] = v;
    }
  }
  return out;
}

}  // namespace

Chart transform(const Chart& chart, const Mat& linear, const Vec& shift) {
  if (linear.cols() != chart.ambient_dim() || linear.rows() != shift.size())
    throw DomainError("transform: linear map does not match chart ambient dimension");
  const int m = static_cast<int>(linear.rows());
  if (chart.has_dual()) {
    auto f = [chart, linear, shift](auto u) {
      using T = typename decltype(u)::value_type;
      std::vector<T> x;
      if constexpr (std::is_same_v<T, double>) {
        Vec xv = chart(Eigen::Map<const Vec>(u.data(), static_cast<Eigen::Index>(u.size())));
        x.assign(xv.data(), xv.data() + xv.size());
      } else {
        x = chart.eval(u);
      }
      return apply_affine(x, linear, shift);
    };
    Chart out = Chart::generic(chart.param_dim(), m, f, chart.domain(), chart.name() + "/transformed");
    out.set_affine(chart.affine());
    return out;
  }
  Chart out(
      chart.param_dim(), m,
      [chart, linear, shift](std::span<const double> u) {
        Vec x = chart(Eigen::Map<const Vec>(u.data(), static_cast<Eigen::Index>(u.size())));
        return apply_affine(std::vector<double>(x.data(), x.data() + x.size()), linear, shift);
      },
      chart.domain(), chart.name() + "/transformed");
  out.set_affine(chart.affine());
  return out;
}

Mat jacobian(const Chart& chart, const Vec& u, const DiffOptions& opts) {
  Mat jac;
  if (use_dual(chart, opts)) {
    require_inside(chart, u, 0.0);
    jac = jacobian_dual(chart, u);
  } else {
    require_inside(chart, u, 2.0 * step_for(opts.h_rel, u.cwiseAbs().maxCoeff()));
    jac = jacobian_fd(chart, u, opts);
  }
  check_rank(jac, opts.rank_tol);
  return jac;
}

std::vector<Vec> second_derivatives(const Chart& chart, const Vec& u, const DiffOptions& opts) {
  if (use_dual(chart, opts)) {
    require_inside(chart, u, 0.0);
    return second_dual(chart, u);
  }
  require_inside(chart, u, 2.0 * step_for(opts.h2_rel, u.cwiseAbs().maxCoeff()));
  auto coarse = second_fd_step(chart, u, opts.h2_rel);
  if (!opts.richardson) return coarse;
  auto fine = second_fd_step(chart, u, 0.5 * opts.h2_rel);
  for (std::size_t i = 0; i < coarse.size(); ++i) coarse[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
  return coarse;
}

Metric metric(const Chart& chart, const Vec& u, const DiffOptions& opts) {
  const Mat jac = jacobian(chart, u, opts);
  Metric out;
  out.g = jac.transpose() * jac;
  Eigen::LLT<Mat> llt(out.g);
  if (llt.info() != Eigen::Success) throw DegenerateChartError("induced metric is not positive definite");
  const double det = out.g.determinant();
  if (!(det > 0.0)) throw DegenerateChartError("induced metric has non-positive determinant");
  out.sqrt_det = std::sqrt(det);
  return out;
}

Mat normal_frame_of(const Mat& jac) {
  const auto m = jac.rows();
  const auto n = jac.cols();
  Eigen::HouseholderQR<Mat> qr(jac);
  Mat q = qr.householderQ() * Mat::Identity(m, m);
  Mat frame = q.rightCols(m - n);
  if (frame.cols() == 1) {
    // Largest |component| positive; near-ties resolve to the lowest axis.
    const double big = frame.col(0).cwiseAbs().maxCoeff();
    Eigen::Index axis = 0;
    while (std::abs(frame(axis, 0)) < big - 1e-12) ++axis;
    if (frame(axis, 0) < 0.0) frame = -frame;
  }
  return frame;
}

Mat normal_frame(const Chart& chart, const Vec& u, const DiffOptions& opts) {
  return normal_frame_of(jacobian(chart, u, opts));
}

CurvatureReport mean_curvature(const Chart& chart, const Vec& u, const DiffOptions& opts) {
  const int n = chart.param_dim();
  const Mat jac = jacobian(chart, u, opts);
  const Mat g = jac.transpose() * jac;
  const double det = g.determinant();
  if (!(det > 0.0)) throw DegenerateChartError("induced metric has non-positive determinant");
  const Mat ginv = g.inverse();
  const auto second = second_derivatives(chart, u, opts);

  CurvatureReport rep;
  rep.point = u;
  rep.metric_det = det;
  rep.sqrt_metric_det = std::sqrt(det);
  rep.normal_frame = normal_frame_of(jac);

  Vec trace = Vec::Zero(chart.ambient_dim());
  double sq = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const Vec& v = second[static_cast<std::size_t>(a * n + b)];
      trace += ginv(a, b) * v;
      sq += v.squaredNorm();
    }
  }
  const Mat& nf = rep.normal_frame;
  rep.mean_curvature = nf * (nf.transpose() * trace) / static_cast<double>(n);
  rep.mean_curvature_norm = rep.mean_curvature.norm();
  rep.second_derivative_norm = std::sqrt(sq);
  return rep;
}

bool is_minimal(const CurvatureReport& report, double tol_minimal) {
  return report.mean_curvature_norm < tol_minimal * (1.0 + report.second_derivative_norm);
}

std::size_t GridSpec::size() const {
  std::size_t total = 1;
  for (int p : points) total *= static_cast<std::size_t>(p);
  return total;
}

std::vector<Vec> GridSpec::nodes() const {
  box.validate();
  const int dim = box.dim();
  if (static_cast<int>(points.size()) != dim) throw DomainError("grid: points per axis must match box dimension");
  for (int p : points)
    if (p < 1) throw DomainError("grid: need at least one point per axis");

  std::vector<Vec> out;
  out.reserve(size());
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  while (true) {
    Vec u(dim);
    for (int d = 0; d < dim; ++d) {
      const int p = points[static_cast<std::size_t>(d)];
      u(d) = p == 1 ? 0.5 * (box.lower(d) + box.upper(d))
                    : box.lower(d) + (box.upper(d) - box.lower(d)) * idx[static_cast<std::size_t>(d)] / (p - 1);
    }
    out.push_back(std::move(u));
    int d = dim - 1;
    while (d >= 0 && ++idx[static_cast<std::size_t>(d)] == points[static_cast<std::size_t>(d)])
      idx[static_cast<std::size_t>(d--)] = 0;
    if (d < 0) break;
  }
  return out;
}

MinimalityScan minimality_scan(const Chart& chart, const GridSpec& grid, const DiffOptions& opts) {
  MinimalityScan out;
  bool any = false;
  for (Vec& u : grid.nodes()) {
    ScanCell cell;
    cell.point = u;
    try {
      cell.report = mean_curvature(chart, u, opts);
      if (!any || cell.report->mean_curvature_norm > out.sup_norm) {
        out.sup_norm = cell.report->mean_curvature_norm;
        out.argmax = u;
        any = true;
      }
    } catch (const Error& e) {
      cell.error = e.what();
      ++out.degenerate_count;
    }
    out.cells.push_back(std::move(cell));
  }
  return out;
}

std::vector<Vec> oriented_normals(const Chart& chart, const GridSpec& grid, const DiffOptions& opts) {
  if (chart.codim() != 1) throw PreconditionError("Gauss map needs a hypersurface (k = 1)");
  const auto nodes = grid.nodes();
  const int dim = grid.box.dim();
  std::vector<Vec> normals;
  normals.reserve(nodes.size());

  // Strides for the lexicographic layout (first axis slowest).
  std::vector<std::size_t> stride(static_cast<std::size_t>(dim), 1);
  for (int d = dim - 2; d >= 0; --d)
    stride[static_cast<std::size_t>(d)] =
        stride[static_cast<std::size_t>(d) + 1] * static_cast<std::size_t>(grid.points[static_cast<std::size_t>(d) + 1]);

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    Vec nrm = normal_frame(chart, nodes[i], opts).col(0);
    if (i > 0) {
      // Reference neighbour: decrement the last axis whose index is nonzero.
      std::size_t ref = 0;
      for (int d = dim - 1; d >= 0; --d) {
        const std::size_t k = (i / stride[static_cast<std::size_t>(d)]) % static_cast<std::size_t>(grid.points[static_cast<std::size_t>(d)]);
        if (k > 0) {
          ref = i - stride[static_cast<std::size_t>(d)];
          break;
        }
      }
      const double c = nrm.dot(normals[ref]);
      if (std::abs(c) < 0.5)
        throw NonOrientableSamplingError("unit normal turns by more than 60 degrees across one grid cell");
      if (c < 0.0) nrm = -nrm;
    }
    normals.push_back(std::move(nrm));
  }
  return normals;
}

double gauss_map_dispersion(const Chart& chart, const GridSpec& grid, const DiffOptions& opts) {
  const auto normals = oriented_normals(chart, grid, opts);
  double worst = 0.0;
  for (std::size_t i = 0; i < normals.size(); ++i) {
    for (std::size_t j = i + 1; j < normals.size(); ++j) {
      // Chord form is accurate near zero angle, unlike acos of the dot product.
      const double chord = (normals[i] - normals[j]).norm();
      worst = std::max(worst, 2.0 * std::asin(std::min(1.0, 0.5 * chord)));
    }
  }
  return worst;
}

double geodesic_residual(const Chart& chart, const Curve& curve, double t, double h_c, const DiffOptions& opts) {
  const double h = h_c * (1.0 + std::abs(t));
  const Vec up = curve(t + h), u0 = curve(t), um = curve(t - h);
  for (const Vec* v : {&up, &u0, &um}) {
    if (!chart.domain().contains(*v)) throw PreconditionError("geodesic_residual: curve step leaves the chart domain");
  }
  const Vec accel = (chart(up) - 2.0 * chart(u0) + chart(um)) / (h * h);
  const Mat jac = jacobian(chart, u0, opts);
  const Vec coeff = (jac.transpose() * jac).ldlt().solve(jac.transpose() * accel);
  return (jac * coeff).norm();
}

ScalarField sine_bump(const Box& box, double amplitude) {
  return sine_mode(box, amplitude, std::vector<int>(static_cast<std::size_t>(box.dim()), 1));
}

ScalarField sine_mode(const Box& box, double amplitude, std::vector<int> modes) {
  box.validate();
  if (static_cast<int>(modes.size()) != box.dim()) throw DomainError("sine_mode: one mode per axis");
  return [box, amplitude, modes = std::move(modes)](const Vec& u) {
    double v = amplitude;
    for (Eigen::Index j = 0; j < u.size(); ++j)
      v *= std::sin(modes[static_cast<std::size_t>(j)] * std::numbers::pi * (u(j) - box.lower(j)) /
                    (box.upper(j) - box.lower(j)));
    return v;
  };
}

namespace {

// Normal field oriented against the normal at the box centre.
struct OrientedNormal {
  const Chart& chart;
  Vec reference;
  DiffOptions opts;

  Vec operator()(const Vec& u) const {
    Vec nrm = normal_frame(chart, u, opts).col(0);
    return nrm.dot(reference) < 0.0 ? Vec(-nrm) : nrm;
  }
};

OrientedNormal make_oriented(const Chart& chart, const Box& box, const DiffOptions& opts) {
  if (chart.codim() != 1) throw PreconditionError("normal perturbations need a hypersurface (k = 1)");
  box.validate();
  if (!chart.domain().contains(box)) throw PreconditionError("neighborhood box leaves the chart domain");
  return OrientedNormal{chart, normal_frame(chart, box.center(), opts).col(0), opts};
}

// d(psi N)/du by central differences.
Mat perturbation_jacobian(const OrientedNormal& normal, const ScalarField& psi, const Vec& u, const DiffOptions& opts) {
  const auto n = u.size();
  Mat out(normal.chart.ambient_dim(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = step_for(opts.h_rel, u(j));
    Vec up = u, um = u;
    up(j) += h;
    um(j) -= h;
    out.col(j) = (psi(up) * normal(up) - psi(um) * normal(um)) / (up(j) - um(j));
  }
  return out;
}

}  // namespace

double perturbed_volume(const Chart& chart, const Box& box, const ScalarField& psi, double eps,
                        const QuadratureSpec& quad, const DiffOptions& opts) {
  const auto normal = make_oriented(chart, box, opts);
  auto integrand = [&](const Vec& u) {
    Mat jac = jacobian(chart, u, opts);
    if (eps != 0.0) jac += eps * perturbation_jacobian(normal, psi, u, opts);
    const double det = (jac.transpose() * jac).determinant();
    if (!(det > 0.0)) throw DegenerateChartError("perturbed metric is degenerate");
    return std::sqrt(det);
  };
  return integrate(box, integrand, quad).value;
}

Chart normal_perturbation(const Chart& chart, const Box& box, const ScalarField& psi, double eps,
                          const DiffOptions& opts) {
  auto normal = make_oriented(chart, box, opts);
  Vec reference = normal.reference;
  return Chart(
      chart.param_dim(), chart.ambient_dim(),
      [chart, psi, eps, reference, opts](std::span<const double> us) {
        const Vec u = Eigen::Map<const Vec>(us.data(), static_cast<Eigen::Index>(us.size()));
        const OrientedNormal nrm{chart, reference, opts};
        Vec x = chart(u) + eps * psi(u) * nrm(u);
        return std::vector<double>(x.data(), x.data() + x.size());
      },
      chart.domain(), chart.name() + "/perturbed");
}

FirstVariation first_variation_volume(const Chart& chart, const Box& box, const ScalarField& psi,
                                      const QuadratureSpec& quad, const DiffOptions& opts, double eps) {
  const auto normal = make_oriented(chart, box, opts);
  FirstVariation out;
  out.numeric = (perturbed_volume(chart, box, psi, eps, quad, opts) -
                 perturbed_volume(chart, box, psi, -eps, quad, opts)) /
                (2.0 * eps);
  const double n = chart.param_dim();
  auto integrand = [&](const Vec& u) {
    const double weight = psi(u);
    if (weight == 0.0) return 0.0;
    const CurvatureReport rep = mean_curvature(chart, u, opts);
    return -n * weight * normal(u).dot(rep.mean_curvature) * rep.sqrt_metric_det;
  };
  out.formula = integrate(box, integrand, quad).value;
  return out;
}

}  // namespace eqlab
