#include "eqlab/lab/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include "eqlab/entropy.hpp"
#include "eqlab/manifold.hpp"

namespace eqlab::lab {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string clean(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '|' || c == ';' || c == '"' || c == '\n' || c == '\r') c = ' ';
  return s;
}

std::string error_flag(const std::exception& e) { return "error:" + clean(e.what()); }

// Evaluates f(0..n-1) on up to `jobs` threads; results keep index order.
template <typename R, typename F>
std::vector<R> parallel_map(std::size_t n, int jobs, F f) {
  std::vector<R> out(n);
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = f(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

ResultRow base_row(const ExperimentConfig& cfg, std::string economy_id = {}) {
  ResultRow row;
  row.scenario = to_string(cfg.scenario);
  row.economy_id = !economy_id.empty() ? std::move(economy_id) : cfg.economy ? cfg.economy->id() : "helicoid";
  return row;
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

std::vector<double> flatten(const Mat& m) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

void check_grid(const Chart& chart, const GridSpec& grid) {
  if (grid.box.dim() != chart.param_dim())
    throw ConfigError("grid", "dimension " + std::to_string(grid.box.dim()) + " differs from the chart's " +
                                  std::to_string(chart.param_dim()) + " parameters");
}

ResultRow equilibrium_row(const ExperimentConfig& cfg, const Endowment& omega) {
  ResultRow row = base_row(cfg);
  row.point = flatten(omega.omega);
  try {
    const EquilibriumSet eq = find_equilibria(*cfg.economy, omega, cfg.scan);
    row.count = static_cast<long long>(eq.size());
    std::string prices = "prices=";
    for (std::size_t i = 0; i < eq.size(); ++i) {
      if (i) prices += '/';
      const Vec& p = eq.prices[i].normalized();
      for (Eigen::Index l = 0; l < p.size(); ++l) prices += (l ? ":" : "") + num(p(l));
    }
    row.flags.push_back(prices);
    if (!eq.residuals.empty())
      row.flags.push_back("max_residual=" + num(*std::max_element(eq.residuals.begin(), eq.residuals.end())));
    if (eq.boundary_warning) row.flags.push_back("boundary-warning");
    if (eq.empty()) row.flags.push_back("error:no equilibrium found");
  } catch (const std::exception& e) {
    row.flags.push_back(error_flag(e));
  }
  return row;
}

struct CurvatureSweep {
  std::vector<ResultRow> cells;
  ResultRow aggregate;
  std::optional<double> sup;
};

// Mean curvature over a grid plus an aggregate row with the Gauss map dispersion.
CurvatureSweep curvature_sweep(const ExperimentConfig& cfg, const Chart& chart, const GridSpec& grid, int jobs,
                               const std::string& economy_id = {}) {
  check_grid(chart, grid);
  const std::vector<Vec> nodes = grid.nodes();
  CurvatureSweep out;
  out.cells = parallel_map<ResultRow>(nodes.size(), jobs, [&](std::size_t i) {
    ResultRow row = base_row(cfg, economy_id);
    row.point = to_std(nodes[i]);
    try {
      const CurvatureReport rep = mean_curvature(chart, nodes[i], cfg.derivatives);
      row.sup_h = rep.mean_curvature_norm;
      row.flags.push_back(rep.mean_curvature_norm < cfg.tolerances.minimal ? "minimal" : "non-minimal");
    } catch (const std::exception& e) {
      row.flags.push_back(error_flag(e));
    }
    return row;
  });

  ResultRow& agg = out.aggregate = base_row(cfg, economy_id);
  agg.flags.push_back("aggregate");
  std::size_t bad = 0;
  for (const ResultRow& cell : out.cells) {
    if (!cell.sup_h) {
      ++bad;
      continue;
    }
    if (!out.sup || *cell.sup_h > *out.sup) {
      out.sup = cell.sup_h;
      agg.point = cell.point;
    }
  }
  agg.flags.push_back("cells=" + std::to_string(out.cells.size()));
  agg.flags.push_back("degenerate_cells=" + std::to_string(bad));
  if (!out.sup) {
    agg.flags.push_back("error:mean curvature failed at every grid node");
    return out;
  }
  agg.sup_h = out.sup;
  agg.flags.push_back(*out.sup < cfg.tolerances.minimal ? "minimal" : "non-minimal");
  if (chart.codim() == 1) {
    try {
      agg.gauss_dispersion = gauss_map_dispersion(chart, grid, cfg.derivatives);
    } catch (const std::exception& e) {
      agg.flags.push_back("dispersion-unavailable:" + clean(e.what()));
    }
  }
  return out;
}

std::vector<ResultRow> run_equilibria(const ExperimentConfig& cfg, const RunOptions& opts, json& summary) {
  const auto endowments = sweep_endowments(cfg);
  auto rows = parallel_map<ResultRow>(endowments.size(), opts.jobs,
                                      [&](std::size_t i) { return equilibrium_row(cfg, endowments[i]); });
  std::map<std::string, int> histogram;
  long long max_count = 0;
  for (const auto& row : rows) {
    if (!row.count) continue;
    ++histogram[std::to_string(*row.count)];
    max_count = std::max(max_count, *row.count);
  }
  summary["count_histogram"] = histogram;
  summary["max_count"] = max_count;
  return rows;
}

std::vector<ResultRow> run_curvature_scan(const ExperimentConfig& cfg, const RunOptions& opts, json& summary) {
  const Chart chart = config_chart(cfg);
  CurvatureSweep sweep = curvature_sweep(cfg, chart, *cfg.grid, opts.jobs);
  summary["sup_mean_curvature"] = sweep.sup ? json(*sweep.sup) : json(nullptr);
  summary["minimal"] = sweep.sup && *sweep.sup < cfg.tolerances.minimal;
  if (sweep.aggregate.gauss_dispersion) summary["gauss_dispersion"] = *sweep.aggregate.gauss_dispersion;
  auto rows = std::move(sweep.cells);
  rows.push_back(std::move(sweep.aggregate));
  return rows;
}

std::vector<ResultRow> run_entropy(const ExperimentConfig& cfg, const RunOptions& opts, json& summary) {
  const Chart chart = config_chart(cfg);
  auto rows = parallel_map<ResultRow>(cfg.boxes.size(), opts.jobs, [&](std::size_t i) {
    const Box& box = cfg.boxes[i];
    ResultRow row = base_row(cfg);
    row.point = to_std(box.lower);
    for (Eigen::Index d = 0; d < box.upper.size(); ++d) row.point.push_back(box.upper(d));
    try {
      if (box.dim() != chart.param_dim()) throw ConfigError("boxes", "box dimension differs from the chart");
      QuadratureSpec quad = cfg.quadrature;
      quad.seed = point_seed(cfg.seed, i);
      const QuadratureResult vol = volume_detailed(chart, box, quad, cfg.derivatives);
      row.volume = vol.value;
      row.entropy = std::log(vol.value);
      row.flags.push_back(vol.method == QuadratureMethod::MonteCarlo ? "method=monte-carlo" : "method=gauss-legendre");
      row.flags.push_back("evaluations=" + std::to_string(vol.evaluations));
      if (vol.method == QuadratureMethod::MonteCarlo) {
        row.flags.push_back("std_error=" + num(vol.std_error));
        row.flags.push_back("seed=" + std::to_string(vol.seed));
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      row.flags.push_back(error_flag(e));
    }
    return row;
  });
  json volumes = json::array();
  for (const auto& row : rows) volumes.push_back(row.volume ? json(*row.volume) : json(nullptr));
  summary["volumes"] = volumes;
  return rows;
}

Mat random_rotation(std::mt19937_64& rng, int m) {
  std::normal_distribution<double> normal;
  Mat g(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  // Fix the column signs so the factorization is unique, then force det = +1.
  const Mat r = qr.matrixQR();
  for (int j = 0; j < m; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  if (q.determinant() < 0.0) q.col(0) = -q.col(0);
  return q;
}

ResultRow helicoid_row(const ExperimentConfig& cfg, const HelicoidSpec& h, std::size_t index) {
  ResultRow row = base_row(cfg, "helicoid");
  row.point = {static_cast<double>(h.n), static_cast<double>(h.k)};
  for (Eigen::Index i = 0; i < h.a.size(); ++i) row.point.push_back(h.a(i));
  row.point.push_back(h.b);
  try {
    const bool degenerate = is_degenerate(h);
    row.flags.push_back(degenerate ? "degenerate" : "nondegenerate");
    const Chart chart = helicoid_chart(h);
    if (chart.affine()) row.flags.push_back("affine");
    const GridSpec grid = standard_helicoid_grid(h, cfg.grid_points);

    const MinimalityScan scan = minimality_scan(chart, grid, cfg.derivatives);
    if (scan.degenerate_count > 0) row.flags.push_back("degenerate_cells=" + std::to_string(scan.degenerate_count));
    if (scan.degenerate_count == static_cast<int>(scan.cells.size())) {
      row.flags.push_back("error:mean curvature failed at every grid node");
    } else {
      row.sup_h = scan.sup_norm;
      const bool minimal = scan.sup_norm < cfg.tolerances.minimal;
      row.flags.push_back(minimal ? "minimal" : "non-minimal");
      if (!minimal && !degenerate) row.flags.push_back("error:nondegenerate helicoid is not minimal");
    }
    if (h.k == 1) {
      try {
        row.gauss_dispersion = gauss_map_dispersion(chart, grid, cfg.derivatives);
      } catch (const std::exception& e) {
        row.flags.push_back("dispersion-unavailable:" + clean(e.what()));
      }
    }

    std::mt19937_64 rng(point_seed(cfg.seed, index));
    std::normal_distribution<double> normal;
    int found = 0;
    double worst = 0.0;
    for (int j = 0; j < cfg.hyperplanes; ++j) {
      Hyperplane plane;
      plane.coefficients = Vec(h.n + h.k);
      for (Eigen::Index c = 0; c < plane.coefficients.size(); ++c) plane.coefficients(c) = normal(rng);
      plane.delta = normal(rng);
      const auto hit = hyperplane_intersection(h, plane);
      if (!hit) continue;
      ++found;
      worst = std::max(worst, hit->residual);
    }
    row.flags.push_back("intersections=" + std::to_string(found) + "/" + std::to_string(cfg.hyperplanes));
    row.flags.push_back("max_intersection_residual=" + num(worst));
    if (!(worst < cfg.tolerances.intersection)) row.flags.push_back("error:intersection residual above tolerance");
    if (found < cfg.hyperplanes && !degenerate) row.flags.push_back("error:missing hyperplane intersection");

    // Rigid-motion invariance of |H| on a coarse subgrid.
    const Mat q = random_rotation(rng, chart.ambient_dim());
    Vec shift(chart.ambient_dim());
    for (Eigen::Index c = 0; c < shift.size(); ++c) shift(c) = normal(rng);
    const Chart moved = transform(chart, q, shift);
    GridSpec coarse = grid;
    coarse.points.assign(coarse.points.size(), std::min(cfg.grid_points, 5));
    double drift = 0.0;
    for (const Vec& u : coarse.nodes()) {
      try {
        const double a = mean_curvature(chart, u, cfg.derivatives).mean_curvature_norm;
        const double b = mean_curvature(moved, u, cfg.derivatives).mean_curvature_norm;
        drift = std::max(drift, std::abs(a - b));
      } catch (const DegenerateChartError&) {
      }
    }
    row.flags.push_back("rigid_drift=" + num(drift));
    if (!(drift < cfg.tolerances.rigid_motion)) row.flags.push_back("error:rigid-motion drift above tolerance");
  } catch (const std::exception& e) {
    row.flags.push_back(error_flag(e));
  }
  return row;
}

std::vector<ResultRow> run_helicoid_check(const ExperimentConfig& cfg, const RunOptions& opts, json& summary) {
  const std::vector<HelicoidSpec> specs = cfg.helicoids.empty() ? default_helicoids() : cfg.helicoids;
  auto rows = parallel_map<ResultRow>(specs.size(), opts.jobs,
                                      [&](std::size_t i) { return helicoid_row(cfg, specs[i], i); });
  std::size_t degenerate = 0;
  for (const auto& h : specs) degenerate += is_degenerate(h) ? 1 : 0;
  summary["helicoids"] = specs.size();
  summary["degenerate"] = degenerate;
  return rows;
}

std::vector<ResultRow> run_conjecture_sweep(const ExperimentConfig& cfg, const RunOptions& opts, json& summary) {
  auto rows = run_equilibria(cfg, opts, summary);
  long long max_count = 0;
  bool counted = false;
  for (const auto& row : rows) {
    if (!row.count || row.failed()) continue;
    counted = true;
    max_count = std::max(max_count, *row.count);
  }

  ResultRow curvature = base_row(cfg);
  std::optional<double> sup;
  try {
    const Chart chart = config_chart(cfg);
    CurvatureSweep sweep = curvature_sweep(cfg, chart, *cfg.grid, opts.jobs);
    curvature = std::move(sweep.aggregate);
    sup = sweep.sup;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    curvature.flags.push_back("aggregate");
    curvature.flags.push_back(error_flag(e));
  }

  summary["max_count"] = max_count;
  summary["sup_mean_curvature"] = sup ? json(*sup) : json(nullptr);
  json table = {{"unique", {{"minimal", 0}, {"non-minimal", 0}}}, {"multiple", {{"minimal", 0}, {"non-minimal", 0}}}};
  if (counted && sup) {
    const bool multiple = max_count > 1;
    const bool curved = !(*sup < cfg.tolerances.minimal);
    const std::string m = multiple ? "multiple" : "unique";
    const std::string c = curved ? "non-minimal" : "minimal";
    table[m][c] = 1;
    summary["cell"] = m + "," + c;
    const bool anomaly = (multiple && !curved) || (!multiple && curved);
    summary["conjecture_anomaly"] = anomaly;
    curvature.count = max_count;
    if (anomaly) curvature.flags.push_back("conjecture-anomaly");
  } else {
    summary["cell"] = nullptr;
    summary["conjecture_anomaly"] = false;
  }
  summary["contingency"] = table;
  rows.push_back(std::move(curvature));
  return rows;
}

std::vector<ResultRow> run_geodesic_check(const ExperimentConfig& cfg, const RunOptions& opts, json& summary) {
  std::optional<PriceIncomePoint> anchor;
  if (cfg.anchor_endowment) anchor = br_anchor(*cfg.economy, *cfg.anchor_endowment, cfg.scan);
  const EquilibriumManifold manifold(*cfg.economy, anchor);
  auto rows = parallel_map<ResultRow>(cfg.t_values.size(), opts.jobs, [&](std::size_t i) {
    ResultRow row = base_row(cfg);
    row.point = {cfg.t_values[i]};
    try {
      const NoTradeGeodesic g = no_trade_geodesic(manifold, cfg.t_values[i], 1e-4, cfg.derivatives);
      row.flags.push_back(g.residual < cfg.tolerances.geodesic ? "geodesic" : "non-geodesic");
      row.flags.push_back("residual=" + num(g.residual));
      row.flags.push_back("triple=" + num(g.triple(0)) + ":" + num(g.triple(1)) + ":" + num(g.triple(2)));
      row.flags.push_back("triple_norm=" + num(g.triple_norm));
    } catch (const std::exception& e) {
      row.flags.push_back(error_flag(e));
    }
    return row;
  });
  std::size_t geodesic = 0;
  for (const auto& row : rows) geodesic += std::count(row.flags.begin(), row.flags.end(), "geodesic");
  summary["geodesic_points"] = geodesic;
  return rows;
}

std::vector<int> perturbation_modes(int dim, int index) {
  std::vector<int> modes(static_cast<std::size_t>(dim));
  int rest = index;
  for (int d = 0; d < dim; ++d) {
    modes[static_cast<std::size_t>(d)] = 1 + rest % 3;
    rest /= 3;
  }
  return modes;
}

std::vector<ResultRow> run_mvp_probe(const ExperimentConfig& cfg, const RunOptions& opts, json& summary) {
  const Chart chart = config_chart(cfg);
  const std::size_t per_box = static_cast<std::size_t>(cfg.perturbations);
  const std::size_t tasks = cfg.boxes.size() * per_box;
  struct Probe {
    std::vector<ResultRow> rows;
    std::optional<double> min_excess;
    std::optional<double> curvature;
  };
  auto probes = parallel_map<Probe>(tasks, opts.jobs, [&](std::size_t task) {
    const std::size_t b = task / per_box;
    const int j = static_cast<int>(task % per_box);
    const Box& box = cfg.boxes[b];
    if (box.dim() != chart.param_dim()) throw ConfigError("boxes", "box dimension differs from the chart");
    const auto modes = perturbation_modes(box.dim(), j);
    int cycle = 1;
    for (int d = 0; d < box.dim(); ++d) cycle *= 3;
    const double amplitude = cfg.amplitude * (1.0 + static_cast<double>(j / cycle));
    std::string mode_flag = "modes=";
    for (std::size_t d = 0; d < modes.size(); ++d) mode_flag += (d ? ":" : "") + std::to_string(modes[d]);

    Probe out;
    auto tag = [&](ResultRow& row) {
      row.flags.push_back("box=" + std::to_string(b));
      row.flags.push_back("perturbation=" + std::to_string(j));
      row.flags.push_back(mode_flag);
      row.flags.push_back("amplitude=" + num(amplitude));
    };
    try {
      QuadratureSpec quad = cfg.quadrature;
      quad.seed = point_seed(cfg.seed, task);
      const MvpProbe probe = mvp_probe(chart, box, sine_mode(box, amplitude, modes), cfg.epsilons, quad, cfg.derivatives);
      out.curvature = probe.fitted_curvature;
      for (const MvpRow& r : probe.rows) {
        ResultRow row = base_row(cfg);
        row.point = {r.eps};
        row.volume = r.volume;
        row.entropy = r.entropy;
        tag(row);
        const double excess = r.volume - probe.base_volume;
        out.min_excess = out.min_excess ? std::min(*out.min_excess, excess) : excess;
        if (excess < -1e-8) row.flags.push_back("volume-below-base");
        out.rows.push_back(std::move(row));
      }
      if (!out.rows.empty()) out.rows.back().flags.push_back("fitted_curvature=" + num(probe.fitted_curvature));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      ResultRow row = base_row(cfg);
      tag(row);
      row.flags.push_back(error_flag(e));
      out.rows.push_back(std::move(row));
    }
    return out;
  });

  std::vector<ResultRow> rows;
  std::optional<double> min_excess;
  json curvatures = json::array();
  for (auto& p : probes) {
    if (p.min_excess) min_excess = min_excess ? std::min(*min_excess, *p.min_excess) : *p.min_excess;
    curvatures.push_back(p.curvature ? json(*p.curvature) : json(nullptr));
    for (auto& r : p.rows) rows.push_back(std::move(r));
  }
  summary["min_volume_excess"] = min_excess ? json(*min_excess) : json(nullptr);
  summary["fitted_curvatures"] = curvatures;
  return rows;
}

}  // namespace

bool ResultRow::failed() const {
  return std::any_of(flags.begin(), flags.end(), [](const std::string& f) { return f.rfind("error:", 0) == 0; });
}

std::uint64_t point_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over the pair.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<Endowment> sweep_endowments(const ExperimentConfig& cfg) {
  std::vector<Endowment> out = cfg.endowments;
  if (cfg.endowment_samples == 0) return out;
  const Economy& eco = *cfg.economy;
  const int M = eco.consumers(), L = eco.goods();
  const double hi = cfg.endowment_hi.value_or(1.0 / (M - 1));
  std::mt19937_64 rng(point_seed(cfg.seed, 0x656e646f77ULL));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < cfg.endowment_samples; ++s) {
    Endowment e{Mat(M, L)};
    for (int i = 0; i < M - 1; ++i)
      for (int l = 0; l < L; ++l)
        e.omega(i, l) = eco.resources()(l) * (cfg.endowment_lo + (hi - cfg.endowment_lo) * unit(rng));
    for (int l = 0; l < L; ++l) e.omega(M - 1, l) = eco.resources()(l) - e.omega.col(l).head(M - 1).sum();
    out.push_back(std::move(e));
  }
  return out;
}

Chart config_chart(const ExperimentConfig& cfg) {
  if (cfg.chart == ChartKind::Helicoid) {
    if (cfg.helicoids.empty()) throw ConfigError("helicoids", "the helicoid chart needs a helicoid");
    return helicoid_chart(cfg.helicoids.front());
  }
  if (!cfg.economy) throw ConfigError("economy", "the equilibrium-manifold chart needs an economy");
  std::optional<PriceIncomePoint> anchor;
  if (cfg.anchor_endowment) {
    anchor = br_anchor(*cfg.economy, *cfg.anchor_endowment, cfg.scan);
    if (!anchor) throw PreconditionError("anchor_endowment has no equilibrium in the scan window");
  }
  return EquilibriumManifold(*cfg.economy, anchor).chart();
}

std::vector<HelicoidSpec> default_helicoids() {
  auto spec = [](int n, int k, std::vector<double> a, double b) {
    return HelicoidSpec{n, k, Eigen::Map<const Vec>(a.data(), static_cast<Eigen::Index>(a.size())), b};
  };
  return {
      spec(2, 1, {1.0}, 1.0),         // classical helicoid
      spec(3, 2, {1.0, 2.0}, 1.0),
      spec(3, 1, {2.0}, 0.5),
      spec(4, 2, {1.0, -3.0}, 2.0),
      spec(2, 1, {0.0}, 1.0),         // degenerate: a plane
      spec(2, 1, {1.0}, 0.0),         // degenerate: a plane in polar form
  };
}

RunResult run(const ExperimentConfig& cfg, const RunOptions& opts) {
  RunResult result;
  json summary;
  switch (cfg.scenario) {
    case Scenario::Equilibria: result.rows = run_equilibria(cfg, opts, summary); break;
    case Scenario::CurvatureScan: result.rows = run_curvature_scan(cfg, opts, summary); break;
    case Scenario::Entropy: result.rows = run_entropy(cfg, opts, summary); break;
    case Scenario::HelicoidCheck: result.rows = run_helicoid_check(cfg, opts, summary); break;
    case Scenario::ConjectureSweep: result.rows = run_conjecture_sweep(cfg, opts, summary); break;
    case Scenario::GeodesicCheck: result.rows = run_geodesic_check(cfg, opts, summary); break;
    case Scenario::MvpProbe: result.rows = run_mvp_probe(cfg, opts, summary); break;
  }
  for (const auto& row : result.rows) result.failures += row.failed() ? 1 : 0;
  const double fraction =
      result.rows.empty() ? 0.0 : static_cast<double>(result.failures) / static_cast<double>(result.rows.size());
  result.anomaly = summary.value("conjecture_anomaly", false);

  summary["scenario"] = to_string(cfg.scenario);
  summary["seed"] = cfg.seed;
  summary["rows"] = result.rows.size();
  summary["failures"] = result.failures;
  summary["failure_fraction"] = fraction;
  if (fraction > cfg.tolerances.max_failure_fraction) result.exit_code = kExitNumerical;
  else if (result.anomaly) result.exit_code = kExitAnomaly;
  summary["exit_code"] = result.exit_code;
  result.summary = std::move(summary);
  return result;
}

}  // namespace eqlab::lab
