#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "eqlab/entropy.hpp"
#include "eqlab/helicoid.hpp"
#include "eqlab/lab/config.hpp"
#include "eqlab/lab/emit.hpp"
#include "eqlab/lab/runner.hpp"
#include "eqlab/manifold.hpp"

namespace py = pybind11;
using namespace eqlab;

namespace {

DiffOptions diff_options(const std::string& backend) {
  DiffOptions o;
  if (backend == "auto") o.backend = Backend::Auto;
  else if (backend == "dual") o.backend = Backend::Dual;
  else if (backend == "finite-difference") o.backend = Backend::FiniteDifference;
  else throw DomainError("unknown derivative backend '" + backend + "'");
  return o;
}

Box make_box(const Vec& lower, const Vec& upper) {
  Box b{lower, upper};
  b.validate();
  return b;
}

py::dict curvature_dict(const CurvatureReport& r) {
  py::dict d;
  d["point"] = r.point;
  d["metric_det"] = r.metric_det;
  d["normal_frame"] = r.normal_frame;
  d["mean_curvature"] = r.mean_curvature;
  d["mean_curvature_norm"] = r.mean_curvature_norm;
  d["minimal"] = is_minimal(r);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Equilibrium-manifold geometry: economies, charts, curvature and entropy";

  auto base = py::register_exception<Error>(m, "EqlabError");
  py::register_exception<DomainError>(m, "DomainError", base);
  py::register_exception<PreconditionError>(m, "PreconditionError", base);
  py::register_exception<UnsupportedFamilyError>(m, "UnsupportedFamilyError", base);
  py::register_exception<OutOfConeError>(m, "OutOfConeError", base);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base);
  py::register_exception<ContinuationError>(m, "ContinuationError", base);
  py::register_exception<DegenerateChartError>(m, "DegenerateChartError", base);
  py::register_exception<NonOrientableSamplingError>(m, "NonOrientableSamplingError", base);
  py::register_exception<ConfigError>(m, "ConfigError", base);

  // Economy
  py::class_<CobbDouglas>(m, "CobbDouglas").def_readonly("alpha", &CobbDouglas::alpha);
  py::class_<Ces>(m, "Ces").def_readonly("a", &Ces::a).def_readonly("rho", &Ces::rho).def("sigma", &Ces::sigma);
  m.def("cobb_douglas", &make_cobb_douglas, py::arg("alpha"));
  m.def("ces", &make_ces, py::arg("a"), py::arg("rho"));

  py::class_<Economy>(m, "Economy")
      .def(py::init<Vec, std::vector<DemandSpec>, std::string>(), py::arg("resources"), py::arg("consumers"),
           py::arg("id") = "")
      .def_property_readonly("goods", &Economy::goods)
      .def_property_readonly("consumers", &Economy::consumers)
      .def_property_readonly("resources", &Economy::resources)
      .def_property_readonly("id", &Economy::id);

  m.def(
      "demand", [](const DemandSpec& spec, const Vec& pbar, double w) { return demand(spec, PriceVector(pbar), w); },
      py::arg("spec"), py::arg("pbar"), py::arg("wealth"));
  m.def(
      "aggregate_excess",
      [](const Economy& eco, const Vec& pbar, const Mat& omega) {
        return aggregate_excess(eco, PriceVector(pbar), Endowment{omega});
      },
      py::arg("economy"), py::arg("pbar"), py::arg("omega"));
  m.def(
      "find_equilibria",
      [](const Economy& eco, const Mat& omega) {
        const EquilibriumSet eq = find_equilibria(eco, Endowment{omega});
        py::list prices;
        for (const PriceVector& p : eq.prices) prices.append(p.normalized());
        py::dict d;
        d["prices"] = prices;
        d["residuals"] = eq.residuals;
        d["boundary_warning"] = eq.boundary_warning;
        return d;
      },
      py::arg("economy"), py::arg("omega"));

  // Manifold
  m.def(
      "br_point_cobb_douglas",
      [](const Economy& eco, const Vec& t) {
        const PriceIncomePoint pi = br_point_cobb_douglas(eco, t);
        return py::make_tuple(pi.p.normalized(), pi.w);
      },
      py::arg("economy"), py::arg("t"));
  m.def(
      "phi_chart",
      [](const Economy& eco, const Vec& t, const Mat& omega_bar) {
        return phi_chart(eco, ChartPoint{t, omega_bar}).coords;
      },
      py::arg("economy"), py::arg("t"), py::arg("omega_bar"));

  // Charts and geometry
  py::class_<Chart>(m, "Chart")
      .def("__call__", [](const Chart& c, const Vec& u) { return c(u); })
      .def_property_readonly("param_dim", &Chart::param_dim)
      .def_property_readonly("ambient_dim", &Chart::ambient_dim);
  m.def(
      "equilibrium_manifold_chart", [](const Economy& eco) { return EquilibriumManifold(eco).chart(); },
      py::arg("economy"));
  m.def(
      "mean_curvature",
      [](const Chart& c, const Vec& u, const std::string& backend) {
        return curvature_dict(mean_curvature(c, u, diff_options(backend)));
      },
      py::arg("chart"), py::arg("u"), py::arg("backend") = "auto");
  m.def(
      "minimality_scan",
      [](const Chart& c, const Vec& lower, const Vec& upper, std::vector<int> points, const std::string& backend) {
        const MinimalityScan scan = minimality_scan(c, GridSpec{make_box(lower, upper), std::move(points)},
                                                    diff_options(backend));
        py::dict d;
        d["sup_norm"] = scan.sup_norm;
        d["argmax"] = scan.argmax;
        d["degenerate_count"] = scan.degenerate_count;
        return d;
      },
      py::arg("chart"), py::arg("lower"), py::arg("upper"), py::arg("points"), py::arg("backend") = "auto");

  // Helicoids
  py::class_<HelicoidSpec>(m, "HelicoidSpec")
      .def(py::init([](int n, int k, const Vec& a, double b) {
             HelicoidSpec h{n, k, a, b};
             h.validate();
             return h;
           }),
           py::arg("n"), py::arg("k"), py::arg("a"), py::arg("b"))
      .def_readonly("n", &HelicoidSpec::n)
      .def_readonly("k", &HelicoidSpec::k)
      .def_readonly("a", &HelicoidSpec::a)
      .def_readonly("b", &HelicoidSpec::b);
  m.def("helicoid_chart", &helicoid_chart, py::arg("spec"));
  m.def("is_degenerate", &is_degenerate, py::arg("spec"));
  m.def(
      "hyperplane_intersection",
      [](const HelicoidSpec& h, const Vec& coefficients, double delta) -> py::object {
        const auto hit = hyperplane_intersection(h, Hyperplane{coefficients, delta});
        if (!hit) return py::none();
        return py::make_tuple(hit->s, hit->t, hit->residual);
      },
      py::arg("spec"), py::arg("coefficients"), py::arg("delta"));

  // Volume and entropy
  m.def(
      "volume", [](const Chart& c, const Vec& lower, const Vec& upper) { return volume(c, make_box(lower, upper)); },
      py::arg("chart"), py::arg("lower"), py::arg("upper"));
  m.def(
      "entropy_uniform",
      [](const Chart& c, const Vec& lower, const Vec& upper) { return entropy_uniform(c, make_box(lower, upper)); },
      py::arg("chart"), py::arg("lower"), py::arg("upper"));
  m.def(
      "entropy_general",
      [](const Chart& c, const Vec& lower, const Vec& upper, const std::function<double(const Vec&)>& density) {
        return entropy_general(c, make_box(lower, upper), GeneralDensity{density, false});
      },
      py::arg("chart"), py::arg("lower"), py::arg("upper"), py::arg("density"));

  // Experiments
  m.def(
      "run_config",
      [](const std::string& config_json, int jobs) {
        nlohmann::json doc;
        try {
          doc = nlohmann::json::parse(config_json);
        } catch (const nlohmann::json::parse_error& e) {
          throw ConfigError("", e.what());
        }
        const lab::ExperimentConfig cfg = lab::parse_config(doc);
        lab::RunResult result;
        {
          py::gil_scoped_release release;
          result = lab::run(cfg, lab::RunOptions{jobs});
        }
        py::dict d;
        d["exit_code"] = result.exit_code;
        d["csv"] = lab::to_csv(result.rows);
        d["json"] = lab::to_json(result.rows, result.summary, cfg.source).dump();
        return d;
      },
      py::arg("config_json"), py::arg("jobs") = 1,
      "Run an experiment config (JSON text); returns exit_code, csv and json.");
  m.attr("__version__") = lab::version_stamp();
}
