#include "eqlab/lab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

namespace eqlab::lab {

using nlohmann::json;

namespace {

const std::vector<std::pair<Scenario, std::string>>& scenario_table() {
  static const std::vector<std::pair<Scenario, std::string>> table = {
      {Scenario::Equilibria, "equilibria"},
      {Scenario::CurvatureScan, "curvature-scan"},
      {Scenario::Entropy, "entropy"},
      {Scenario::HelicoidCheck, "helicoid-check"},
      {Scenario::ConjectureSweep, "conjecture-sweep"},
      {Scenario::GeodesicCheck, "geodesic-check"},
      {Scenario::MvpProbe, "mvp-probe"},
  };
  return table;
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void require_object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError(join(path, key), "unknown key");
  }
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

double get_positive(const json& j, const std::string& path) {
  const double v = get_number(j, path);
  if (!(v > 0.0)) throw ConfigError(path, "must be positive");
  return v;
}

long long get_integer(const json& j, const std::string& path, long long min_value) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  const long long v = j.get<long long>();
  if (v < min_value) throw ConfigError(path, "must be at least " + std::to_string(min_value));
  return v;
}

int get_int(const json& j, const std::string& path, int min_value) {
  const long long v = get_integer(j, path, min_value);
  if (v > std::numeric_limits<int>::max()) throw ConfigError(path, "too large");
  return static_cast<int>(v);
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected a boolean");
  return j.get<bool>();
}

std::uint64_t get_seed(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    throw ConfigError(path, "expected a non-negative 64-bit integer");
  return j.get<std::uint64_t>();
}

Vec get_vec(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = get_number(j[i], index(path, i));
  return v;
}

std::vector<double> get_doubles(const json& j, const std::string& path) {
  const Vec v = get_vec(j, path);
  return {v.data(), v.data() + v.size()};
}

Mat get_mat(const json& j, const std::string& path, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    throw ConfigError(path, "expected " + std::to_string(rows) + " rows");
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const std::string rp = index(path, static_cast<std::size_t>(i));
    const Vec row = get_vec(j[static_cast<std::size_t>(i)], rp);
    if (row.size() != cols) throw ConfigError(rp, "expected " + std::to_string(cols) + " entries");
    m.row(i) = row.transpose();
  }
  return m;
}

Economy parse_economy(const json& j, const std::string& path) {
  require_object(j, path, {"id", "resources", "consumers"});
  if (!j.contains("resources")) throw ConfigError(join(path, "resources"), "required");
  if (!j.contains("consumers")) throw ConfigError(join(path, "consumers"), "required");
  const Vec r = get_vec(j["resources"], join(path, "resources"));
  const std::string id = j.contains("id") ? get_string(j["id"], join(path, "id")) : std::string("economy");
  const json& cs = j["consumers"];
  const std::string cpath = join(path, "consumers");
  if (!cs.is_array() || cs.size() < 2) throw ConfigError(cpath, "expected at least two consumers");
  std::vector<DemandSpec> specs;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const std::string ip = index(cpath, i);
    const json& c = cs[i];
    require_object(c, ip, {"family", "alpha", "a", "rho"});
    if (!c.contains("family")) throw ConfigError(join(ip, "family"), "required");
    const std::string family = get_string(c["family"], join(ip, "family"));
    try {
      if (family == "cobb-douglas") {
        if (c.contains("a") || c.contains("rho")) throw ConfigError(ip, "cobb-douglas takes only 'alpha'");
        if (!c.contains("alpha")) throw ConfigError(join(ip, "alpha"), "required");
        specs.push_back(make_cobb_douglas(get_vec(c["alpha"], join(ip, "alpha"))));
      } else if (family == "ces") {
        if (c.contains("alpha")) throw ConfigError(ip, "ces takes 'a' and 'rho'");
        if (!c.contains("a")) throw ConfigError(join(ip, "a"), "required");
        if (!c.contains("rho")) throw ConfigError(join(ip, "rho"), "required");
        specs.push_back(make_ces(get_vec(c["a"], join(ip, "a")), get_number(c["rho"], join(ip, "rho"))));
      } else {
        throw ConfigError(join(ip, "family"), "expected 'cobb-douglas' or 'ces'");
      }
    } catch (const DomainError& e) {
      throw ConfigError(ip, e.what());
    }
    if (goods_of(specs.back()) != r.size()) throw ConfigError(ip, "number of goods differs from resources");
  }
  try {
    return Economy(r, std::move(specs), id);
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

void parse_scan(const json& j, const std::string& path, ScanConfig& s) {
  require_object(j, path, {"log_p_min", "log_p_max", "cells", "tol_p", "tol_residual", "tol_dedupe",
                           "newton_starts", "newton_max_iter", "max_halvings"});
  if (j.contains("log_p_min")) s.log_p_min = get_number(j["log_p_min"], join(path, "log_p_min"));
  if (j.contains("log_p_max")) s.log_p_max = get_number(j["log_p_max"], join(path, "log_p_max"));
  if (!(s.log_p_min < s.log_p_max)) throw ConfigError(path, "need log_p_min < log_p_max");
  if (j.contains("cells")) s.cells = get_int(j["cells"], join(path, "cells"), 2);
  if (j.contains("tol_p")) s.tol_p = get_positive(j["tol_p"], join(path, "tol_p"));
  if (j.contains("tol_residual")) s.tol_residual = get_positive(j["tol_residual"], join(path, "tol_residual"));
  if (j.contains("tol_dedupe")) s.tol_dedupe = get_positive(j["tol_dedupe"], join(path, "tol_dedupe"));
  if (j.contains("newton_starts")) s.newton_starts = get_int(j["newton_starts"], join(path, "newton_starts"), 1);
  if (j.contains("newton_max_iter"))
    s.newton_max_iter = get_int(j["newton_max_iter"], join(path, "newton_max_iter"), 1);
  if (j.contains("max_halvings")) s.max_halvings = get_int(j["max_halvings"], join(path, "max_halvings"), 0);
}

Box parse_box(const json& j, const std::string& path) {
  require_object(j, path, {"lower", "upper"});
  if (!j.contains("lower") || !j.contains("upper")) throw ConfigError(path, "needs 'lower' and 'upper'");
  Box b{get_vec(j["lower"], join(path, "lower")), get_vec(j["upper"], join(path, "upper"))};
  if (b.lower.size() != b.upper.size()) throw ConfigError(path, "lower and upper differ in length");
  if (!(b.lower.array() < b.upper.array()).all()) throw ConfigError(path, "need lower < upper componentwise");
  return b;
}

GridSpec parse_grid(const json& j, const std::string& path) {
  require_object(j, path, {"lower", "upper", "points"});
  if (!j.contains("lower") || !j.contains("upper")) throw ConfigError(path, "needs 'lower' and 'upper'");
  GridSpec g;
  g.box.lower = get_vec(j["lower"], join(path, "lower"));
  g.box.upper = get_vec(j["upper"], join(path, "upper"));
  const int dim = static_cast<int>(g.box.lower.size());
  if (g.box.upper.size() != dim) throw ConfigError(path, "lower and upper differ in length");
  if (!(g.box.lower.array() < g.box.upper.array()).all()) throw ConfigError(path, "need lower < upper componentwise");
  if (!j.contains("points")) {
    g.points.assign(static_cast<std::size_t>(dim), 11);
  } else if (j["points"].is_number_integer()) {
    g.points.assign(static_cast<std::size_t>(dim), get_int(j["points"], join(path, "points"), 1));
  } else {
    const std::string pp = join(path, "points");
    if (!j["points"].is_array() || static_cast<int>(j["points"].size()) != dim)
      throw ConfigError(pp, "expected an integer or one integer per axis");
    for (std::size_t i = 0; i < j["points"].size(); ++i) g.points.push_back(get_int(j["points"][i], index(pp, i), 1));
  }
  return g;
}

void parse_quadrature(const json& j, const std::string& path, QuadratureSpec& q) {
  require_object(j, path, {"nodes", "panels", "method", "mc_samples", "mc_dimension_threshold"});
  if (j.contains("nodes")) q.nodes = get_int(j["nodes"], join(path, "nodes"), 1);
  if (j.contains("panels")) q.panels = get_int(j["panels"], join(path, "panels"), 1);
  if (j.contains("method")) {
    const std::string m = get_string(j["method"], join(path, "method"));
    if (m == "auto") q.method = QuadratureMethod::Auto;
    else if (m == "gauss-legendre") q.method = QuadratureMethod::GaussLegendre;
    else if (m == "monte-carlo") q.method = QuadratureMethod::MonteCarlo;
    else throw ConfigError(join(path, "method"), "expected 'auto', 'gauss-legendre' or 'monte-carlo'");
  }
  if (j.contains("mc_samples"))
    q.mc_samples = static_cast<std::size_t>(get_integer(j["mc_samples"], join(path, "mc_samples"), 1));
  if (j.contains("mc_dimension_threshold"))
    q.mc_dimension_threshold = get_int(j["mc_dimension_threshold"], join(path, "mc_dimension_threshold"), 1);
}

void parse_derivatives(const json& j, const std::string& path, DiffOptions& d) {
  require_object(j, path, {"backend", "h_rel", "h2_rel", "richardson", "rank_tol"});
  if (j.contains("backend")) {
    const std::string b = get_string(j["backend"], join(path, "backend"));
    if (b == "auto") d.backend = Backend::Auto;
    else if (b == "dual") d.backend = Backend::Dual;
    else if (b == "finite-difference") d.backend = Backend::FiniteDifference;
    else throw ConfigError(join(path, "backend"), "expected 'auto', 'dual' or 'finite-difference'");
  }
  if (j.contains("h_rel")) d.h_rel = get_positive(j["h_rel"], join(path, "h_rel"));
  if (j.contains("h2_rel")) d.h2_rel = get_positive(j["h2_rel"], join(path, "h2_rel"));
  if (j.contains("richardson")) d.richardson = get_bool(j["richardson"], join(path, "richardson"));
  if (j.contains("rank_tol")) d.rank_tol = get_positive(j["rank_tol"], join(path, "rank_tol"));
}

void parse_tolerances(const json& j, const std::string& path, Tolerances& t) {
  require_object(j, path,
                 {"minimal", "residual", "max_failure_fraction", "intersection", "rigid_motion", "geodesic"});
  if (j.contains("minimal")) t.minimal = get_positive(j["minimal"], join(path, "minimal"));
  if (j.contains("residual")) t.residual = get_positive(j["residual"], join(path, "residual"));
  if (j.contains("intersection")) t.intersection = get_positive(j["intersection"], join(path, "intersection"));
  if (j.contains("rigid_motion")) t.rigid_motion = get_positive(j["rigid_motion"], join(path, "rigid_motion"));
  if (j.contains("geodesic")) t.geodesic = get_positive(j["geodesic"], join(path, "geodesic"));
  if (j.contains("max_failure_fraction")) {
    const std::string fp = join(path, "max_failure_fraction");
    t.max_failure_fraction = get_number(j["max_failure_fraction"], fp);
    if (t.max_failure_fraction < 0.0 || t.max_failure_fraction > 1.0) throw ConfigError(fp, "must lie in [0, 1]");
  }
}

HelicoidSpec parse_helicoid(const json& j, const std::string& path) {
  require_object(j, path, {"n", "k", "a", "b"});
  for (const char* key : {"n", "k", "a", "b"})
    if (!j.contains(key)) throw ConfigError(join(path, key), "required");
  HelicoidSpec h;
  h.n = get_int(j["n"], join(path, "n"), 2);
  h.k = get_int(j["k"], join(path, "k"), 1);
  h.a = get_vec(j["a"], join(path, "a"));
  h.b = get_number(j["b"], join(path, "b"));
  try {
    h.validate();
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
  return h;
}

}  // namespace

std::string to_string(Scenario s) {
  for (const auto& [value, name] : scenario_table())
    if (value == s) return name;
  return "unknown";
}

std::optional<Scenario> scenario_from_string(const std::string& name) {
  for (const auto& [value, n] : scenario_table())
    if (n == name) return value;
  return std::nullopt;
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& entry : scenario_table()) out.push_back(entry.second);
    return out;
  }();
  return names;
}

ExperimentConfig parse_config(const json& doc, std::optional<Scenario> fallback) {
  require_object(doc, "",
                 {"scenario", "description", "seed", "output", "economy", "endowments", "endowment_samples",
                  "endowment_range", "anchor_endowment", "scan", "chart", "grid", "boxes", "quadrature",
                  "derivatives", "tolerances", "helicoids", "hyperplanes", "grid_points", "t_values", "epsilons",
                  "perturbations", "amplitude"});
  ExperimentConfig cfg;
  cfg.source = doc;

  if (doc.contains("scenario")) {
    const std::string name = get_string(doc["scenario"], "scenario");
    const auto s = scenario_from_string(name);
    if (!s) throw ConfigError("scenario", "unknown scenario '" + name + "'");
    if (fallback && *fallback != *s)
      throw ConfigError("scenario", "config is for '" + name + "', not '" + to_string(*fallback) + "'");
    cfg.scenario = *s;
  } else if (fallback) {
    cfg.scenario = *fallback;
  } else {
    throw ConfigError("scenario", "required");
  }

  if (doc.contains("description")) cfg.description = get_string(doc["description"], "description");
  if (doc.contains("seed")) cfg.seed = get_seed(doc["seed"], "seed");
  if (doc.contains("output")) cfg.output = get_string(doc["output"], "output");
  if (doc.contains("economy")) cfg.economy = parse_economy(doc["economy"], "economy");

  auto need_economy = [&](const char* key) {
    if (!cfg.economy) throw ConfigError(key, "requires 'economy'");
    return std::pair{cfg.economy->consumers(), cfg.economy->goods()};
  };
  if (doc.contains("endowments")) {
    const auto [M, L] = need_economy("endowments");
    const json& list = doc["endowments"];
    if (!list.is_array()) throw ConfigError("endowments", "expected an array of matrices");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string ip = index("endowments", i);
      Endowment e{get_mat(list[i], ip, M, L)};
      if (!e.resource_feasible(cfg.economy->resources(), 1e-9))
        throw ConfigError(ip, "rows must sum to the resources");
      cfg.endowments.push_back(std::move(e));
    }
  }
  if (doc.contains("endowment_samples"))
    cfg.endowment_samples = get_int(doc["endowment_samples"], "endowment_samples", 0);
  if (doc.contains("endowment_range")) {
    const Vec range = get_vec(doc["endowment_range"], "endowment_range");
    if (range.size() != 2 || !(range(0) < range(1))) throw ConfigError("endowment_range", "expected [lo, hi] with lo < hi");
    cfg.endowment_lo = range(0);
    cfg.endowment_hi = range(1);
  }
  if (doc.contains("anchor_endowment")) {
    const auto [M, L] = need_economy("anchor_endowment");
    Endowment e{get_mat(doc["anchor_endowment"], "anchor_endowment", M, L)};
    if (!e.resource_feasible(cfg.economy->resources(), 1e-9))
      throw ConfigError("anchor_endowment", "rows must sum to the resources");
    cfg.anchor_endowment = std::move(e);
  }
  if (doc.contains("scan")) parse_scan(doc["scan"], "scan", cfg.scan);

  if (doc.contains("chart")) {
    const std::string c = get_string(doc["chart"], "chart");
    if (c == "equilibrium-manifold") cfg.chart = ChartKind::EquilibriumManifold;
    else if (c == "helicoid") cfg.chart = ChartKind::Helicoid;
    else throw ConfigError("chart", "expected 'equilibrium-manifold' or 'helicoid'");
  }
  if (doc.contains("grid")) cfg.grid = parse_grid(doc["grid"], "grid");
  if (doc.contains("boxes")) {
    if (!doc["boxes"].is_array()) throw ConfigError("boxes", "expected an array");
    for (std::size_t i = 0; i < doc["boxes"].size(); ++i)
      cfg.boxes.push_back(parse_box(doc["boxes"][i], index("boxes", i)));
  }
  if (doc.contains("quadrature")) parse_quadrature(doc["quadrature"], "quadrature", cfg.quadrature);
  if (doc.contains("derivatives")) parse_derivatives(doc["derivatives"], "derivatives", cfg.derivatives);
  if (doc.contains("tolerances")) parse_tolerances(doc["tolerances"], "tolerances", cfg.tolerances);

  if (doc.contains("helicoids")) {
    if (!doc["helicoids"].is_array()) throw ConfigError("helicoids", "expected an array");
    for (std::size_t i = 0; i < doc["helicoids"].size(); ++i)
      cfg.helicoids.push_back(parse_helicoid(doc["helicoids"][i], index("helicoids", i)));
  }
  if (doc.contains("hyperplanes")) cfg.hyperplanes = get_int(doc["hyperplanes"], "hyperplanes", 0);
  if (doc.contains("grid_points")) cfg.grid_points = get_int(doc["grid_points"], "grid_points", 1);
  if (doc.contains("t_values")) cfg.t_values = get_doubles(doc["t_values"], "t_values");
  if (doc.contains("epsilons")) cfg.epsilons = get_doubles(doc["epsilons"], "epsilons");
  if (doc.contains("perturbations")) cfg.perturbations = get_int(doc["perturbations"], "perturbations", 1);
  if (doc.contains("amplitude")) cfg.amplitude = get_number(doc["amplitude"], "amplitude");

  set_seed(cfg, cfg.seed);

  // Scenario-level requirements.
  const bool economic = cfg.chart == ChartKind::EquilibriumManifold;
  switch (cfg.scenario) {
    case Scenario::Equilibria:
    case Scenario::ConjectureSweep:
      if (!cfg.economy) throw ConfigError("economy", "required for " + to_string(cfg.scenario));
      if (cfg.endowments.empty() && cfg.endowment_samples == 0)
        throw ConfigError("endowments", "give 'endowments' or a positive 'endowment_samples'");
      break;
    case Scenario::CurvatureScan:
    case Scenario::Entropy:
    case Scenario::MvpProbe:
      if (economic && !cfg.economy) throw ConfigError("economy", "required for the equilibrium-manifold chart");
      if (!economic && cfg.helicoids.size() != 1) throw ConfigError("helicoids", "give exactly one helicoid");
      break;
    case Scenario::GeodesicCheck:
      if (!cfg.economy) throw ConfigError("economy", "required for geodesic-check");
      if (cfg.economy->goods() != 2 || cfg.economy->consumers() != 2)
        throw ConfigError("economy", "geodesic-check needs two goods and two consumers");
      if (cfg.t_values.empty()) throw ConfigError("t_values", "required for geodesic-check");
      break;
    case Scenario::HelicoidCheck:
      break;
  }
  if (cfg.scenario == Scenario::CurvatureScan && !cfg.grid) throw ConfigError("grid", "required for curvature-scan");
  if (cfg.scenario == Scenario::ConjectureSweep && !cfg.grid)
    throw ConfigError("grid", "required for conjecture-sweep");
  if ((cfg.scenario == Scenario::Entropy || cfg.scenario == Scenario::MvpProbe) && cfg.boxes.empty())
    throw ConfigError("boxes", "required for " + to_string(cfg.scenario));
  if (cfg.scenario == Scenario::MvpProbe && cfg.epsilons.empty()) throw ConfigError("epsilons", "required for mvp-probe");
  return cfg;
}

void set_seed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.scan.seed = seed;
  cfg.quadrature.seed = seed;
}

ExperimentConfig load_config(const std::string& path, std::optional<Scenario> fallback) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc, fallback);
}

}  // namespace eqlab::lab
