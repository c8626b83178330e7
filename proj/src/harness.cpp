#include "hjlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "hjlab/burago.hpp"
#include "hjlab/constructions.hpp"
#include "hjlab/errors.hpp"
#include "hjlab/parallel.hpp"

namespace hjlab {

Experiment parse_experiment(const std::string& name) {
  if (name == "rate") return Experiment::Rate;
  if (name == "subadd") return Experiment::Subadd;
  if (name == "superadd") return Experiment::Superadd;
  if (name == "burago-suite") return Experiment::BuragoSuite;
  if (name == "effective-tables") return Experiment::EffectiveTables;
  if (name == "paper-check") return Experiment::PaperCheck;
  throw ConfigError("unknown experiment '" + name + "'");
}

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::Rate: return "rate";
    case Experiment::Subadd: return "subadd";
    case Experiment::Superadd: return "superadd";
    case Experiment::BuragoSuite: return "burago-suite";
    case Experiment::EffectiveTables: return "effective-tables";
    case Experiment::PaperCheck: return "paper-check";
  }
  return "paper-check";
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <class T>
void read(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

}  // namespace

RunConfig RunConfig::from_json(const Json& j) {
  RunConfig c;
  reject_unknown(j, {"model", "experiment", "seed", "workers", "metric", "rate", "sweeps",
                     "burago", "checks", "output", "format"},
                 "config");
  if (j.contains("model")) {
    const Json& m = j.at("model");
    reject_unknown(m, {"family", "params", "dimension", "table", "conjugation"}, "model");
    read(m, "family", c.model.family, "model");
    if (m.contains("params")) {
      c.model.params.clear();
      const Json& p = m.at("params");
      if (!p.is_object()) throw ConfigError("model.params: expected an object");
      for (const auto& [k, v] : p.items()) {
        if (!v.is_number()) throw ConfigError("model.params." + k + ": expected a number");
        c.model.params[k] = v.get<double>();
      }
    }
    read(m, "dimension", c.model.dimension, "model");
    if (m.contains("table") && !m.at("table").is_null()) {
      std::string path;
      read(m, "table", path, "model");
      c.model.table = path;
    }
    read(m, "conjugation", c.model.conjugation, "model");
  }
  if (j.contains("experiment")) {
    std::string name;
    read(j, "experiment", name, "config");
    c.experiment = parse_experiment(name);
  }
  read(j, "seed", c.seed, "config");
  read(j, "workers", c.workers, "config");
  read(j, "output", c.output, "config");
  read(j, "format", c.format, "config");
  if (j.contains("metric")) {
    const Json& m = j.at("metric");
    reject_unknown(m, {"segments_per_unit", "multistarts", "gradient_tol", "max_iterations"},
                   "metric");
    read(m, "segments_per_unit", c.metric.segments_per_unit, "metric");
    read(m, "multistarts", c.metric.multistarts, "metric");
    read(m, "gradient_tol", c.metric.gradient_tol, "metric");
    read(m, "max_iterations", c.metric.max_iterations, "metric");
  }
  if (j.contains("rate")) {
    const Json& r = j.at("rate");
    reject_unknown(r, {"epsilons", "eval_points", "t", "q_min", "q_max", "q_points", "levels",
                       "coarse_per_epsilon", "refine", "hopf_lax_points_per_unit", "control_max_iterations",
                       "scheme_epsilons", "scheme_cells_per_epsilon", "scheme_tolerance",
                       "exponent_min", "exponent_max", "c_emp_variation", "lagrangian_table"},
                   "rate");
    auto& R = c.rate;
    read(r, "epsilons", R.epsilons, "rate");
    read(r, "eval_points", R.eval_points, "rate");
    read(r, "t", R.t, "rate");
    read(r, "q_min", R.q_min, "rate");
    read(r, "q_max", R.q_max, "rate");
    read(r, "q_points", R.q_points, "rate");
    read(r, "levels", R.levels, "rate");
    read(r, "coarse_per_epsilon", R.coarse_per_epsilon, "rate");
    read(r, "refine", R.refine, "rate");
    read(r, "hopf_lax_points_per_unit", R.hopf_lax_points_per_unit, "rate");
    read(r, "control_max_iterations", R.control_max_iterations, "rate");
    read(r, "scheme_epsilons", R.scheme_epsilons, "rate");
    read(r, "scheme_cells_per_epsilon", R.scheme_cells_per_epsilon, "rate");
    read(r, "scheme_tolerance", R.scheme_tolerance, "rate");
    read(r, "exponent_min", R.exponent_min, "rate");
    read(r, "exponent_max", R.exponent_max, "rate");
    read(r, "c_emp_variation", R.c_emp_variation, "rate");
    read(r, "lagrangian_table", R.lagrangian_table, "rate");
  }
  if (j.contains("sweeps")) {
    const Json& s = j.at("sweeps");
    reject_unknown(s, {"sub_t", "super_t", "speeds", "offset", "velocity_bound", "growth",
                       "noise_floor"},
                   "sweeps");
    read(s, "sub_t", c.sweeps.sub_t, "sweeps");
    read(s, "super_t", c.sweeps.super_t, "sweeps");
    read(s, "speeds", c.sweeps.speeds, "sweeps");
    read(s, "offset", c.sweeps.offset, "sweeps");
    read(s, "velocity_bound", c.sweeps.velocity_bound, "sweeps");
    read(s, "growth", c.sweeps.growth, "sweeps");
    read(s, "noise_floor", c.sweeps.noise_floor, "sweeps");
  }
  if (j.contains("burago")) {
    const Json& b = j.at("burago");
    reject_unknown(b, {"paths_1d", "lifts", "tol_1d", "tol_nd", "budget"}, "burago");
    read(b, "paths_1d", c.burago.paths_1d, "burago");
    read(b, "lifts", c.burago.lifts, "burago");
    read(b, "tol_1d", c.burago.tol_1d, "burago");
    read(b, "tol_nd", c.burago.tol_nd, "burago");
    read(b, "budget", c.burago.budget, "burago");
  }
  if (j.contains("checks")) {
    const Json& k = j.at("checks");
    reject_unknown(k, {"model_samples", "model_tol", "periodicity_t", "periodicity_x",
                       "periodicity_y", "periodicity_tol"},
                   "checks");
    read(k, "model_samples", c.checks.model_samples, "checks");
    read(k, "model_tol", c.checks.model_tol, "checks");
    read(k, "periodicity_t", c.checks.periodicity_t, "checks");
    read(k, "periodicity_x", c.checks.periodicity_x, "checks");
    read(k, "periodicity_y", c.checks.periodicity_y, "checks");
    read(k, "periodicity_tol", c.checks.periodicity_tol, "checks");
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return from_json(j);
}

Json RunConfig::to_json() const {
  Json j;
  Json params = Json::object();
  for (const auto& [k, v] : model.params) params[k] = v;
  j["model"] = {{"family", model.family},
                {"params", params},
                {"dimension", model.dimension},
                {"table", model.table ? Json(*model.table) : Json(nullptr)},
                {"conjugation", model.conjugation}};
  j["experiment"] = experiment_name(experiment);
  j["seed"] = seed;
  j["workers"] = workers;
  j["metric"] = {{"segments_per_unit", metric.segments_per_unit},
                 {"multistarts", metric.multistarts},
                 {"gradient_tol", metric.gradient_tol},
                 {"max_iterations", metric.max_iterations}};
  j["rate"] = {{"epsilons", rate.epsilons},
               {"eval_points", rate.eval_points},
               {"t", rate.t},
               {"q_min", rate.q_min},
               {"q_max", rate.q_max},
               {"q_points", rate.q_points},
               {"levels", rate.levels},
               {"coarse_per_epsilon", rate.coarse_per_epsilon},
               {"refine", rate.refine},
               {"hopf_lax_points_per_unit", rate.hopf_lax_points_per_unit},
               {"control_max_iterations", rate.control_max_iterations},
               {"scheme_epsilons", rate.scheme_epsilons},
               {"scheme_cells_per_epsilon", rate.scheme_cells_per_epsilon},
               {"scheme_tolerance", rate.scheme_tolerance},
               {"exponent_min", rate.exponent_min},
               {"exponent_max", rate.exponent_max},
               {"c_emp_variation", rate.c_emp_variation},
               {"lagrangian_table", rate.lagrangian_table}};
  j["sweeps"] = {{"sub_t", sweeps.sub_t},
                 {"super_t", sweeps.super_t},
                 {"speeds", sweeps.speeds},
                 {"offset", sweeps.offset},
                 {"velocity_bound", sweeps.velocity_bound},
                 {"growth", sweeps.growth},
                 {"noise_floor", sweeps.noise_floor}};
  j["burago"] = {{"paths_1d", burago.paths_1d},
                 {"lifts", burago.lifts},
                 {"tol_1d", burago.tol_1d},
                 {"tol_nd", burago.tol_nd},
                 {"budget", burago.budget}};
  j["checks"] = {{"model_samples", checks.model_samples},
                 {"model_tol", checks.model_tol},
                 {"periodicity_t", checks.periodicity_t},
                 {"periodicity_x", checks.periodicity_x},
                 {"periodicity_y", checks.periodicity_y},
                 {"periodicity_tol", checks.periodicity_tol}};
  j["output"] = output;
  j["format"] = format;
  return j;
}

void RunConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' must look like key.path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }
  Json j = to_json();
  Json* node = &j;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->contains(parts[i]) || !(*node)[parts[i]].is_object())
      throw ConfigError("override: unknown block '" + parts[i] + "'");
    node = &(*node)[parts[i]];
  }
  const bool free_map = parts.size() == 3 && parts[0] == "model" && parts[1] == "params";
  if (!free_map && !node->contains(parts.back()))
    throw ConfigError("override: unknown key '" + path + "'");
  (*node)[parts.back()] = value;
  *this = from_json(j);
}

void RunConfig::validate() const {
  parse_family(model.family);
  parse_conjugation_mode(model.conjugation);
  if (model.dimension < 1) throw ConfigError("model.dimension must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (format != "json" && format != "csv") throw ConfigError("format must be json or csv");
  if (metric.segments_per_unit < 2 || metric.multistarts < 1 || !(metric.gradient_tol > 0.0) ||
      metric.max_iterations < 1)
    throw ConfigError("metric block: invalid resolution or optimizer settings");
  for (double e : rate.epsilons)
    if (!(e > 0.0 && e < 1.0) && e != 1.0)
      throw ConfigError("rate.epsilons entries must lie in (0, 1]");
  if (!rate.scheme_epsilons.empty()) {
    for (double e : rate.scheme_epsilons) {
      const double k = 1.0 / e;
      if (!(e > 0.0 && e <= 1.0) || std::abs(k - std::round(k)) > 1e-9 * k)
        throw ConfigError("rate.scheme_epsilons entries must be reciprocals of integers");
    }
  }
  if (rate.eval_points < 1 || rate.q_points < 3 || !(rate.q_max > rate.q_min) || rate.levels < 2 ||
      rate.coarse_per_epsilon < 1 || rate.refine < 1 || !(rate.t > 0.0) ||
      rate.scheme_cells_per_epsilon < 1 || rate.hopf_lax_points_per_unit < 1 ||
      rate.control_max_iterations < 1)
    throw ConfigError("rate block: invalid grid settings");
  if (!(sweeps.velocity_bound > 0.0)) throw ConfigError("sweeps.velocity_bound must be positive");
  if (burago.paths_1d < 0 || burago.lifts < 0 || burago.budget < 1)
    throw ConfigError("burago block: invalid counts");
  if (checks.model_samples < 1) throw ConfigError("checks.model_samples must be >= 1");
}

HamiltonianModel RunConfig::build_hamiltonian() const {
  return HamiltonianModel::from_params(model.family, model.params, model.dimension, model.table);
}

LagrangianModel RunConfig::build_lagrangian() const {
  HamiltonianModel H = build_hamiltonian();
  if (H.family() == Family::CustomTable)
    return LagrangianModel(std::move(H), ConjugationMode::NumericConjugate);
  return LagrangianModel(std::move(H), parse_conjugation_mode(model.conjugation));
}

MetricSettings RunConfig::metric_settings() const {
  MetricSettings s;
  s.segments_per_unit = metric.segments_per_unit;
  s.multistarts = metric.multistarts;
  s.seed = seed;
  s.optimizer.gradient_tol = metric.gradient_tol;
  s.optimizer.max_iterations = metric.max_iterations;
  return s;
}

// ---------------------------------------------------------------------------
// Rate fitting and the rate experiment

RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs) {
  RateFit fit;
  std::vector<double> lx, ly;
  for (const auto& [eps, err] : pairs) {
    if (!(eps > 0.0)) throw PreconditionError("fit_rate: epsilon must be positive");
    if (!(err > 0.0)) {
      std::ostringstream ss;
      ss << "excluded epsilon = " << eps << " with nonpositive error " << err;
      fit.notes.push_back(ss.str());
      continue;
    }
    lx.push_back(std::log(eps));
    ly.push_back(std::log(err));
  }
  fit.used = static_cast<int>(lx.size());
  if (fit.used < 2) throw PreconditionError("fit_rate: fewer than two usable pairs");
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw PreconditionError("fit_rate: all epsilons coincide");
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (fit.intercept + fit.exponent * lx[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

namespace {

double sine_datum(const Vec& y) { return std::sin(2.0 * M_PI * y[0]); }

std::string describe_resolution(const RunConfig& cfg, double eps) {
  std::ostringstream ss;
  ss << "segments_per_unit=" << cfg.metric.segments_per_unit
     << " y_step=" << eps / (cfg.rate.coarse_per_epsilon * cfg.rate.refine)
     << " q_points=" << cfg.rate.q_points << " levels=" << cfg.rate.levels;
  return ss.str();
}

}  // namespace

RateReport run_rate_experiment(const RunConfig& cfg) {
  if (cfg.model.dimension != 1) throw ConfigError("the rate experiment is one-dimensional");
  if (cfg.rate.epsilons.size() < 3) throw ConfigError("the rate experiment needs >= 3 epsilons");
  const HamiltonianModel H = cfg.build_hamiltonian();
  const LagrangianModel L = cfg.build_lagrangian();
  const MetricSettings settings = cfg.metric_settings();
  const RateBlock& R = cfg.rate;

  const EffectiveLagrangianTable tab =
      R.lagrangian_table.empty()
          ? effective_lagrangian(L, TensorGrid::uniform(1, R.q_min, R.q_max, R.q_points), R.levels,
                                 settings, cfg.workers)
          : read_lagrangian_csv(R.lagrangian_table);

  const InitialDatum g = sine_datum;
  const std::vector<Vec> pts = periodic_grid(R.eval_points);
  RateReport rep;
  Vec u_eff(pts.size());
  HopfLaxOptions hl;
  hl.points_per_unit = R.hopf_lax_points_per_unit;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const HopfLaxResult r = hopf_lax_effective(tab, g, pts[i], R.t, L.growth(), hl);
    u_eff[i] = r.value;
    if (r.boundary_warning) ++rep.boundary_warnings;
  }

  ControlOptions co;
  co.coarse_per_epsilon = R.coarse_per_epsilon;
  co.refine = R.refine;
  co.workers = cfg.workers;
  std::map<double, Vec> control_values;
  auto control_at = [&](double eps) -> const Vec& {
    auto it = control_values.find(eps);
    if (it != control_values.end()) return it->second;
    MetricSettings capped = settings;
    capped.optimizer.max_iterations = R.control_max_iterations;
    ControlSolver solver(L, g, eps, R.t, capped, co);
    Vec u(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const ControlResult r = solver.evaluate(pts[i]);
      u[i] = r.value;
      if (r.boundary_warning) ++rep.boundary_warnings;
    }
    return control_values.emplace(eps, std::move(u)).first->second;
  };

  std::vector<std::pair<double, double>> pairs;
  for (double eps : R.epsilons) {
    ErrorReport e = sup_error(control_at(eps), u_eff, pts);
    e.epsilon = eps;
    e.route = "control";
    e.resolution = describe_resolution(cfg, eps);
    pairs.emplace_back(eps, e.sup_error);
    rep.errors.push_back(std::move(e));
  }
  rep.fit = fit_rate(pairs);
  rep.exponent_ok = rep.fit.exponent >= R.exponent_min && rep.fit.exponent <= R.exponent_max;

  std::vector<std::pair<double, double>> ratios;
  for (const auto& e : rep.errors) {
    ratios.emplace_back(e.epsilon, e.sup_error / e.epsilon);
    rep.c_emp = std::max(rep.c_emp, e.sup_error / e.epsilon);
  }
  std::sort(ratios.begin(), ratios.end());
  const double c1 = ratios[0].second, c2 = ratios[1].second;
  rep.c_emp_variation = std::abs(c1 - c2) / std::max({c1, c2, 1e-300});
  rep.c_emp_stable = std::isfinite(rep.c_emp) && rep.c_emp_variation < R.c_emp_variation;

  for (double eps : R.scheme_epsilons) {
    SchemeComparison sc;
    sc.epsilon = eps;
    sc.dx = eps / R.scheme_cells_per_epsilon;
    const GridSolution sol = solve_scheme(H, g, eps, R.t, sc.dx);
    const Vec& uc = control_at(eps);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double d = std::abs(sol.at(pts[i][0]) - uc[i]);
      if (d > sc.max_difference || i == 0) {
        sc.max_difference = d;
        sc.location = pts[i];
      }
    }
    sc.steps = sol.steps;
    sc.warnings = sol.warnings;
    if (!(sc.max_difference <= R.scheme_tolerance)) rep.scheme_ok = false;
    rep.scheme.push_back(std::move(sc));
  }
  return rep;
}

Json to_json(const ErrorReport& e) {
  return Json{{"epsilon", e.epsilon},  {"sup_error", e.sup_error},
              {"location", e.location}, {"index", e.index},
              {"route", e.route},       {"resolution", e.resolution}};
}

Json to_json(const RateReport& r) {
  Json errors = Json::array();
  for (const auto& e : r.errors) errors.push_back(to_json(e));
  Json scheme = Json::array();
  for (const auto& s : r.scheme)
    scheme.push_back({{"epsilon", s.epsilon},
                      {"dx", s.dx},
                      {"max_difference", s.max_difference},
                      {"location", s.location},
                      {"steps", s.steps},
                      {"warnings", s.warnings}});
  return Json{{"errors", errors},
              {"fit",
               {{"exponent", r.fit.exponent},
                {"intercept", r.fit.intercept},
                {"residual", r.fit.residual},
                {"used", r.fit.used},
                {"notes", r.fit.notes}}},
              {"c_emp", r.c_emp},
              {"c_emp_variation", r.c_emp_variation},
              {"scheme_cross_check", scheme},
              {"boundary_warnings", r.boundary_warnings},
              {"exponent_ok", r.exponent_ok},
              {"c_emp_stable", r.c_emp_stable},
              {"scheme_ok", r.scheme_ok},
              {"passed", r.passed()}};
}

std::string csv_number(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

namespace {

Json tolerances_of(const RunConfig& cfg) {
  return Json{{"optimizer_gradient_tol", cfg.metric.gradient_tol},
              {"optimizer_max_iterations", cfg.metric.max_iterations},
              {"model_tol", cfg.checks.model_tol},
              {"periodicity_tol", cfg.checks.periodicity_tol},
              {"burago_tol_1d", cfg.burago.tol_1d},
              {"burago_tol_nd", cfg.burago.tol_nd},
              {"defect_growth", cfg.sweeps.growth},
              {"defect_noise_floor", cfg.sweeps.noise_floor},
              {"scheme_tolerance", cfg.rate.scheme_tolerance},
              {"exponent_window", {cfg.rate.exponent_min, cfg.rate.exponent_max}},
              {"c_emp_variation", cfg.rate.c_emp_variation}};
}

Json report_header(const RunConfig& cfg) {
  return Json{{"tool", "hjlab"},
              {"schema", 1},
              {"seed", cfg.seed},
              {"config", cfg.to_json()},
              {"tolerances", tolerances_of(cfg)}};
}

}  // namespace

Report make_rate_report(const RunConfig& cfg, const RateReport& r) {
  Report rep;
  rep.json = report_header(cfg);
  rep.json["rate"] = to_json(r);
  rep.header = {"epsilon", "sup_error", "location", "error_over_epsilon"};
  for (const auto& e : r.errors)
    rep.rows.push_back({csv_number(e.epsilon), csv_number(e.sup_error),
                        csv_number(e.location.empty() ? 0.0 : e.location[0]),
                        csv_number(e.sup_error / e.epsilon)});
  return rep;
}

void emit_report(const Report& report, const std::string& format, const std::string& path) {
  std::ostringstream body;
  if (format == "json") {
    body << report.json.dump(2) << '\n';
  } else if (format == "csv") {
    for (std::size_t i = 0; i < report.header.size(); ++i)
      body << (i ? "," : "") << report.header[i];
    body << '\n';
    for (const auto& row : report.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) body << (i ? "," : "") << row[i];
      body << '\n';
    }
  } else {
    throw ConfigError("unknown report format '" + format + "'");
  }
  if (path.empty() || path == "-") {
    std::cout << body.str();
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << body.str();
  out.flush();
  if (!out) throw Error("write failed for " + path);
}

// ---------------------------------------------------------------------------
// paper-check stages

GrowthCheck defect_growth(const Vec& t, const Vec& max_defect, double growth,
                          double noise_floor) {
  GrowthCheck g;
  g.t = t;
  g.max_defect = max_defect;
  g.passed = true;
  for (std::size_t i = 1; i < max_defect.size(); ++i) {
    const double prev = std::max(max_defect[i - 1], noise_floor);
    const double cur = std::max(max_defect[i], noise_floor);
    g.ratio.push_back(cur / prev);
    if (cur > (1.0 + growth) * prev) g.passed = false;
  }
  return g;
}

namespace {

Vec along_first_axis(int n, double value) {
  Vec y(static_cast<std::size_t>(n), 0.0);
  y[0] = value;
  return y;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

CheckOutcome check_model_stage(const RunConfig& cfg) {
  CheckOutcome out;
  out.name = "model";
  const HamiltonianModel H = cfg.build_hamiltonian();
  const ModelReport rep = verify_model(H, cfg.checks.model_samples, cfg.checks.model_tol, cfg.seed);
  out.passed = rep.all_passed();
  Json checks = Json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"worst_violation", c.worst_violation}});
  out.detail["properties"] = checks;

  // Numeric conjugation against the closed form when one exists.
  if (H.family() != Family::CustomTable) {
    const LagrangianModel analytic(H, ConjugationMode::Analytic);
    const LagrangianModel numeric(H, ConjugationMode::NumericConjugate);
    std::mt19937_64 rng(mix_seed(cfg.seed, 11));
    std::uniform_real_distribution<double> unit(0.0, 1.0), vel(-2.0, 2.0);
    const auto n = static_cast<std::size_t>(H.dimension());
    double worst = 0.0;
    for (int s = 0; s < cfg.checks.model_samples; ++s) {
      Vec x(n), v(n);
      for (auto& c : x) c = unit(rng);
      const double t = unit(rng);
      for (auto& c : v) c = vel(rng);
      worst = std::max(worst, std::abs(analytic(x, t, v) - numeric(x, t, v)));
    }
    out.detail["legendre_round_trip_max_error"] = worst;
    out.passed = out.passed && worst <= 1e-6;
  }
  return out;
}

CheckOutcome check_periodicity_stage(const RunConfig& cfg) {
  CheckOutcome out;
  out.name = "metric-periodicity";
  const LagrangianModel L = cfg.build_lagrangian();
  const int n = cfg.model.dimension;
  const auto& C = cfg.checks;
  const Vec x = along_first_axis(n, C.periodicity_x);
  const Vec y = along_first_axis(n, C.periodicity_y);
  const double integer_defect =
      check_metric_periodicity(L, C.periodicity_t, x, y, along_first_axis(n, 1.0),
                               cfg.metric.multistarts, cfg.seed);
  const double half_defect =
      check_metric_periodicity(L, C.periodicity_t, x, y, along_first_axis(n, 0.5),
                               cfg.metric.multistarts, cfg.seed);
  out.detail = {{"integer_shift_defect", integer_defect}, {"half_shift_defect", half_defect}};
  out.passed = integer_defect <= C.periodicity_tol;
  return out;
}

CheckOutcome check_subadditivity_stage(const RunConfig& cfg) {
  CheckOutcome out;
  out.name = "subadditivity";
  const LagrangianModel L = cfg.build_lagrangian();
  const MetricSettings settings = cfg.metric_settings();
  const auto& S = cfg.sweeps;
  const int n = cfg.model.dimension;
  bool admissible = true;
  Json rows = Json::array();
  Vec ts, maxima;
  for (double t : S.sub_t) {
    double worst = 0.0;
    for (double speed : S.speeds) {
      const Vec y = along_first_axis(n, speed * t + S.offset);
      const SubadditivityReport r = check_subadditivity(L, t, y, settings, S.velocity_bound);
      Json row = {{"t", t}, {"y", y}, {"m_t", r.m_t}, {"m_2t", r.m_2t}, {"defect", r.defect}};
      if (r.constructive_bound) {
        const DoublingReport& d = *r.doubling;
        row["constructive_bound"] = *r.constructive_bound;
        row["segment_costs"] = d.K;
        row["window_start"] = d.window.l;
        row["max_junction_gap"] = d.max_junction_gap;
        if (d.max_junction_gap > 1e-12 || d.start_gap > 1e-12 || d.end_gap > 1e-12)
          admissible = false;
        if (r.defect > *r.constructive_bound + 1e-9) admissible = false;
      }
      if (r.small_time_bound) {
        row["small_time_bound"] = *r.small_time_bound;
        if (r.defect > *r.small_time_bound) admissible = false;
      }
      rows.push_back(row);
      worst = std::max(worst, std::abs(r.defect));
    }
    ts.push_back(t);
    maxima.push_back(worst);
  }
  const GrowthCheck g = defect_growth(ts, maxima, S.growth, S.noise_floor);
  out.detail = {{"rows", rows},
                {"max_abs_defect", g.max_defect},
                {"growth_ratio", g.ratio},
                {"admissible", admissible},
                {"bounded", g.passed}};
  out.passed = admissible && g.passed;
  return out;
}

CheckOutcome check_superadditivity_stage(const RunConfig& cfg) {
  CheckOutcome out;
  out.name = "superadditivity";
  const LagrangianModel L = cfg.build_lagrangian();
  const MetricSettings settings = cfg.metric_settings();
  const auto& S = cfg.sweeps;
  const int n = cfg.model.dimension;
  bool admissible = true;
  Json rows = Json::array();
  Vec ts, maxima;
  for (double t : S.super_t) {
    double worst = 0.0;
    for (double speed : S.speeds) {
      const Vec y = along_first_axis(n, speed * t + S.offset);
      const SuperadditivityReport r = check_superadditivity(L, t, y, settings, S.velocity_bound);
      Json row = {{"t", t}, {"y", y}, {"m_t", r.m_t}, {"m_2t", r.m_2t}, {"defect", r.defect}};
      if (r.constructive_bound) {
        row["constructive_bound"] = *r.constructive_bound;
        row["k"] = r.decomposition->k;
        Json halves = Json::array();
        for (const HalvingResult* h : {&*r.halving, &*r.complement}) {
          const ShiftSchedule& s = h->schedule;
          bool spacing = true;
          for (std::size_t i = 0; i < s.c.size(); ++i) {
            const double gap = s.c[i] - s.d[i];
            if (gap < 1.0 - 1e-9 || gap >= 2.0) spacing = false;
          }
          halves.push_back({{"intervals", s.source.size()},
                            {"connector_budget", s.connector_budget},
                            {"j", s.j},
                            {"upper_bound", h->upper_bound},
                            {"source_action", h->source_action},
                            {"max_junction_gap", h->max_junction_gap},
                            {"max_connector_displacement", s.max_connector_displacement},
                            {"spacing_ok", spacing}});
          if (!spacing || h->max_junction_gap > 1e-12 || h->start_gap > 1e-12 ||
              h->end_gap > 1e-12 ||
              s.max_connector_displacement > std::sqrt(static_cast<double>(n)) + 1e-12)
            admissible = false;
          if (h->upper_bound < r.m_t - 1e-9) admissible = false;
        }
        if (r.halving->schedule.connector_budget > n + 3) admissible = false;
        row["halving"] = halves;
      }
      if (r.small_time_bound) {
        row["small_time_bound"] = *r.small_time_bound;
        if (r.defect > *r.small_time_bound) admissible = false;
      }
      rows.push_back(row);
      worst = std::max(worst, std::abs(r.defect));
    }
    ts.push_back(t);
    maxima.push_back(worst);
  }
  const GrowthCheck g = defect_growth(ts, maxima, S.growth, S.noise_floor);
  out.detail = {{"rows", rows},
                {"max_abs_defect", g.max_defect},
                {"growth_ratio", g.ratio},
                {"admissible", admissible},
                {"bounded", g.passed}};
  out.passed = admissible && g.passed;
  return out;
}

CheckOutcome check_burago_stage(const RunConfig& cfg) {
  CheckOutcome out;
  out.name = "burago";
  const auto& B = cfg.burago;
  std::mt19937_64 rng(mix_seed(cfg.seed, 23));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> knots(2, 60);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  double worst_1d = 0.0;
  bool ok_1d = true;
  for (int p = 0; p < B.paths_1d; ++p) {
    const int N = knots(rng);
    Vec s(static_cast<std::size_t>(N) + 1), x(s.size());
    double cursor = 0.0, level = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = cursor;
      x[i] = level;
      cursor += 0.05 + unit(rng);
      level += normal(rng);
    }
    const Curve c(s, x, 1);
    const BuragoDecomposition d = burago_1d(c, B.tol_1d);
    const DecompositionCheck v = verify_decomposition(c, d, B.tol_1d);
    worst_1d = std::max(worst_1d, v.residual);
    if (!v.passed || d.k != 1) ok_1d = false;
  }

  const LagrangianModel L = cfg.build_lagrangian();
  const MetricSettings settings = cfg.metric_settings();
  const int n = cfg.model.dimension;
  double worst_nd = 0.0, worst_duration = 0.0;
  int max_k = 0;
  bool ok_nd = true;
  std::vector<std::string> failures;
  for (int p = 0; p < B.lifts; ++p) {
    const double t = 2.0 + 8.0 * unit(rng);
    Vec y(static_cast<std::size_t>(n));
    for (auto& c : y) c = (2.0 * unit(rng) - 1.0) * t;
    MetricSettings s = settings;
    s.seed = mix_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(p));
    const MetricResult m = compute_metric(L, s.query(0.0, t, Vec(y.size(), 0.0), y));
    const Curve lift = m.minimizer.space_time_lift();
    try {
      const BuragoDecomposition d = burago_nd(lift, B.tol_nd, B.budget);
      const DecompositionCheck v = verify_decomposition(lift, d, B.tol_nd);
      worst_nd = std::max(worst_nd, v.residual);
      worst_duration = std::max(worst_duration, std::abs(d.duration_sum - 0.5 * t));
      max_k = std::max(max_k, d.k);
      if (!v.passed || std::abs(d.duration_sum - 0.5 * t) > 1e-9) ok_nd = false;
    } catch (const SearchFailure& e) {
      ok_nd = false;
      failures.push_back(e.what());
    }
  }
  out.detail = {{"paths_1d", B.paths_1d},
                {"worst_residual_1d", worst_1d},
                {"lifts", B.lifts},
                {"worst_residual_nd", worst_nd},
                {"worst_duration_error", worst_duration},
                {"max_k", max_k},
                {"k_bound", burago_max_intervals(n + 1)},
                {"search_failures", failures}};
  out.passed = ok_1d && ok_nd && max_k <= burago_max_intervals(n + 1);
  return out;
}

CheckOutcome check_rate_stage(const RunConfig& cfg) {
  CheckOutcome out;
  out.name = "rate";
  const RateReport r = run_rate_experiment(cfg);
  out.detail = to_json(r);
  out.passed = r.passed();
  return out;
}

bool PaperCheck::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

PaperCheck run_paper_check(const RunConfig& cfg) {
  PaperCheck pc;
  using Stage = CheckOutcome (*)(const RunConfig&);
  const Stage stages[] = {check_model_stage,           check_periodicity_stage,
                          check_subadditivity_stage,   check_superadditivity_stage,
                          check_burago_stage,          check_rate_stage};
  for (Stage stage : stages) pc.checks.push_back(stage(cfg));
  pc.report.json = report_header(cfg);
  Json checks = Json::array();
  pc.report.header = {"check", "passed"};
  for (const auto& c : pc.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    pc.report.rows.push_back({c.name, c.passed ? "true" : "false"});
  }
  pc.report.json["checks"] = checks;
  pc.report.json["passed"] = pc.passed();
  return pc;
}

}  // namespace hjlab
