// hjlab command line front end.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hjlab/burago.hpp"
#include "hjlab/constructions.hpp"
#include "hjlab/errors.hpp"
#include "hjlab/harness.hpp"

using namespace hjlab;

namespace {

constexpr int kPass = 0;
constexpr int kCheckFailure = 1;
constexpr int kConfigError = 2;

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string output;
  std::string format;

  RunConfig load() const {
    RunConfig cfg = config.empty() ? RunConfig{} : RunConfig::load(config);
    for (const auto& o : overrides) cfg.apply_override(o);
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (!output.empty()) cfg.output = output;
    if (!format.empty()) cfg.format = format;
    cfg.validate();
    return cfg;
  }
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON run configuration");
  sub->add_option("--set", c.overrides, "Override a config key, e.g. rate.levels=4");
  sub->add_option("--seed", c.seed, "Seed for randomized multistarts");
  sub->add_option("--workers", c.workers, "Worker threads");
  sub->add_option("--output", c.output, "Output path (stdout if omitted)");
  sub->add_option("--format", c.format, "json or csv");
}

Vec parse_vec(const std::string& text, int dim, const char* what) {
  Vec out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": cannot parse '" + item + "'");
    }
  }
  if (out.size() == 1 && dim > 1) out.resize(static_cast<std::size_t>(dim), out[0]);
  if (static_cast<int>(out.size()) != dim)
    throw ConfigError(std::string(what) + ": expected " + std::to_string(dim) + " components");
  return out;
}

Json curve_json(const Curve& c) {
  return Json{{"dimension", c.dimension()}, {"knots", c.knots()}, {"nodes", c.nodes()}};
}

void write_curve_csv(const Curve& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "s";
  for (int i = 0; i < c.dimension(); ++i) out << ",x" << i + 1;
  out << '\n';
  for (std::size_t k = 0; k < c.knot_count(); ++k) {
    out << csv_number(c.knot(k));
    for (double v : c.node(k)) out << ',' << csv_number(v);
    out << '\n';
  }
}

Curve read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open path file " + path);
  std::string line;
  Vec knots, nodes;
  int dim = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Vec row;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (knots.empty()) continue;  // header
      throw ConfigError(path + ": non-numeric row");
    }
    if (row.size() < 2) throw ConfigError(path + ": rows need s and at least one coordinate");
    if (dim < 0) dim = static_cast<int>(row.size()) - 1;
    if (static_cast<int>(row.size()) - 1 != dim) throw ConfigError(path + ": ragged rows");
    knots.push_back(row[0]);
    nodes.insert(nodes.end(), row.begin() + 1, row.end());
  }
  try {
    return Curve(knots, nodes, dim);
  } catch (const PreconditionError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

Report json_report(const RunConfig& cfg, Json body) {
  Report r;
  r.json = Json{{"tool", "hjlab"}, {"seed", cfg.seed}, {"config", cfg.to_json()}};
  for (auto& [k, v] : body.items()) r.json[k] = v;
  return r;
}

int finish(const RunConfig& cfg, const Report& report, bool passed) {
  emit_report(report, cfg.format, cfg.output);
  return passed ? kPass : kCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic Hamilton-Jacobi homogenization laboratory"};
  app.require_subcommand(1);

  Common common;

  // legendre
  auto* legendre = app.add_subcommand("legendre", "Evaluate L(x,t,v) and verify the model");
  std::string lx = "0", lv = "0";
  double lt = 0.0;
  bool lverify = false;
  legendre->add_option("--x", lx, "Position (comma separated)");
  legendre->add_option("--t", lt, "Time");
  legendre->add_option("--v", lv, "Velocity (comma separated)");
  legendre->add_flag("--verify", lverify, "Run the model property checks");
  add_common(legendre, common);

  // metric
  auto* metric = app.add_subcommand("metric", "Minimal action m(t,x,y) over a window");
  double mt0 = 0.0, mt1 = 1.0;
  std::string mfrom = "0", mto = "0", mcurve;
  bool moracle = false;
  metric->add_option("--t0", mt0, "Window start");
  metric->add_option("--t1", mt1, "Window end");
  metric->add_option("--from", mfrom, "Start point");
  metric->add_option("--to", mto, "End point");
  metric->add_flag("--oracle", moracle, "Also run the 1D dynamic-programming oracle");
  metric->add_option("--curve-csv", mcurve, "Write the minimizer trace here");
  add_common(metric, common);

  // burago
  auto* burago = app.add_subcommand("burago", "Half-displacement interval decomposition");
  std::string bpath;
  double bt = 0.0;
  std::string by;
  burago->add_option("--path", bpath, "CSV path file (s, x1, ..., xd)");
  burago->add_option("--t", bt, "Lift the metric minimizer on [0,t] instead");
  burago->add_option("--y", by, "Endpoint for --t");
  add_common(burago, common);

  // double / halve
  auto* dbl = app.add_subcommand("double", "Doubling path and the sub-additivity defect");
  auto* halve = app.add_subcommand("halve", "Halving path and the super-additivity defect");
  double ct = 10.0;
  std::string cy = "1";
  std::string ccurve;
  for (auto* sub : {dbl, halve}) {
    sub->add_option("--t", ct, "Horizon t");
    sub->add_option("--y", cy, "Endpoint y");
    sub->add_option("--curve-csv", ccurve, "Write the constructed path here");
    add_common(sub, common);
  }

  // effective
  auto* eff = app.add_subcommand("effective", "Tabulate the effective Lagrangian and Hamiltonian");
  std::string out_dir = ".";
  std::optional<double> pmin, pmax;
  int ppoints = 41;
  eff->add_option("--out-dir", out_dir, "Directory for lbar.csv and hbar.csv");
  eff->add_option("--p-min", pmin, "Smallest p (default: half the q-range)");
  eff->add_option("--p-max", pmax, "Largest p");
  eff->add_option("--p-points", ppoints, "p-grid points per axis");
  add_common(eff, common);

  // solve
  auto* solve = app.add_subcommand("solve", "Oscillatory solution u^eps by control or scheme");
  std::string route = "control";
  double seps = 0.25, sdx = 0.0, shorizon = 1.0;
  int ssnapshots = 1;
  solve->add_option("--route", route, "control or scheme")
      ->check(CLI::IsMember({"control", "scheme"}));
  solve->add_option("--epsilon", seps, "Oscillation scale");
  solve->add_option("--grid-dx", sdx, "Scheme cell size (default eps / 64)");
  solve->add_option("--horizon", shorizon, "Final time");
  solve->add_option("--snapshots", ssnapshots, "Scheme snapshots after t = 0");
  add_common(solve, common);

  // rate / paper-check
  auto* rate = app.add_subcommand("rate", "Convergence-rate experiment");
  std::string plot_csv;
  rate->add_option("--plot-csv", plot_csv, "Write error-vs-epsilon CSV here");
  add_common(rate, common);
  auto* paper = app.add_subcommand("paper-check", "Run every acceptance stage");
  add_common(paper, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    const RunConfig cfg = common.load();
    const int n = cfg.model.dimension;

    if (legendre->parsed()) {
      const LagrangianModel L = cfg.build_lagrangian();
      const Vec x = parse_vec(lx, n, "--x"), v = parse_vec(lv, n, "--v");
      Json body{{"x", x}, {"t", lt}, {"v", v}, {"L", legendre_transform(L, x, lt, v)},
                {"conjugation", L.mode() == ConjugationMode::Analytic ? "analytic" : "numeric"}};
      bool ok = true;
      if (lverify) {
        const CheckOutcome c = check_model_stage(cfg);
        body["verification"] = c.detail;
        ok = c.passed;
      }
      Report r = json_report(cfg, body);
      r.header = {"L"};
      r.rows = {{csv_number(body["L"].get<double>())}};
      return finish(cfg, r, ok);
    }

    if (metric->parsed()) {
      const LagrangianModel L = cfg.build_lagrangian();
      const MetricResult m = compute_metric(
          L, cfg.metric_settings().query(mt0, mt1, parse_vec(mfrom, n, "--from"),
                                         parse_vec(mto, n, "--to")));
      Json body{{"value", m.value},
                {"first_order_residual", m.first_order_residual},
                {"converged", m.converged},
                {"iterations", m.iterations},
                {"starts_tried", m.starts_tried},
                {"best_start_index", m.best_start_index},
                {"minimizer", curve_json(m.minimizer)}};
      if (moracle) {
        if (n != 1) throw ConfigError("--oracle is one-dimensional");
        MetricQuery q = cfg.metric_settings().query(mt0, mt1, parse_vec(mfrom, 1, "--from"),
                                                    parse_vec(mto, 1, "--to"));
        body["oracle"] = dp_metric_oracle(L, q, DpGrid{});
      }
      if (!mcurve.empty()) write_curve_csv(m.minimizer, mcurve);
      Report r = json_report(cfg, body);
      r.header = {"value", "residual", "converged"};
      r.rows = {{csv_number(m.value), csv_number(m.first_order_residual),
                 m.converged ? "true" : "false"}};
      return finish(cfg, r, true);
    }

    if (burago->parsed()) {
      Curve xi = bpath.empty() ? Curve({0.0, 1.0}, {0.0, 0.0}, 1) : read_curve_csv(bpath);
      if (bpath.empty()) {
        if (!(bt > 0.0)) throw ConfigError("burago needs --path or --t/--y");
        const LagrangianModel L = cfg.build_lagrangian();
        const Vec y = parse_vec(by.empty() ? "0" : by, n, "--y");
        xi = compute_metric(L, cfg.metric_settings().query(0.0, bt, Vec(y.size(), 0.0), y))
                 .minimizer.space_time_lift();
      }
      Json body{{"dimension", xi.dimension()}};
      bool ok = false;
      try {
        const BuragoDecomposition d =
            xi.dimension() == 1 ? burago_1d(xi, cfg.burago.tol_1d)
                                : burago_nd(xi, cfg.burago.tol_nd, cfg.burago.budget);
        const double tol = xi.dimension() == 1 ? cfg.burago.tol_1d : cfg.burago.tol_nd;
        const DecompositionCheck v = verify_decomposition(xi, d, tol);
        Json iv = Json::array();
        for (const auto& [a, b] : d.intervals) iv.push_back({a, b});
        body["intervals"] = iv;
        body["k"] = d.k;
        body["residual"] = d.residual;
        body["duration_sum"] = d.duration_sum;
        body["certificate"] = {{"passed", v.passed},
                               {"disjoint", v.disjoint},
                               {"within_domain", v.within_domain},
                               {"count_ok", v.count_ok},
                               {"residual", v.residual}};
        ok = v.passed;
      } catch (const SearchFailure& e) {
        body["search_failure"] = e.what();
      }
      Report r = json_report(cfg, body);
      r.header = {"passed"};
      r.rows = {{ok ? "true" : "false"}};
      return finish(cfg, r, ok);
    }

    if (dbl->parsed()) {
      const LagrangianModel L = cfg.build_lagrangian();
      const SubadditivityReport s = check_subadditivity(L, ct, parse_vec(cy, n, "--y"),
                                                        cfg.metric_settings(),
                                                        cfg.sweeps.velocity_bound);
      Json body{{"t", s.t}, {"y", s.y}, {"m_t", s.m_t}, {"m_2t", s.m_2t}, {"defect", s.defect}};
      bool ok = true;
      if (s.doubling) {
        const DoublingReport& d = *s.doubling;
        body["constructive_bound"] = *s.constructive_bound;
        body["segment_costs"] = d.K;
        body["path_action"] = d.total;
        body["w"] = d.w;
        body["window"] = {{"l", d.window.l}, {"width", d.window.width},
                          {"action", d.window.window_action}, {"budget", d.window.budget}};
        body["max_junction_gap"] = d.max_junction_gap;
        ok = d.max_junction_gap <= 1e-12 && d.start_gap <= 1e-12 && d.end_gap <= 1e-12 &&
             s.defect <= *s.constructive_bound + 1e-9;
        if (!ccurve.empty()) {
          const Curve eta = compute_metric(L, cfg.metric_settings().query(
                                                  0.0, ct, Vec(s.y.size(), 0.0), s.y))
                                .minimizer;
          write_curve_csv(build_doubling_path(L, eta, s.y).mu, ccurve);
        }
      } else {
        body["small_time_bound"] = *s.small_time_bound;
        ok = s.defect <= *s.small_time_bound;
      }
      Report r = json_report(cfg, body);
      r.header = {"t", "defect"};
      r.rows = {{csv_number(s.t), csv_number(s.defect)}};
      return finish(cfg, r, ok);
    }

    if (halve->parsed()) {
      const LagrangianModel L = cfg.build_lagrangian();
      const SuperadditivityReport s = check_superadditivity(L, ct, parse_vec(cy, n, "--y"),
                                                            cfg.metric_settings(),
                                                            cfg.sweeps.velocity_bound);
      Json body{{"t", s.t}, {"y", s.y}, {"m_t", s.m_t}, {"m_2t", s.m_2t}, {"defect", s.defect}};
      bool ok = true;
      if (s.halving) {
        body["constructive_bound"] = *s.constructive_bound;
        body["k"] = s.decomposition->k;
        Json parts = Json::array();
        for (const HalvingResult* h : {&*s.halving, &*s.complement}) {
          const ShiftSchedule& sc = h->schedule;
          Json shifts = Json::array();
          for (const auto& w : sc.w) shifts.push_back(w);
          parts.push_back({{"source", sc.source},
                           {"c", sc.c},
                           {"d", sc.d},
                           {"w", shifts},
                           {"connector_budget", sc.connector_budget},
                           {"j", sc.j},
                           {"upper_bound", h->upper_bound},
                           {"max_junction_gap", h->max_junction_gap}});
          ok = ok && h->max_junction_gap <= 1e-12 && h->start_gap <= 1e-12 &&
               h->end_gap <= 1e-12;
        }
        body["halving"] = parts;
        if (!ccurve.empty()) write_curve_csv(s.halving->zeta, ccurve);
      } else {
        body["small_time_bound"] = *s.small_time_bound;
        ok = s.defect <= *s.small_time_bound;
      }
      Report r = json_report(cfg, body);
      r.header = {"t", "defect"};
      r.rows = {{csv_number(s.t), csv_number(s.defect)}};
      return finish(cfg, r, ok);
    }

    if (eff->parsed()) {
      const LagrangianModel L = cfg.build_lagrangian();
      const RateBlock& R = cfg.rate;
      const EffectiveLagrangianTable lag =
          R.lagrangian_table.empty()
              ? effective_lagrangian(L, TensorGrid::uniform(n, R.q_min, R.q_max, R.q_points),
                                     R.levels, cfg.metric_settings(), cfg.workers)
              : read_lagrangian_csv(R.lagrangian_table);
      const double lo = pmin.value_or(0.5 * lag.grid.lo());
      const double hi = pmax.value_or(0.5 * lag.grid.hi());
      const EffectiveHamiltonianTable ham =
          effective_hamiltonian(lag, TensorGrid::uniform(n, lo, hi, ppoints));
      std::filesystem::create_directories(out_dir);
      const std::string lpath = (std::filesystem::path(out_dir) / "lbar.csv").string();
      const std::string hpath = (std::filesystem::path(out_dir) / "hbar.csv").string();
      write_lagrangian_csv(lag, lpath);
      write_hamiltonian_csv(ham, hpath);
      const double conv = convexity_violation(lag.grid, lag.values);
      const double grow = growth_violation(lag, L.growth());
      const double fy = fenchel_young_violation(lag, ham);
      constexpr double kTol = 1e-8;
      Json body{{"lagrangian_csv", lpath},
                {"hamiltonian_csv", hpath},
                {"convexity_violation", conv},
                {"growth_violation", grow},
                {"fenchel_young_violation", fy},
                {"tolerance", kTol}};
      Report r = json_report(cfg, body);
      r.header = {"convexity_violation", "growth_violation", "fenchel_young_violation"};
      r.rows = {{csv_number(conv), csv_number(grow), csv_number(fy)}};
      return finish(cfg, r, conv <= kTol && grow <= kTol && fy <= kTol);
    }

    if (solve->parsed()) {
      if (n != 1 && route == "scheme") throw ConfigError("the scheme route is one-dimensional");
      const InitialDatum g = [](const Vec& y) { return std::sin(2.0 * M_PI * y[0]); };
      Report r = json_report(cfg, Json{{"route", route}, {"epsilon", seps}, {"horizon", shorizon}});
      r.header = {"x", "t", "u"};
      if (route == "scheme") {
        SchemeOptions so;
        so.snapshots = ssnapshots;
        const double dx = sdx > 0.0 ? sdx : seps / 64.0;
        const GridSolution sol = solve_scheme(cfg.build_hamiltonian(), g, seps, shorizon, dx, so);
        for (std::size_t s = 0; s < sol.times.size(); ++s)
          for (std::size_t i = 0; i < sol.x.size(); ++i)
            r.rows.push_back({csv_number(sol.x[i]), csv_number(sol.times[s]),
                              csv_number(sol.values[s][i])});
        r.json["dx"] = sol.dx;
        r.json["dt"] = sol.dt;
        r.json["theta"] = sol.theta;
        r.json["steps"] = sol.steps;
        r.json["x"] = sol.x;
        r.json["times"] = sol.times;
        r.json["values"] = sol.values;
        r.json["warnings"] = sol.warnings;
      } else {
        const LagrangianModel L = cfg.build_lagrangian();
        ControlOptions co;
        co.coarse_per_epsilon = cfg.rate.coarse_per_epsilon;
        co.refine = cfg.rate.refine;
        co.workers = cfg.workers;
        MetricSettings settings = cfg.metric_settings();
        settings.optimizer.max_iterations = cfg.rate.control_max_iterations;
        ControlSolver solver(L, g, seps, shorizon, settings, co);
        Json xs = Json::array(), us = Json::array();
        int warnings = 0;
        for (const Vec& x : periodic_grid(cfg.rate.eval_points)) {
          Vec point(static_cast<std::size_t>(n), 0.0);
          point[0] = x[0];
          const ControlResult c = solver.evaluate(point);
          warnings += c.boundary_warning;
          xs.push_back(x[0]);
          us.push_back(c.value);
          r.rows.push_back({csv_number(x[0]), csv_number(shorizon), csv_number(c.value)});
        }
        r.json["x"] = xs;
        r.json["u"] = us;
        r.json["boundary_warnings"] = warnings;
      }
      return finish(cfg, r, true);
    }

    if (rate->parsed()) {
      const RateReport rr = run_rate_experiment(cfg);
      const Report r = make_rate_report(cfg, rr);
      if (!plot_csv.empty()) emit_report(r, "csv", plot_csv);
      return finish(cfg, r, rr.passed());
    }

    if (paper->parsed()) {
      const PaperCheck pc = run_paper_check(cfg);
      return finish(cfg, pc.report, pc.passed());
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const PreconditionError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const GridTooNarrowError& e) {
    std::cerr << "grid too narrow: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCheckFailure;
  }
  return kConfigError;
}
