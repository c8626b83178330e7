#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hjlab/action.hpp"
#include "hjlab/effective.hpp"
#include "hjlab/model.hpp"
#include "hjlab/pde.hpp"

namespace hjlab {

using Json = nlohmann::ordered_json;

enum class Experiment { Rate, Subadd, Superadd, BuragoSuite, EffectiveTables, PaperCheck };

Experiment parse_experiment(const std::string& name);
std::string experiment_name(Experiment e);

struct ModelBlock {
  std::string family = "separable-quadratic";
  std::map<std::string, double> params{{"A", 1.0}};
  int dimension = 1;
  std::optional<std::string> table;
  std::string conjugation = "analytic";
};

struct MetricBlock {
  int segments_per_unit = 16;
  int multistarts = 5;
  double gradient_tol = 1e-7;
  int max_iterations = 10000;
};

struct RateBlock {
  std::vector<double> epsilons{0.5, 0.25, 0.125, 0.0625};
  int eval_points = 64;
  double t = 1.0;
  double q_min = -3.0;
  double q_max = 3.0;
  int q_points = 65;
  int levels = 5;
  int coarse_per_epsilon = 8;
  int refine = 8;
  int hopf_lax_points_per_unit = 256;
  /// Optimizer iteration cap for the control route's metric queries.
  int control_max_iterations = 300;
  /// Cross-check the control route against the scheme at these epsilons.
  std::vector<double> scheme_epsilons{0.5, 0.25};
  /// Scheme resolution dx = epsilon / scheme_cells_per_epsilon.
  int scheme_cells_per_epsilon = 64;
  double scheme_tolerance = 2e-2;
  double exponent_min = 0.75;
  double exponent_max = 1.25;
  double c_emp_variation = 0.25;
  /// Reuse a table written by the effective subcommand; empty computes it.
  std::string lagrangian_table;
};

struct SweepBlock {
  std::vector<double> sub_t{10, 20, 40, 80};
  std::vector<double> super_t{200, 400, 800};
  /// y = speed * t + offset.
  std::vector<double> speeds{0.25, 0.5, 0.75};
  double offset = 0.37;
  double velocity_bound = 2.0;
  /// Allowed growth of the max defect per doubling of t.
  double growth = 0.10;
  /// Defects below this are treated as optimizer noise by the growth test.
  double noise_floor = 1e-6;
};

struct BuragoBlock {
  int paths_1d = 1000;
  int lifts = 100;
  double tol_1d = 1e-8;
  double tol_nd = 1e-6;
  int budget = 50000;
};

struct CheckBlock {
  int model_samples = 1000;
  double model_tol = 1e-9;
  double periodicity_t = 2.0;
  double periodicity_x = 0.3;
  double periodicity_y = 0.7;
  double periodicity_tol = 1e-6;
};

struct RunConfig {
  ModelBlock model;
  Experiment experiment = Experiment::PaperCheck;
  std::uint64_t seed = 0;
  int workers = 1;
  MetricBlock metric;
  RateBlock rate;
  SweepBlock sweeps;
  BuragoBlock burago;
  CheckBlock checks;
  std::string output;
  std::string format = "json";

  /// Unknown keys and invalid values raise ConfigError.
  static RunConfig from_json(const Json& j);
  static RunConfig load(const std::string& path);
  Json to_json() const;
  /// Applies "a.b.c=value" where value is parsed as JSON (bare strings
  /// are accepted as strings).
  void apply_override(const std::string& assignment);
  void validate() const;

  HamiltonianModel build_hamiltonian() const;
  LagrangianModel build_lagrangian() const;
  MetricSettings metric_settings() const;
};

struct RateFit {
  double exponent = 0.0;
  double intercept = 0.0;
  /// Root mean square of the log-space residuals.
  double residual = 0.0;
  int used = 0;
  std::vector<std::string> notes;
};

/// Ordinary least squares of log(error) on log(epsilon). Pairs with a
/// nonpositive error are skipped with a note; fewer than two usable pairs
/// raise PreconditionError.
RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs);

struct SchemeComparison {
  double epsilon = 0.0;
  double dx = 0.0;
  double max_difference = 0.0;
  Vec location;
  int steps = 0;
  std::vector<std::string> warnings;
};

struct RateReport {
  std::vector<ErrorReport> errors;
  RateFit fit;
  double c_emp = 0.0;
  /// |C_1 - C_2| / max(C_1, C_2) for the two finest epsilons.
  double c_emp_variation = 0.0;
  std::vector<SchemeComparison> scheme;
  int boundary_warnings = 0;
  bool exponent_ok = false;
  bool c_emp_stable = false;
  bool scheme_ok = true;
  bool passed() const { return exponent_ok && c_emp_stable && scheme_ok; }
};

/// Builds the effective table once, evaluates u^eps (control route) and u
/// on the shared grid for each epsilon, and fits the rate.
RateReport run_rate_experiment(const RunConfig& cfg);

Json to_json(const RateReport& r);
Json to_json(const ErrorReport& e);

/// A report: JSON document plus an optional flat table for CSV output.
struct Report {
  Json json = Json::object();
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Report make_rate_report(const RunConfig& cfg, const RateReport& r);

/// Writes report.json (pretty, two-space indent) or report rows as CSV.
/// An empty path or "-" writes to stdout. Throws Error with the path on
/// I/O failure.
void emit_report(const Report& report, const std::string& format, const std::string& path);

/// Formats a double with 17 significant digits for CSV cells.
std::string csv_number(double v);

struct CheckOutcome {
  std::string name;
  bool passed = false;
  Json detail = Json::object();
};

/// Runs model verification, metric periodicity, the sub/super-additivity
/// sweeps, the Burago suite and the rate experiment, in that order.
struct PaperCheck {
  std::vector<CheckOutcome> checks;
  Report report;
  bool passed() const;
};

PaperCheck run_paper_check(const RunConfig& cfg);

/// Individual stages (also used by the CLI experiments).
CheckOutcome check_model_stage(const RunConfig& cfg);
CheckOutcome check_periodicity_stage(const RunConfig& cfg);
CheckOutcome check_subadditivity_stage(const RunConfig& cfg);
CheckOutcome check_superadditivity_stage(const RunConfig& cfg);
CheckOutcome check_burago_stage(const RunConfig& cfg);
CheckOutcome check_rate_stage(const RunConfig& cfg);

/// Max of |defect| per t, and whether it grows by less than the allowed
/// fraction per doubling (values below the noise floor are clamped up).
struct GrowthCheck {
  Vec t;
  Vec max_defect;
  Vec ratio;
  bool passed = false;
};
GrowthCheck defect_growth(const Vec& t, const Vec& max_defect, double growth,
                          double noise_floor);

}  // namespace hjlab
