// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when everything passes).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "hjlab/burago.hpp"
#include "hjlab/constructions.hpp"
#include "hjlab/effective.hpp"
#include "hjlab/harness.hpp"

using namespace hjlab;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

LagrangianModel separable(double A) {
  return LagrangianModel(HamiltonianModel::separable_quadratic(1, A));
}

Outcome legendre_round_trip() {
  const auto H = HamiltonianModel::separable_quadratic(1, 1.0);
  const LagrangianModel analytic(H, ConjugationMode::Analytic);
  const LagrangianModel numeric(H, ConjugationMode::NumericConjugate);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0), speed(-3.0, 3.0);
  double worst = 0.0;
  for (int s = 0; s < 1000; ++s) {
    const Vec x{unit(rng)}, v{speed(rng)};
    const double t = unit(rng);
    worst = std::max(worst, std::abs(numeric(x, t, v) - analytic(x, t, v)));
  }
  return {worst <= 1e-6, "max |numeric - analytic| = " + fmt("%.3e", worst)};
}

Outcome metric_exactness() {
  const auto L = separable(0.0);
  const MetricSettings settings;
  double worst = 0.0;
  for (double t : {0.5, 1.0, 2.0, 4.0, 8.0})
    for (double y : {-2.0, -0.5, 0.0, 1.0, 3.0}) {
      const double exact = y * y / (2.0 * t);
      const double m = compute_metric(L, settings.query(0.0, t, {0.0}, {y})).value;
      worst = std::max(worst, std::abs(m - exact) / std::max(1.0, std::abs(exact)));
    }
  const double tol = 2.0 * settings.optimizer.gradient_tol;
  double defect = 0.0;
  for (double t : {3.0, 10.0})
    defect = std::max(defect, std::abs(check_subadditivity(L, t, {0.5 * t + 0.37}).defect));
  for (double t : {3.0, 200.0})
    defect = std::max(defect, std::abs(check_superadditivity(L, t, {0.5 * t + 0.37}).defect));
  return {worst <= 1e-4 && defect <= tol,
          "max relative error = " + fmt("%.3e", worst) + ", max |defect| = " +
              fmt("%.3e", defect) + " (tol " + fmt("%.1e", tol) + ")"};
}

Outcome oracle_agreement() {
  const auto L = separable(1.0);
  MetricSettings settings;
  settings.segments_per_unit = 32;
  const double pairs[10][2] = {{1, 0.5}, {2, 0.25}, {2, 1.5}, {3, 1.0}, {4, 2.5},
                               {5, 0.75}, {6, 4.0}, {7, 2.0}, {8, 3.0}, {8, 6.0}};
  double worst = 0.0;
  for (const auto& p : pairs) {
    const MetricQuery q = settings.query(0.0, p[0], {0.0}, {p[1]});
    const double opt = compute_metric(L, q).value;
    const double dp = dp_metric_oracle(L, q, DpGrid{});
    worst = std::max(worst, std::abs(opt - dp) / std::abs(dp));
  }
  return {worst <= 0.05, "max relative gap to the DP oracle = " + fmt("%.4f", worst)};
}

Outcome burago_certificates() {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> step(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, 60);
  std::uniform_real_distribution<double> gap(0.01, 2.0);
  double worst_1d = 0.0;
  bool k_ok = true;
  for (int p = 0; p < 1000; ++p) {
    const int n = count(rng);
    Vec knots{0.0}, nodes{step(rng)};
    for (int i = 0; i < n; ++i) {
      knots.push_back(knots.back() + gap(rng));
      nodes.push_back(nodes.back() + step(rng));
    }
    const BuragoDecomposition d = burago_1d(Curve(knots, nodes, 1), 1e-8);
    worst_1d = std::max(worst_1d, d.residual);
    k_ok = k_ok && d.k == 1;
  }

  const auto L = separable(1.0);
  const MetricSettings settings;
  std::uniform_real_distribution<double> tdist(2.0, 10.0), unit(-1.0, 1.0);
  int certified = 0;
  double worst_nd = 0.0, worst_duration = 0.0;
  for (int s = 0; s < 100; ++s) {
    const double t = tdist(rng);
    const double y = t * unit(rng);
    const Curve lift =
        compute_metric(L, settings.query(0.0, t, {0.0}, {y})).minimizer.space_time_lift();
    const BuragoDecomposition d = burago_nd(lift);
    const DecompositionCheck c = verify_decomposition(lift, d, 1e-6);
    worst_nd = std::max(worst_nd, d.residual);
    worst_duration = std::max(worst_duration, std::abs(d.duration_sum - 0.5 * t));
    if (c.passed && d.k <= burago_max_intervals(2) && std::abs(d.duration_sum - 0.5 * t) <= 1e-9)
      ++certified;
  }
  return {worst_1d <= 1e-8 && k_ok && certified == 100,
          "1D residual <= " + fmt("%.2e", worst_1d) + (k_ok ? ", k = 1" : ", k > 1 seen") +
              "; lifts certified " + std::to_string(certified) + "/100 (residual <= " +
              fmt("%.2e", worst_nd) + ", duration error <= " + fmt("%.2e", worst_duration) + ")"};
}

Outcome construction_certificates() {
  const RunConfig cfg;
  const CheckOutcome sub = check_subadditivity_stage(cfg);
  const CheckOutcome sup = check_superadditivity_stage(cfg);
  std::ostringstream ss;
  ss << "doubling " << (sub.passed ? "ok" : "failed") << " max defects "
     << sub.detail["max_abs_defect"].dump() << "; halving "
     << (sup.passed ? "ok" : "failed") << " max defects "
     << sup.detail["max_abs_defect"].dump();
  return {sub.passed && sup.passed, ss.str()};
}

// Hbar for p^2/2 + sin^2(pi x) above the flat piece from
// |p| = int_0^1 sqrt(2 (E - V)) dx.
double mechanical_hbar(double p) {
  auto slope = [](double E) {
    const int n = 20000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double V = std::pow(std::sin(M_PI * (i + 0.5) / n), 2);
      s += std::sqrt(std::max(0.0, 2.0 * (E - V)));
    }
    return s / n;
  };
  double lo = 1.0, hi = 1.0 + p * p;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) < std::abs(p) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Outcome effective_sanity() {
  const TensorGrid grid = TensorGrid::uniform(1, -2.0, 2.0, 33);
  const EffectiveLagrangianTable free = effective_lagrangian(separable(0.0), grid, 5);
  double free_err = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double q = grid.point(i)[0];
    free_err = std::max(free_err, std::abs(free.values[i] - 0.5 * q * q));
  }

  const auto L = separable(1.0);
  const EffectiveLagrangianTable tab = effective_lagrangian(L, grid, 5);
  const double conv = convexity_violation(grid, tab.values);
  const double growth = growth_violation(tab, L.growth());
  const EffectiveHamiltonianTable ham =
      effective_hamiltonian(tab, TensorGrid::uniform(1, -1.5, 1.5, 13));
  const double fy = fenchel_young_violation(tab, ham);

  const LagrangianModel mech(HamiltonianModel::separable_quadratic(1, 0.0, 0.0, 0.5, -0.5));
  const EffectiveLagrangianTable mtab =
      effective_lagrangian(mech, TensorGrid::uniform(1, -3.0, 3.0, 49), 3);
  const TensorGrid p = TensorGrid::uniform(1, 1.2, 2.0, 5);
  const EffectiveHamiltonianTable mham = effective_hamiltonian(mtab, p);
  double mech_err = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double exact = mechanical_hbar(p.point(i)[0]);
    mech_err = std::max(mech_err, std::abs(mham.values[i] - exact) / exact);
  }
  const bool ok = free_err <= 1e-4 && conv <= 1e-8 && growth <= 1e-8 && fy <= 1e-8 &&
                  mech_err <= 0.01;
  return {ok, "free table error " + fmt("%.2e", free_err) + ", convexity " + fmt("%.2e", conv) +
                  ", growth " + fmt("%.2e", growth) + ", Fenchel-Young " + fmt("%.2e", fy) +
                  ", mechanical relative error " + fmt("%.4f", mech_err)};
}

Outcome rate_experiment() {
  const RunConfig cfg;
  const RateReport r = run_rate_experiment(cfg);
  std::ostringstream ss;
  ss << "errors";
  for (const auto& e : r.errors) ss << ' ' << fmt("%.4g", e.epsilon) << ':' << fmt("%.5f", e.sup_error);
  ss << "; exponent " << fmt("%.3f", r.fit.exponent) << ", C_emp " << fmt("%.4f", r.c_emp)
     << ", variation " << fmt("%.3f", r.c_emp_variation);
  for (const auto& s : r.scheme)
    ss << "; scheme gap at eps " << fmt("%.4g", s.epsilon) << " = " << fmt("%.4f", s.max_difference);
  return {r.exponent_ok && r.c_emp_stable, ss.str()};
}

Outcome determinism() {
  RunConfig cfg;
  cfg.seed = 11;
  cfg.checks.model_samples = 200;
  cfg.sweeps.sub_t = {10, 20};
  cfg.sweeps.super_t = {200};
  cfg.sweeps.speeds = {0.5};
  cfg.burago.paths_1d = 100;
  cfg.burago.lifts = 10;
  cfg.rate.epsilons = {0.5, 0.25, 0.125};
  cfg.rate.eval_points = 16;
  cfg.rate.q_points = 33;
  cfg.rate.levels = 3;
  cfg.rate.scheme_epsilons = {0.5};
  const auto dir = std::filesystem::temp_directory_path() / "hjlab_acceptance";
  std::filesystem::create_directories(dir);
  std::string bytes[2];
  for (int run = 0; run < 2; ++run) {
    const auto path = dir / ("report" + std::to_string(run) + ".json");
    emit_report(run_paper_check(cfg).report, "json", path.string());
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    bytes[run] = ss.str();
  }
  std::filesystem::remove_all(dir);
  const bool same = !bytes[0].empty() && bytes[0] == bytes[1];
  return {same, std::to_string(bytes[0].size()) + " bytes, " + (same ? "identical" : "different")};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"Legendre round trip", legendre_round_trip},
      {"metric exactness", metric_exactness},
      {"oracle agreement", oracle_agreement},
      {"Burago certificates", burago_certificates},
      {"construction certificates", construction_certificates},
      {"effective objects", effective_sanity},
      {"rate experiment", rate_experiment},
      {"determinism", determinism},
  };
  const double limits[] = {10, 0, 300, 0, 0, 0, 1800, 0};
  int failed = 0;
  for (int i = 0; i < 8; ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limits[i] > 0 && secs > limits[i]) {
      o.passed = false;
      o.detail += ", over the time limit of " + fmt("%.0f", limits[i]) + " s";
    }
    failed += !o.passed;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.passed ? "PASS" : "FAIL", i + 1,
                criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed;
}
