#pragma once

#include <array>
#include <optional>
#include <vector>

#include "hjlab/action.hpp"
#include "hjlab/burago.hpp"
#include "hjlab/curve.hpp"
#include "hjlab/model.hpp"

namespace hjlab {

/// A time window [l, l + width] of a curve together with its cost.
struct CheapWindow {
  double l = 0.0;
  double width = 0.0;
  double window_action = 0.0;
  /// Integral of |eta'|^m over the window (m from the growth bounds).
  double window_velocity_m_integral = 0.0;
  /// Averaging bound the window was checked against.
  double budget = 0.0;
};

/// Scans [l, l + width] for l = start, start + 1, ... (the tail shorter
/// than one step is ignored) and returns the cheapest window. Without an
/// explicit budget, (total + K * domain) / floor(domain / width) is used.
/// Throws PreconditionError if the domain is shorter than width and
/// ConstructionError if the cheapest window exceeds the budget.
CheapWindow find_cheap_window(const LagrangianModel& L, const Curve& eta,
                              double width,
                              std::optional<double> budget = {});

struct DoublingReport {
  /// Costs of the six pieces of mu (empty pieces cost 0).
  std::array<double, 6> K{};
  double total = 0.0;
  /// action(eta), the stand-in for m(t,0,y).
  double eta_action = 0.0;
  /// total - 2 * action(eta).
  double defect = 0.0;
  /// w in [0,1)^n with y - w integral.
  Vec w;
  CheapWindow window;
  double max_junction_gap = 0.0;
  /// |mu(0)| and |mu(2t) - 2y|.
  double start_gap = 0.0;
  double end_gap = 0.0;
};

struct DoublingResult {
  Curve mu;
  DoublingReport report;
};

/// Six-piece path on [0, 2t] joining 0 to 2y built from a curve eta on
/// [0, t] joining 0 to y: eta itself, a connector to y - w, the shifted
/// copy of eta on [0, l], the window [l, l+6] run six times faster, the
/// shifted copy of eta on [l+6, t], and a connector to 2y.
/// Requires t > 6.
DoublingResult build_doubling_path(const LagrangianModel& L, const Curve& eta,
                                   const Vec& y);

struct ShiftSchedule {
  /// Source intervals (degenerate ones removed).
  std::vector<std::pair<double, double>> source;
  Vec c;
  /// d[0] = 0, then d_1 ... d_k.
  Vec d;
  /// Integer shifts w_1 ... w_k.
  std::vector<Vec> w;
  /// Least integer strictly above the total connector time.
  int connector_budget = 0;
  /// Index (0-based) of the segment whose window is compressed.
  int j = 0;
  /// Sum of (c_{i+1} - d_i) over i = 0 .. k-1.
  double connector_time = 0.0;
  /// Largest |mu_i(d_i) - mu_{i+1}(c_{i+1})|.
  double max_connector_displacement = 0.0;
};

struct HalvingResult {
  Curve zeta{{0.0, 1.0}, {0.0, 0.0}, 1};
  ShiftSchedule schedule;
  CheapWindow window;
  /// action(zeta): an upper bound for m(t, 0, y).
  double upper_bound = 0.0;
  /// Sum over the source intervals of the action of eta.
  double source_action = 0.0;
  double max_junction_gap = 0.0;
  double start_gap = 0.0;
  double end_gap = 0.0;
};

/// Schedule of shifted copies for intervals of [0, 2t] whose durations sum
/// to t. Exposed for testing.
ShiftSchedule make_shift_schedule(const Curve& eta,
                                  std::vector<std::pair<double, double>> intervals);

/// Path on [0, t] joining 0 to y assembled from integer-shifted copies of
/// eta on the given intervals of [0, 2t], straight connectors between
/// them, and a window of length 3M run three times faster to free time
/// 2M for the final straight run. Requires t > 4(n+4)^2.
HalvingResult build_halving_path(const LagrangianModel& L, const Curve& eta,
                                 const Vec& y,
                                 const std::vector<std::pair<double, double>>& intervals);

/// C = beta * M^m + K, the per-unit-time bound on |m| for |y| <= M t.
double small_time_constant(const GrowthBounds& g, double velocity_bound);

struct SubadditivityReport {
  double t = 0.0;
  Vec y;
  double m_t = 0.0;
  double m_2t = 0.0;
  /// m(2t,0,2y) - 2 m(t,0,y).
  double defect = 0.0;
  /// action(mu) - 2 m(t,0,y), present for t > 6.
  std::optional<double> constructive_bound;
  std::optional<DoublingReport> doubling;
  /// 4 C t, present for t <= 6.
  std::optional<double> small_time_bound;
  double residual_t = 0.0;
  double residual_2t = 0.0;
};

/// Measures m(2t,0,2y) - 2m(t,0,y). For t > 6 the doubled problem is also
/// warm-started from the doubling path, so defect <= constructive_bound.
SubadditivityReport check_subadditivity(const LagrangianModel& L, double t,
                                        const Vec& y,
                                        const MetricSettings& settings = {},
                                        double velocity_bound = 2.0);

struct SuperadditivityReport {
  double t = 0.0;
  Vec y;
  double m_t = 0.0;
  double m_2t = 0.0;
  /// 2 m(t,0,y) - m(2t,0,2y).
  double defect = 0.0;
  /// action(zeta) + action(zeta') - m(2t,0,2y), present for t > 4(n+4)^2.
  std::optional<double> constructive_bound;
  std::optional<BuragoDecomposition> decomposition;
  std::optional<HalvingResult> halving;
  std::optional<HalvingResult> complement;
  /// 3 C t, present for small t.
  std::optional<double> small_time_bound;
  double residual_t = 0.0;
  double residual_2t = 0.0;
};

/// Measures 2m(t,0,y) - m(2t,0,2y). For large t the halving path is built
/// on a Burago decomposition of the lifted minimizer and on its complement,
/// and both are used as warm starts for m(t,0,y).
SuperadditivityReport check_superadditivity(const LagrangianModel& L, double t,
                                            const Vec& y,
                                            const MetricSettings& settings = {},
                                            double velocity_bound = 2.0);

/// Complementary intervals [0,a_1], [b_1,a_2], ..., [b_k, end] of a
/// decomposition, with zero-length ones dropped.
std::vector<std::pair<double, double>> complement_intervals(
    const std::vector<std::pair<double, double>>& intervals, double start,
    double end);

}  // namespace hjlab
