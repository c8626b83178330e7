#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hjlab/curve.hpp"
#include "hjlab/model.hpp"

namespace hjlab {

/// Default resolution for a window of the given length:
/// max(32, ceil(8 * length)) uniform segments.
int default_segments(double window_length);

struct OptimizerOptions {
  double gradient_tol = 1e-7;
  int max_iterations = 10000;
};

struct MetricQuery {
  double t_start = 0.0;
  double t_end = 1.0;
  Vec from;
  Vec to;
  int segments = 32;
  int multistarts = 5;
  std::uint64_t seed = 0;
  OptimizerOptions optimizer;
  /// Extra initial curves (resampled onto the uniform grid before use);
  /// they are tried after the straight line and the randomized detours.
  std::vector<Curve> warm_starts;

  /// Convenience constructor using default_segments().
  static MetricQuery make(double t_start, double t_end, Vec from, Vec to,
                          int multistarts = 5, std::uint64_t seed = 0);
  void validate() const;
};

/// Resolution and multistart settings shared by the experiment modules.
struct MetricSettings {
  /// Uniform segments per unit of window length (at least 2 in total).
  int segments_per_unit = 16;
  int multistarts = 5;
  std::uint64_t seed = 0;
  OptimizerOptions optimizer;

  MetricQuery query(double t_start, double t_end, Vec from, Vec to) const;
};

struct MetricResult {
  double value = 0.0;
  Curve minimizer{{0.0, 1.0}, {0.0, 0.0}, 1};
  int starts_tried = 0;
  int best_start_index = 0;
  /// Max over interior nodes of |dF/dX_k| / ds: the discrete
  /// Euler-Lagrange residual of the returned curve.
  double first_order_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes the discrete action over the interior nodes of a uniform
/// piecewise-linear curve joining q.from (at t_start) to q.to (at t_end).
///
/// The descent direction solves a tridiagonal system built from the
/// segment-wise curvature of L (kinetic part plus the positive part of the
/// spatial curvature), and steps are accepted by Armijo backtracking.
/// Starts: the straight line, then straight lines carrying randomized
/// integer-cell detours, then any warm starts. Returns the best.
MetricResult compute_metric(const LagrangianModel& L, const MetricQuery& q);

struct DpGrid {
  double dx = 1.0 / 256.0;
  double dt = 1.0 / 32.0;
  /// Velocity bound of the transition set; 0 picks 2 |y - x| / T + 2.
  double max_speed = 0.0;
  /// Extra spatial margin (in unit cells) around the endpoints.
  double padding = 2.0;
  /// Transition costs integrate L with midpoint sub-steps no longer than
  /// this, so costs are consistent across nested dyadic lattices.
  double quadrature_step = 1.0 / 128.0;
};

/// Backward value iteration on a space-time lattice anchored at q.from.
/// 1D only. Returns the minimal discrete cost from q.from to q.to.
double dp_metric_oracle(const LagrangianModel& L, const MetricQuery& q,
                        const DpGrid& grid);

/// |m(t,x,y) - m(t,x+w,y+w)| on the window [0, t].
double check_metric_periodicity(const LagrangianModel& L, double t,
                                const Vec& x, const Vec& y, const Vec& w,
                                int multistarts = 5, std::uint64_t seed = 0);

}  // namespace hjlab
