#pragma once

#include <map>
#include <string>
#include <vector>

#include "hjlab/action.hpp"
#include "hjlab/effective.hpp"
#include "hjlab/model.hpp"

namespace hjlab {

struct ControlOptions {
  /// Search radius |y - x| <= radius * t; 0 picks the coercivity radius.
  double radius = 0.0;
  /// Sup of |g|, used by the automatic radius.
  double g_sup = 1.0;
  /// Coarse y-grid step is epsilon / coarse_per_epsilon.
  int coarse_per_epsilon = 8;
  /// The coarse minimizer is refined on a grid `refine` times finer.
  int refine = 8;
  int workers = 1;
};

struct ControlResult {
  double value = 0.0;
  Vec argmin;
  bool boundary_warning = false;
};

/// u^eps(x, t) = inf_y g(y) + eps m(t/eps; y/eps -> x/eps) on the window
/// [ceil(t/eps) - t/eps, ceil(t/eps)], the integer shift of [-t/eps, 0].
///
/// y runs over a lattice of step eps / (coarse_per_epsilon * refine)
/// anchored at x: first the coarse sub-lattice, then the fine points next
/// to the coarse minimizer. Metric values depend only on the fractional
/// part of x/eps and the lattice displacement, so they are cached and
/// shared between evaluation points. Not thread-safe.
class ControlSolver {
 public:
  ControlSolver(const LagrangianModel& L, InitialDatum g, double epsilon, double t,
                MetricSettings settings = {}, ControlOptions options = {});

  ControlResult evaluate(const Vec& x);
  std::size_t cache_size() const { return cache_.size(); }
  double epsilon() const { return epsilon_; }
  double radius() const { return radius_; }

 private:
  using Key = std::vector<long long>;
  /// eps * m for the displacement `disp` (fine-lattice units) ending at x.
  void fill(const Vec& x, const std::vector<Key>& disps, std::vector<double>& out);

  const LagrangianModel* L_;
  InitialDatum g_;
  double epsilon_;
  double t_;
  MetricSettings settings_;
  ControlOptions options_;
  double radius_;
  double fine_step_;
  std::map<Key, double> cache_;
};

ControlResult solve_control(const LagrangianModel& L, const InitialDatum& g,
                            double epsilon, const Vec& x, double t,
                            const MetricSettings& settings = {},
                            const ControlOptions& options = {});

struct SchemeOptions {
  /// Fixed time step; 0 derives it from the CFL ratio.
  double dt = 0.0;
  double cfl = 0.5;
  /// Number of equally spaced snapshots after t = 0 (the last is T).
  int snapshots = 1;
  /// Dissipation at x_j is theta_margin times the largest |H_p| at the two
  /// one-sided differences.
  double theta_margin = 1.0;
};

struct GridSolution {
  double dx = 0.0;
  double horizon = 0.0;
  /// Largest time step taken.
  double dt = 0.0;
  /// Largest local dissipation coefficient used.
  double theta = 0.0;
  /// Largest realized dt * theta / dx.
  double cfl_ratio = 0.0;
  int steps = 0;
  Vec x;
  /// Snapshot times, starting with 0.
  Vec times;
  std::vector<Vec> values;
  std::vector<std::string> warnings;

  const Vec& final_values() const { return values.back(); }
  /// Periodic linear interpolation of the final snapshot.
  double at(double x) const;
};

/// Periodic local Lax-Friedrichs scheme for u_t + H(x/eps, t/eps, u_x) = 0
/// on [0,1) in one dimension. Requires 1/eps and eps/dx integral.
GridSolution solve_scheme(const HamiltonianModel& H, const InitialDatum& g,
                          double epsilon, double horizon, double dx,
                          const SchemeOptions& options = {});

struct ErrorReport {
  double epsilon = 0.0;
  double sup_error = 0.0;
  Vec location;
  std::size_t index = 0;
  std::string route;
  std::string resolution;
};

/// max_i |a_i - b_i| over the evaluation points. Sizes must agree.
ErrorReport sup_error(const Vec& u_epsilon, const Vec& u_effective,
                      const std::vector<Vec>& eval_points);

/// Points i / count, i = 0 .. count - 1, as 1D vectors.
std::vector<Vec> periodic_grid(int count);

}  // namespace hjlab
