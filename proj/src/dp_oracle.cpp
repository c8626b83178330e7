// Dynamic-programming reference for the travel cost in one dimension.

#include <algorithm>
#include <cmath>
#include <limits>

#include "hjlab/action.hpp"
#include "hjlab/errors.hpp"

namespace hjlab {

namespace {

long long integral_ratio(double num, double den, const char* what) {
  const double r = num / den;
  const long long k = std::llround(r);
  if (std::abs(r - static_cast<double>(k)) > 1e-6)
    throw PreconditionError(std::string("dp_metric_oracle: ") + what +
                            " is not a multiple of the lattice spacing");
  return k;
}

}  // namespace

double dp_metric_oracle(const LagrangianModel& L, const MetricQuery& q,
                        const DpGrid& grid) {
  if (L.dimension() != 1 || q.from.size() != 1)
    throw UnsupportedError("dp_metric_oracle supports dimension 1 only");
  q.validate();
  if (!(grid.dx > 0.0 && grid.dx <= 1.0 / 32.0 + 1e-15) ||
      !(grid.dt > 0.0 && grid.dt <= 1.0 / 32.0 + 1e-15))
    throw PreconditionError("dp_metric_oracle: need 0 < dx, dt <= 1/32");

  const double T = q.t_end - q.t_start;
  const long long steps = integral_ratio(T, grid.dt, "window length");
  const double x0 = q.from[0];
  const long long target = integral_ratio(q.to[0] - x0, grid.dx, "displacement");

  const double speed =
      grid.max_speed > 0.0 ? grid.max_speed : 2.0 * std::abs(q.to[0] - x0) / T + 2.0;
  const auto kmax = static_cast<long long>(std::ceil(speed * grid.dt / grid.dx - 1e-9));
  const auto pad = static_cast<long long>(std::ceil(grid.padding / grid.dx));
  const long long lo = std::min(0LL, target) - pad;
  const long long hi = std::max(0LL, target) + pad;
  const auto width = static_cast<std::size_t>(hi - lo + 1);

  const int substeps =
      std::max(1, static_cast<int>(std::lround(grid.dt / std::min(grid.dt, grid.quadrature_step))));
  const double sub = grid.dt / substeps;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> value(width, kInf), next(width, kInf);
  value[static_cast<std::size_t>(target - lo)] = 0.0;

  double x[1], v[1];
  for (long long step = steps - 1; step >= 0; --step) {
    const double t_n = q.t_start + static_cast<double>(step) * grid.dt;
    // Columns reachable from the start by time t_n and able to reach the
    // target in the remaining time.
    const long long reach_from = static_cast<long long>(step) * kmax;
    const long long reach_to = (steps - step) * kmax;
    const long long j_lo = std::max({lo, -reach_from, target - reach_to});
    const long long j_hi = std::min({hi, reach_from, target + reach_to});
    std::fill(next.begin(), next.end(), kInf);
    for (long long j = j_lo; j <= j_hi; ++j) {
      const double xj = x0 + static_cast<double>(j) * grid.dx;
      double best = kInf;
      for (long long k = -kmax; k <= kmax; ++k) {
        const long long dest = j + k;
        if (dest < lo || dest > hi) continue;
        const double tail = value[static_cast<std::size_t>(dest - lo)];
        if (tail == kInf) continue;
        v[0] = static_cast<double>(k) * grid.dx / grid.dt;
        double cost = 0.0;
        for (int s = 0; s < substeps; ++s) {
          const double tau = (s + 0.5) * sub;
          x[0] = xj + v[0] * tau;
          cost += sub * L(x, t_n + tau, v);
        }
        best = std::min(best, cost + tail);
      }
      next[static_cast<std::size_t>(j - lo)] = best;
    }
    value.swap(next);
  }
  const double result = value[static_cast<std::size_t>(-lo)];
  if (!std::isfinite(result))
    throw PreconditionError("dp_metric_oracle: target unreachable with the velocity bound");
  return result;
}

}  // namespace hjlab
