#include "hjlab/pde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hjlab/errors.hpp"
#include "hjlab/parallel.hpp"

namespace hjlab {

namespace {

constexpr double kFracScale = 1073741824.0;  // 2^30

long long checked_integer(double value, const char* what) {
  const long long k = std::llround(value);
  if (k <= 0 || std::abs(value - static_cast<double>(k)) > 1e-9 * std::max(1.0, value))
    throw PreconditionError(std::string(what) + " must be a positive integer");
  return k;
}

}  // namespace

ControlSolver::ControlSolver(const LagrangianModel& L, InitialDatum g, double epsilon,
                             double t, MetricSettings settings, ControlOptions options)
    : L_(&L),
      g_(std::move(g)),
      epsilon_(epsilon),
      t_(t),
      settings_(settings),
      options_(options) {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw PreconditionError("solve_control: epsilon must lie in (0, 1]");
  if (!(t > 0.0)) throw PreconditionError("solve_control: t must be positive");
  if (options_.coarse_per_epsilon < 1 || options_.refine < 1)
    throw PreconditionError("solve_control: grid factors must be positive");
  radius_ = options_.radius > 0.0 ? options_.radius
                                  : coercivity_speed(L.growth(), options_.g_sup, t);
  fine_step_ = epsilon_ / (options_.coarse_per_epsilon * options_.refine);
}

void ControlSolver::fill(const Vec& x, const std::vector<Key>& disps, std::vector<double>& out) {
  const std::size_t n = x.size();
  // Key prefix: the fractional part of x/eps, quantized.
  Key prefix(n);
  Vec frac(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = x[i] / epsilon_;
    prefix[i] = std::llround((s - std::floor(s)) * kFracScale);
    frac[i] = static_cast<double>(prefix[i]) / kFracScale;
  }
  std::vector<Key> keys(disps.size());
  std::vector<std::size_t> missing;
  for (std::size_t k = 0; k < disps.size(); ++k) {
    keys[k] = prefix;
    keys[k].insert(keys[k].end(), disps[k].begin(), disps[k].end());
    if (!cache_.count(keys[k])) missing.push_back(k);
  }
  // Windows are shifted by an integer to [N - t/eps, N].
  const double T = t_ / epsilon_;
  const double N = std::ceil(T - 1e-9);
  const double per_unit = 1.0 / (options_.coarse_per_epsilon * options_.refine);
  std::vector<double> computed(missing.size());
  parallel_for(missing.size(), options_.workers, [&](std::size_t m) {
    const Key& d = disps[missing[m]];
    Vec from(n), to = frac;
    for (std::size_t i = 0; i < n; ++i) from[i] = frac[i] - static_cast<double>(d[i]) * per_unit;
    const MetricResult r = compute_metric(*L_, settings_.query(N - T, N, from, to));
    computed[m] = epsilon_ * r.value;
  });
  for (std::size_t m = 0; m < missing.size(); ++m) cache_[keys[missing[m]]] = computed[m];
  out.resize(disps.size());
  for (std::size_t k = 0; k < disps.size(); ++k) out[k] = cache_.at(keys[k]);
}

ControlResult ControlSolver::evaluate(const Vec& x) {
  const std::size_t n = x.size();
  if (static_cast<int>(n) != L_->dimension())
    throw PreconditionError("solve_control: x has the wrong dimension");
  const long long refine = options_.refine;
  const double coarse_step = fine_step_ * static_cast<double>(refine);
  const auto kc = static_cast<long long>(std::floor(radius_ * t_ / coarse_step + 1e-9));

  auto tensor = [n](long long lo_count, long long hi_count, const Key& center, long long stride,
                    long long limit) {
    std::vector<Key> out;
    Key cur(n);
    std::size_t total = 1;
    const auto width = static_cast<std::size_t>(hi_count - lo_count + 1);
    for (std::size_t i = 0; i < n; ++i) total *= width;
    for (std::size_t f = 0; f < total; ++f) {
      std::size_t rem = f;
      bool inside = true;
      for (std::size_t i = n; i-- > 0;) {
        cur[i] = center[i] + stride * (lo_count + static_cast<long long>(rem % width));
        rem /= width;
        if (std::llabs(cur[i]) > limit) inside = false;
      }
      if (inside) out.push_back(cur);
    }
    return out;
  };

  auto value_of = [&](const Key& d, double metric_part) {
    Vec y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - static_cast<double>(d[i]) * fine_step_;
    return std::make_pair(g_(y) + metric_part, y);
  };

  // Jensen on L >= alpha |v|^m - K gives eps m >= t (alpha (|y-x|/t)^m - K)
  // for the discrete action as well; candidates whose bound cannot beat the
  // incumbent are skipped. Best-first order keeps the skipped set small.
  const GrowthBounds& gb = L_->growth();
  auto lower_bound = [&](const Key& d, double gy) {
    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) r2 += std::pow(static_cast<double>(d[i]) * fine_step_, 2);
    return gy + t_ * (gb.alpha * std::pow(std::sqrt(r2) / t_, gb.m) - gb.K);
  };

  ControlResult out;
  out.value = INFINITY;
  Key best(n, 0);
  auto search = [&](const std::vector<Key>& cands) {
    std::vector<double> lb(cands.size());
    std::vector<std::size_t> order(cands.size());
    for (std::size_t k = 0; k < cands.size(); ++k) {
      lb[k] = lower_bound(cands[k], value_of(cands[k], 0.0).first);
      order[k] = k;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return lb[a] < lb[b]; });
    constexpr std::size_t kBatch = 32;
    std::vector<Key> batch;
    std::vector<double> metric;
    for (std::size_t pos = 0; pos < order.size();) {
      if (lb[order[pos]] >= out.value) break;
      batch.clear();
      for (; pos < order.size() && batch.size() < kBatch; ++pos) batch.push_back(cands[order[pos]]);
      fill(x, batch, metric);
      for (std::size_t k = 0; k < batch.size(); ++k) {
        const auto [v, y] = value_of(batch[k], metric[k]);
        if (v < out.value || (v == out.value && batch[k] < best)) {
          out.value = v;
          out.argmin = y;
          best = batch[k];
        }
      }
    }
  };

  search(tensor(-kc, kc, Key(n, 0), refine, kc * refine));
  for (std::size_t i = 0; i < n; ++i)
    if (std::llabs(best[i]) == kc * refine) out.boundary_warning = true;
  search(tensor(-refine, refine, best, 1, kc * refine));
  return out;
}

ControlResult solve_control(const LagrangianModel& L, const InitialDatum& g, double epsilon,
                            const Vec& x, double t, const MetricSettings& settings,
                            const ControlOptions& options) {
  ControlSolver solver(L, g, epsilon, t, settings, options);
  return solver.evaluate(x);
}

// ---------------------------------------------------------------------------

double GridSolution::at(double xq) const {
  const Vec& u = final_values();
  const double s = (xq - std::floor(xq)) / dx;
  const auto J = static_cast<long long>(u.size());
  const auto j = static_cast<long long>(std::floor(s));
  const double f = s - static_cast<double>(j);
  const auto a = static_cast<std::size_t>(((j % J) + J) % J);
  const auto b = static_cast<std::size_t>((((j + 1) % J) + J) % J);
  return (1.0 - f) * u[a] + f * u[b];
}

GridSolution solve_scheme(const HamiltonianModel& H, const InitialDatum& g, double epsilon,
                          double horizon, double dx, const SchemeOptions& options) {
  if (H.dimension() != 1) throw UnsupportedError("solve_scheme supports dimension 1 only");
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw PreconditionError("solve_scheme: epsilon must lie in (0, 1]");
  if (!(horizon > 0.0)) throw PreconditionError("solve_scheme: horizon must be positive");
  if (!(dx > 0.0)) throw PreconditionError("solve_scheme: dx must be positive");
  checked_integer(1.0 / epsilon, "solve_scheme: 1/epsilon");
  checked_integer(epsilon / dx, "solve_scheme: epsilon/dx");
  if (!(options.cfl > 0.0 && options.cfl <= 0.5))
    throw ConfigError("solve_scheme: CFL ratio must lie in (0, 1/2]");
  if (options.snapshots < 1) throw ConfigError("solve_scheme: snapshots must be >= 1");

  const auto J = static_cast<std::size_t>(std::llround(1.0 / dx));
  GridSolution sol;
  sol.dx = dx;
  sol.horizon = horizon;
  Vec u(J);
  for (std::size_t j = 0; j < J; ++j) {
    sol.x.push_back(static_cast<double>(j) * dx);
    u[j] = g({sol.x.back()});
  }
  sol.times.push_back(0.0);
  sol.values.push_back(u);

  // Local dissipation: theta_j bounds |H_p| between the one-sided
  // differences at x_j (the endpoints suffice by convexity).
  const GrowthBounds& gb = H.growth();
  const double theta_floor = gb.beta0 * gb.m0;
  auto slope_bound = [&](const double (&xs)[1], double tau, double p) {
    const double h = 1e-6 * std::max(1.0, std::abs(p));
    const double lo[1] = {p - h}, hi[1] = {p + h};
    return std::abs(H(xs, tau, hi) - H(xs, tau, lo)) / (2.0 * h);
  };
  Vec theta(J);
  auto dissipation = [&](const Vec& v, double tau) {
    double top = theta_floor;
    for (std::size_t j = 0; j < J; ++j) {
      const double xs[1] = {sol.x[j] / epsilon};
      const double a = (v[j] - v[(j + J - 1) % J]) / dx;
      const double b = (v[(j + 1) % J] - v[j]) / dx;
      theta[j] = options.theta_margin *
                 std::max(slope_bound(xs, tau, a), slope_bound(xs, tau, b));
      top = std::max(top, theta[j]);
    }
    return top;
  };

  Vec next(J);
  double t = 0.0;
  double pzero[1] = {0.0};
  for (int snap = 1; snap <= options.snapshots; ++snap) {
    const double target = horizon * snap / options.snapshots;
    while (t < target - 1e-14 * std::max(1.0, horizon)) {
      const double tau = t / epsilon;
      const double top = dissipation(u, tau);
      double step = options.cfl * dx / top;
      if (options.dt > 0.0) {
        if (options.dt * top / dx > options.cfl + 1e-12) {
          std::ostringstream ss;
          ss << "solve_scheme: dt = " << options.dt << " violates the CFL bound dt * theta / dx <= "
             << options.cfl << " (theta = " << top << " at t = " << t << ")";
          throw ConfigError(ss.str());
        }
        step = options.dt;
      }
      const double dt = std::min(step, target - t);
      double old_max = 0.0, h_zero = 0.0, new_max = 0.0;
      for (std::size_t j = 0; j < J; ++j) {
        const double xs[1] = {sol.x[j] / epsilon};
        const double p[1] = {(u[(j + 1) % J] - u[(j + J - 1) % J]) / (2.0 * dx)};
        const double lap = u[(j + 1) % J] - 2.0 * u[j] + u[(j + J - 1) % J];
        next[j] = u[j] - dt * (H(xs, tau, p) - theta[j] * lap / (2.0 * dx));
        old_max = std::max(old_max, std::abs(u[j]));
        h_zero = std::max(h_zero, std::abs(H(xs, tau, pzero)));
        if (!std::isfinite(next[j]))
          throw DivergenceError("solve_scheme: non-finite value at x = " + std::to_string(sol.x[j]));
        new_max = std::max(new_max, std::abs(next[j]));
      }
      if (new_max > old_max + dt * h_zero + 1e-12 * (1.0 + old_max)) {
        std::ostringstream ss;
        ss << "solve_scheme: barrier violated at t = " << t << ": " << new_max << " > "
           << old_max << " + " << dt << " * " << h_zero;
        throw DivergenceError(ss.str());
      }
      sol.theta = std::max(sol.theta, top);
      sol.cfl_ratio = std::max(sol.cfl_ratio, dt * top / dx);
      sol.dt = std::max(sol.dt, dt);
      u.swap(next);
      t += dt;
      ++sol.steps;
    }
    t = target;
    sol.times.push_back(t);
    sol.values.push_back(u);
  }
  return sol;
}

// ---------------------------------------------------------------------------

ErrorReport sup_error(const Vec& u_epsilon, const Vec& u_effective,
                      const std::vector<Vec>& eval_points) {
  if (u_epsilon.size() != u_effective.size() || u_epsilon.size() != eval_points.size())
    throw PreconditionError("sup_error: solutions are not on the same evaluation grid");
  ErrorReport rep;
  for (std::size_t i = 0; i < u_epsilon.size(); ++i) {
    const double e = std::abs(u_epsilon[i] - u_effective[i]);
    if (e > rep.sup_error || i == 0) {
      rep.sup_error = e;
      rep.index = i;
    }
  }
  if (!eval_points.empty()) rep.location = eval_points[rep.index];
  return rep;
}

std::vector<Vec> periodic_grid(int count) {
  if (count < 1) throw PreconditionError("periodic_grid: count must be positive");
  std::vector<Vec> pts;
  for (int i = 0; i < count; ++i) pts.push_back({static_cast<double>(i) / count});
  return pts;
}

}  // namespace hjlab
