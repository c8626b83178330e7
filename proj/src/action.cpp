#include "hjlab/action.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "hjlab/errors.hpp"

namespace hjlab {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Discrete action over a uniform grid. X holds all N+1 nodes (endpoints
// included), row-major by node.
class DiscreteAction {
 public:
  DiscreteAction(const LagrangianModel& L, double t0, double h, int N, int n)
      : L_(L), t0_(t0), h_(h), N_(N), n_(static_cast<std::size_t>(n)),
        mid_(n_), vel_(n_), gx_(n_), gv_(n_), cxx_(n_), cvv_(n_) {}

  double value(const Vec& X) {
    double total = 0.0;
    for (int k = 0; k < N_; ++k) {
      load_segment(X, k);
      total += h_ * L_(mid_, tau(k), vel_);
    }
    return total;
  }

  // Gradient with respect to interior nodes (endpoints get zero).
  void gradient(const Vec& X, Vec& g) {
    std::fill(g.begin(), g.end(), 0.0);
    for (int k = 0; k < N_; ++k) {
      load_segment(X, k);
      L_.gradient(mid_, tau(k), vel_, gx_, gv_);
      const auto a = static_cast<std::size_t>(k) * n_;
      const std::size_t b = a + n_;
      for (std::size_t i = 0; i < n_; ++i) {
        g[a + i] += 0.5 * h_ * gx_[i] - gv_[i];
        g[b + i] += 0.5 * h_ * gx_[i] + gv_[i];
      }
    }
    for (std::size_t i = 0; i < n_; ++i) {
      g[i] = 0.0;
      g[static_cast<std::size_t>(N_) * n_ + i] = 0.0;
    }
  }

  // Per-segment curvature weights: kinetic a_k (from L_vv) and L_xx.
  void weights(const Vec& X, Vec& kinetic, Vec& spatial) {
    for (int k = 0; k < N_; ++k) {
      load_segment(X, k);
      L_.curvature(mid_, tau(k), vel_, cxx_, cvv_);
      for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t idx = static_cast<std::size_t>(k) * n_ + i;
        double a = cvv_[i];
        if (!std::isfinite(a)) a = 1e6;
        kinetic[idx] = std::clamp(a, 1e-6, 1e6);
        spatial[idx] = std::isfinite(cxx_[i]) ? cxx_[i] : 0.0;
      }
    }
  }

 private:
  double tau(int k) const { return t0_ + (k + 0.5) * h_; }

  void load_segment(const Vec& X, int k) {
    const auto a = static_cast<std::size_t>(k) * n_;
    for (std::size_t i = 0; i < n_; ++i) {
      mid_[i] = 0.5 * (X[a + i] + X[a + n_ + i]);
      vel_[i] = (X[a + n_ + i] - X[a + i]) / h_;
    }
  }

  const LagrangianModel& L_;
  double t0_, h_;
  int N_;
  std::size_t n_;
  Vec mid_, vel_, gx_, gv_, cxx_, cvv_;
};

struct RunOutcome {
  Vec X;
  double value;
  double residual;
  int iterations;
  bool converged;
};

std::string describe(const MetricQuery& q) {
  std::ostringstream ss;
  ss << "window [" << q.t_start << ", " << q.t_end << "], N=" << q.segments;
  return ss.str();
}

RunOutcome descend(DiscreteAction& F, Vec X, int N, std::size_t n, double h,
                   const MetricQuery& q) {
  const std::size_t total = X.size();
  Vec g(total), d(total), trial(total), kinetic(static_cast<std::size_t>(N) * n),
      spatial(static_cast<std::size_t>(N) * n);
  const std::size_t m = static_cast<std::size_t>(N) - 1;  // interior nodes
  Vec diag(m), off(m), rhs(m), cprime(m), dprime(m);

  double f = F.value(X);
  if (!std::isfinite(f))
    throw DivergenceError("compute_metric: non-finite initial action (" + describe(q) + ")");

  auto residual_of = [&](const Vec& grad) {
    double r = 0.0;
    for (std::size_t j = n; j < total - n; ++j) r = std::max(r, std::abs(grad[j]));
    return r / h;
  };

  int it = 0;
  int stalled = 0;
  double residual = 0.0;
  bool converged = false;
  for (;; ++it) {
    F.gradient(X, g);
    residual = residual_of(g);
    if (!std::isfinite(residual))
      throw DivergenceError("compute_metric: non-finite gradient (" + describe(q) + ")");
    if (residual <= q.optimizer.gradient_tol) {
      converged = true;
      break;
    }
    if (it >= q.optimizer.max_iterations) break;

    F.weights(X, kinetic, spatial);
    // One tridiagonal solve per coordinate: Newton with the exact segment
    // curvature when that system is positive definite, otherwise with the
    // negative spatial curvature dropped.
    for (std::size_t i = 0; i < n; ++i) {
      for (int attempt = 0; attempt < 2; ++attempt) {
        const bool clamp = attempt == 1;
        for (std::size_t j = 0; j < m; ++j) {
          const std::size_t node = j + 1;
          const double a_left = kinetic[(node - 1) * n + i];
          const double a_right = kinetic[node * n + i];
          double b_left = spatial[(node - 1) * n + i];
          double b_right = spatial[node * n + i];
          if (clamp) {
            b_left = std::max(0.0, b_left);
            b_right = std::max(0.0, b_right);
          }
          diag[j] = (a_left + a_right) / h + 0.25 * h * (b_left + b_right);
          off[j] = -a_right / h + 0.25 * h * b_right;  // couples node, node+1
          rhs[j] = -g[node * n + i];
        }
        // Thomas algorithm; a non-positive pivot means the system is not SPD.
        bool definite = diag[0] > 0.0;
        cprime[0] = off[0] / diag[0];
        dprime[0] = rhs[0] / diag[0];
        for (std::size_t j = 1; j < m && definite; ++j) {
          const double denom = diag[j] - off[j - 1] * cprime[j - 1];
          definite = denom > 1e-12 * std::abs(diag[j]);
          cprime[j] = off[j] / denom;
          dprime[j] = (rhs[j] - off[j - 1] * dprime[j - 1]) / denom;
        }
        if (!definite && !clamp) continue;
        for (std::size_t j = m; j-- > 0;) {
          const double next = j + 1 < m ? d[(j + 2) * n + i] : 0.0;
          d[(j + 1) * n + i] = dprime[j] - cprime[j] * next;
        }
        break;
      }
      d[i] = 0.0;
      d[static_cast<std::size_t>(N) * n + i] = 0.0;
    }

    double slope = 0.0;
    for (std::size_t j = 0; j < total; ++j) slope += g[j] * d[j];
    if (!(slope < 0.0)) {
      // Preconditioner lost definiteness numerically; fall back to -g.
      for (std::size_t j = 0; j < total; ++j) d[j] = -g[j] * h;
      slope = 0.0;
      for (std::size_t j = 0; j < total; ++j) slope += g[j] * d[j];
    }

    double step = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t j = 0; j < total; ++j) trial[j] = X[j] + step * d[j];
      const double ft = F.value(trial);
      if (std::isfinite(ft) && ft <= f + 1e-4 * step * slope) {
        X.swap(trial);
        stalled = ft < f - 1e-15 * (1.0 + std::abs(f)) ? 0 : stalled + 1;
        f = ft;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || stalled >= 3) break;  // stalled at round-off level
  }
  if (!std::isfinite(f))
    throw DivergenceError("compute_metric: non-finite action (" + describe(q) + ")");
  return RunOutcome{std::move(X), f, residual, it, converged};
}

}  // namespace

int default_segments(double window_length) {
  return std::max(32, static_cast<int>(std::ceil(8.0 * window_length - 1e-9)));
}

MetricQuery MetricQuery::make(double t_start, double t_end, Vec from, Vec to,
                              int multistarts, std::uint64_t seed) {
  MetricQuery q;
  q.t_start = t_start;
  q.t_end = t_end;
  q.from = std::move(from);
  q.to = std::move(to);
  q.segments = default_segments(t_end - t_start);
  q.multistarts = multistarts;
  q.seed = seed;
  return q;
}

MetricQuery MetricSettings::query(double t_start, double t_end, Vec from,
                                  Vec to) const {
  MetricQuery q;
  q.t_start = t_start;
  q.t_end = t_end;
  q.from = std::move(from);
  q.to = std::move(to);
  q.segments = std::max(
      2, static_cast<int>(std::ceil(segments_per_unit * (t_end - t_start) - 1e-9)));
  q.multistarts = multistarts;
  q.seed = seed;
  q.optimizer = optimizer;
  return q;
}

void MetricQuery::validate() const {
  if (!(t_end - t_start > 0.0) || !std::isfinite(t_start) || !std::isfinite(t_end))
    throw PreconditionError("MetricQuery: window must satisfy t_end > t_start");
  if (segments < 2) throw PreconditionError("MetricQuery: segments must be >= 2");
  if (multistarts < 1) throw PreconditionError("MetricQuery: multistarts must be >= 1");
  if (from.empty() || from.size() != to.size())
    throw PreconditionError("MetricQuery: endpoint dimensions differ");
  for (double c : from)
    if (!std::isfinite(c)) throw PreconditionError("MetricQuery: non-finite endpoint");
  for (double c : to)
    if (!std::isfinite(c)) throw PreconditionError("MetricQuery: non-finite endpoint");
}

MetricResult compute_metric(const LagrangianModel& L, const MetricQuery& q) {
  q.validate();
  const auto n = q.from.size();
  if (n != static_cast<std::size_t>(L.dimension()))
    throw PreconditionError("compute_metric: endpoint dimension does not match model");
  const int N = q.segments;
  const double T = q.t_end - q.t_start;
  const double h = T / N;
  const std::size_t total = (static_cast<std::size_t>(N) + 1) * n;

  Vec line(total);
  for (int k = 0; k <= N; ++k) {
    const double f = static_cast<double>(k) / N;
    for (std::size_t i = 0; i < n; ++i)
      line[static_cast<std::size_t>(k) * n + i] =
          k == N ? q.to[i] : q.from[i] + f * (q.to[i] - q.from[i]);
  }

  std::vector<Vec> starts{line};
  // Integer-cell detours: a block of interior nodes pushed one cell along a
  // random axis, with ramps about one time unit long.
  const int ramp = std::max(1, static_cast<int>(std::lround(1.0 / h)));
  for (int s = 1; s < q.multistarts; ++s) {
    std::uint64_t key = splitmix(q.seed);
    key = splitmix(key ^ static_cast<std::uint64_t>(N));
    key = splitmix(key ^ static_cast<std::uint64_t>(std::llround(T * 1024.0)));
    key = splitmix(key ^ static_cast<std::uint64_t>(s));
    std::mt19937_64 rng(key);
    std::uniform_int_distribution<int> first_dist(1, N - 1);
    const int first = first_dist(rng);
    std::uniform_int_distribution<int> last_dist(first, N - 1);
    const int last = last_dist(rng);
    std::uniform_int_distribution<std::size_t> axis_dist(0, n - 1);
    const std::size_t axis = axis_dist(rng);
    const double sign = (rng() & 1U) ? 1.0 : -1.0;
    Vec X = line;
    for (int j = first; j <= last; ++j) {
      const double up = static_cast<double>(j - first + 1) / ramp;
      const double down = static_cast<double>(last - j + 1) / ramp;
      X[static_cast<std::size_t>(j) * n + axis] += sign * std::min({1.0, up, down});
    }
    starts.push_back(std::move(X));
  }
  for (const Curve& warm : q.warm_starts) {
    if (warm.dimension() != static_cast<int>(n))
      throw PreconditionError("compute_metric: warm start dimension mismatch");
    Vec X = line;
    for (int k = 1; k < N; ++k) {
      const double s = warm.start_time() + warm.duration() * k / N;
      const Vec p = warm.at(s);
      for (std::size_t i = 0; i < n; ++i) X[static_cast<std::size_t>(k) * n + i] = p[i];
    }
    starts.push_back(std::move(X));
  }

  DiscreteAction F(L, q.t_start, h, N, static_cast<int>(n));
  int best_index = -1;
  RunOutcome best{{}, std::numeric_limits<double>::infinity(), 0.0, 0, false};
  for (std::size_t s = 0; s < starts.size(); ++s) {
    RunOutcome r = descend(F, starts[s], N, n, h, q);
    if (r.value < best.value) {
      best = std::move(r);
      best_index = static_cast<int>(s);
    }
  }

  Vec knots(static_cast<std::size_t>(N) + 1);
  for (int k = 0; k <= N; ++k)
    knots[static_cast<std::size_t>(k)] = k == N ? q.t_end : q.t_start + k * h;
  Curve curve(std::move(knots), std::move(best.X), static_cast<int>(n));
  MetricResult result;
  result.value = action_of_curve(L, curve);
  result.minimizer = std::move(curve);
  result.starts_tried = static_cast<int>(starts.size());
  result.best_start_index = best_index;
  result.first_order_residual = best.residual;
  result.iterations = best.iterations;
  result.converged = best.converged;
  return result;
}

double check_metric_periodicity(const LagrangianModel& L, double t, const Vec& x,
                                const Vec& y, const Vec& w, int multistarts,
                                std::uint64_t seed) {
  if (!(t > 0.0)) throw PreconditionError("check_metric_periodicity: t must be positive");
  if (w.size() != x.size()) throw PreconditionError("check_metric_periodicity: bad shift");
  Vec xs = x, ys = y;
  for (std::size_t i = 0; i < w.size(); ++i) {
    xs[i] += w[i];
    ys[i] += w[i];
  }
  const auto a = compute_metric(L, MetricQuery::make(0.0, t, x, y, multistarts, seed));
  const auto b = compute_metric(L, MetricQuery::make(0.0, t, xs, ys, multistarts, seed));
  return std::abs(a.value - b.value);
}

}  // namespace hjlab
