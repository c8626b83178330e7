#include "hjlab/burago.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "hjlab/errors.hpp"

namespace hjlab {

namespace {

double norm(const Vec& v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

// Right-sided velocity of the piecewise-linear path at s (left-sided at the
// final knot).
Vec velocity_at(const Curve& xi, double s) {
  const Vec& knots = xi.knots();
  auto it = std::upper_bound(knots.begin(), knots.end(), s);
  std::size_t seg = it == knots.begin() ? 0 : static_cast<std::size_t>(it - knots.begin()) - 1;
  seg = std::min(seg, xi.segment_count() - 1);
  return xi.velocity(seg);
}

Vec half_displacement(const Curve& xi) {
  Vec half(static_cast<std::size_t>(xi.dimension()));
  for (std::size_t i = 0; i < half.size(); ++i)
    half[i] = 0.5 * (xi.back()[i] - xi.front()[i]);
  return half;
}

Vec residual_vector(const Curve& xi, const Vec& theta, const Vec& half) {
  Vec r(half.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = -half[i];
  for (std::size_t j = 0; j + 1 < theta.size(); j += 2) {
    const Vec a = xi.at(theta[j]);
    const Vec b = xi.at(theta[j + 1]);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i] - a[i];
  }
  return r;
}

// Solves the small dense system A y = r in place (partial pivoting).
bool solve_dense(std::vector<Vec>& A, Vec& r) {
  const std::size_t d = r.size();
  for (std::size_t c = 0; c < d; ++c) {
    std::size_t piv = c;
    for (std::size_t i = c + 1; i < d; ++i)
      if (std::abs(A[i][c]) > std::abs(A[piv][c])) piv = i;
    if (std::abs(A[piv][c]) < 1e-300) return false;
    std::swap(A[c], A[piv]);
    std::swap(r[c], r[piv]);
    for (std::size_t i = c + 1; i < d; ++i) {
      const double f = A[i][c] / A[c][c];
      for (std::size_t j = c; j < d; ++j) A[i][j] -= f * A[c][j];
      r[i] -= f * r[c];
    }
  }
  for (std::size_t c = d; c-- > 0;) {
    for (std::size_t j = c + 1; j < d; ++j) r[c] -= A[c][j] * r[j];
    r[c] /= A[c][c];
  }
  return true;
}

void project_ordered(Vec& theta, double lo, double hi) {
  for (std::size_t j = 0; j < theta.size(); ++j) {
    theta[j] = std::clamp(theta[j], lo, hi);
    if (j > 0) theta[j] = std::max(theta[j], theta[j - 1]);
  }
}

// Damped Gauss-Newton on the residual, keeping the endpoints ordered.
double refine(const Curve& xi, Vec& theta, const Vec& half) {
  const std::size_t d = half.size();
  const std::size_t p = theta.size();
  Vec r = residual_vector(xi, theta, half);
  double rn = norm(r);
  for (int iter = 0; iter < 200 && rn > 0.0; ++iter) {
    // Jacobian columns: -xi'(a_i), +xi'(b_i).
    std::vector<Vec> J(p);
    for (std::size_t j = 0; j < p; ++j) {
      J[j] = velocity_at(xi, theta[j]);
      if (j % 2 == 0)
        for (double& c : J[j]) c = -c;
    }
    std::vector<Vec> A(d, Vec(d, 0.0));
    double trace = 0.0;
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) {
        for (std::size_t j = 0; j < p; ++j) A[a][b] += J[j][a] * J[j][b];
        if (a == b) trace += A[a][a];
      }
    for (std::size_t a = 0; a < d; ++a) A[a][a] += 1e-14 * (trace + 1e-300);
    Vec y = r;
    if (!solve_dense(A, y)) break;
    Vec step(p, 0.0);
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t a = 0; a < d; ++a) step[j] -= J[j][a] * y[a];

    bool improved = false;
    double alpha = 1.0;
    for (int bt = 0; bt < 40; ++bt) {
      Vec trial = theta;
      for (std::size_t j = 0; j < p; ++j) trial[j] += alpha * step[j];
      project_ordered(trial, xi.start_time(), xi.end_time());
      Vec rt = residual_vector(xi, trial, half);
      const double tn = norm(rt);
      if (tn < rn) {
        theta = std::move(trial);
        r = std::move(rt);
        rn = tn;
        improved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!improved) break;
  }
  return rn;
}

}  // namespace

int burago_max_intervals(int dimension) { return (dimension + 2) / 2; }

BuragoDecomposition measure_decomposition(
    const Curve& xi, std::vector<std::pair<double, double>> intervals) {
  BuragoDecomposition dec;
  const Vec half = half_displacement(xi);
  Vec theta;
  for (const auto& [a, b] : intervals) {
    theta.push_back(a);
    theta.push_back(b);
    dec.duration_sum += b - a;
  }
  dec.residual = norm(residual_vector(xi, theta, half));
  dec.k = static_cast<int>(intervals.size());
  dec.intervals = std::move(intervals);
  return dec;
}

BuragoDecomposition burago_1d(const Curve& xi, double tol) {
  if (xi.dimension() != 1) throw PreconditionError("burago_1d: path must be scalar");
  const double s0 = xi.start_time();
  const double half_T = 0.5 * xi.duration();
  const double half_delta = 0.5 * (xi.back()[0] - xi.front()[0]);
  auto h = [&](double s) { return xi.at(s + half_T)[0] - xi.at(s)[0] - half_delta; };

  double lo = s0, hi = s0 + half_T;
  double h_lo = h(lo);
  double best = lo;
  if (std::abs(h_lo) > 0.0) {
    // h(lo) and h(hi) have opposite signs (they sum to zero).
    double best_abs = std::abs(h_lo);
    for (int iter = 0; iter < 200 && hi - lo > 0.0; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double hm = h(mid);
      if (std::abs(hm) < best_abs) {
        best_abs = std::abs(hm);
        best = mid;
      }
      if (hm == 0.0 || best_abs <= 1e-3 * tol) break;
      if ((hm > 0.0) == (h_lo > 0.0)) {
        lo = mid;
        h_lo = hm;
      } else {
        hi = mid;
      }
    }
    // The last bracket is linear in s up to knots; try its secant root.
    const double h_hi = h(hi);
    if (h_lo != h_hi) {
      const double root = std::clamp(lo - h_lo * (hi - lo) / (h_hi - h_lo), lo, hi);
      if (std::abs(h(root)) < std::abs(h(best))) best = root;
    }
  }
  BuragoDecomposition dec =
      measure_decomposition(xi, {{best, std::min(best + half_T, xi.end_time())}});
  if (dec.residual > tol)
    throw SearchFailure("burago_1d: bisection stalled at residual " +
                        std::to_string(dec.residual));
  return dec;
}

BuragoDecomposition burago_nd(const Curve& xi, double tol, int budget) {
  const int d = xi.dimension();
  if (d < 2) throw PreconditionError("burago_nd: use burago_1d for scalar paths");
  if (budget < 1) throw PreconditionError("burago_nd: budget must be positive");
  const Vec half = half_displacement(xi);
  const double s0 = xi.start_time();
  const double s1 = xi.end_time();
  const auto du = static_cast<std::size_t>(d);

  double best_overall = INFINITY;
  for (int k = 1; k <= burago_max_intervals(d); ++k) {
    const int p = 2 * k;
    // Largest grid whose ordered tuples (multisets of size p) fit the budget.
    auto tuples = [p](int G) {
      double c = 1.0;
      for (int i = 1; i <= p; ++i) c = c * (G - 1 + i) / i;
      return c;
    };
    int G = 2;
    while (G < 512 && tuples(G + 1) <= budget) ++G;

    std::vector<Vec> grid_points(static_cast<std::size_t>(G));
    Vec grid_s(static_cast<std::size_t>(G));
    for (int g = 0; g < G; ++g) {
      grid_s[static_cast<std::size_t>(g)] = s0 + (s1 - s0) * g / (G - 1);
      grid_points[static_cast<std::size_t>(g)] = xi.at(grid_s[static_cast<std::size_t>(g)]);
    }

    constexpr std::size_t kKeep = 24;
    std::vector<std::pair<double, std::vector<int>>> kept;
    std::vector<int> idx(static_cast<std::size_t>(p));
    Vec r(du);
    std::function<void(int, int)> enumerate = [&](int pos, int from) {
      if (pos == p) {
        for (std::size_t i = 0; i < du; ++i) r[i] = -half[i];
        for (int j = 0; j < p; j += 2) {
          const Vec& a = grid_points[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
          const Vec& b = grid_points[static_cast<std::size_t>(idx[static_cast<std::size_t>(j + 1)])];
          for (std::size_t i = 0; i < du; ++i) r[i] += b[i] - a[i];
        }
        const double score = norm(r);
        if (kept.size() < kKeep || score < kept.back().first) {
          auto at = std::lower_bound(
              kept.begin(), kept.end(), score,
              [](const auto& e, double v) { return e.first < v; });
          kept.insert(at, {score, idx});
          if (kept.size() > kKeep) kept.pop_back();
        }
        return;
      }
      for (int g = from; g < G; ++g) {
        idx[static_cast<std::size_t>(pos)] = g;
        enumerate(pos + 1, g);
      }
    };
    enumerate(0, 0);

    for (const auto& [score, cand] : kept) {
      Vec theta(static_cast<std::size_t>(p));
      for (int j = 0; j < p; ++j)
        theta[static_cast<std::size_t>(j)] = grid_s[static_cast<std::size_t>(cand[static_cast<std::size_t>(j)])];
      const double res = refine(xi, theta, half);
      best_overall = std::min(best_overall, res);
      if (res <= tol) {
        std::vector<std::pair<double, double>> intervals;
        for (int j = 0; j < p; j += 2)
          intervals.emplace_back(theta[static_cast<std::size_t>(j)],
                                 theta[static_cast<std::size_t>(j + 1)]);
        return measure_decomposition(xi, std::move(intervals));
      }
    }
  }
  std::ostringstream ss;
  ss << "burago_nd: budget exhausted, best residual " << best_overall << " > tol " << tol;
  throw SearchFailure(ss.str());
}

DecompositionCheck verify_decomposition(const Curve& xi, const BuragoDecomposition& dec,
                                        double tol) {
  DecompositionCheck out;
  const double eps = 1e-12 * std::max(1.0, std::abs(xi.end_time()));
  out.within_domain = true;
  out.disjoint = true;
  for (std::size_t i = 0; i < dec.intervals.size(); ++i) {
    const auto [a, b] = dec.intervals[i];
    if (a < xi.start_time() - eps || b > xi.end_time() + eps) out.within_domain = false;
    if (b < a) out.disjoint = false;
    for (std::size_t j = 0; j < dec.intervals.size(); ++j) {
      if (i == j) continue;
      const auto [c, e] = dec.intervals[j];
      // Interiors must not overlap; shared endpoints are allowed.
      if (std::min(b, e) - std::max(a, c) > eps) out.disjoint = false;
    }
  }
  const int k = static_cast<int>(dec.intervals.size());
  out.count_ok = k >= 1 && k <= burago_max_intervals(xi.dimension());
  out.residual = measure_decomposition(xi, dec.intervals).residual;
  out.passed = out.within_domain && out.disjoint && out.count_ok && out.residual <= tol;
  return out;
}

}  // namespace hjlab
