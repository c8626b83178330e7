#include "hjlab/effective.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "hjlab/errors.hpp"
#include "hjlab/parallel.hpp"

namespace hjlab {

HomogenizedResult homogenized_metric(const LagrangianModel& L, const Vec& q, int levels,
                                     const MetricSettings& settings, double t) {
  if (levels < 2) throw PreconditionError("homogenized_metric: levels must be >= 2");
  if (!(t > 0.0)) throw PreconditionError("homogenized_metric: t must be positive");
  if (static_cast<int>(q.size()) != L.dimension())
    throw PreconditionError("homogenized_metric: q has the wrong dimension");
  HomogenizedResult out;
  const Vec origin(q.size(), 0.0);
  for (int j = 0; j <= levels; ++j) {
    const double scale = std::ldexp(1.0, j);
    Vec y = q;
    for (double& c : y) c *= scale * t;
    const MetricResult r = compute_metric(L, settings.query(0.0, scale * t, origin, y));
    out.level_values.push_back(r.value / scale / t);
    if (j > 0) out.residuals.push_back(out.level_values[static_cast<std::size_t>(j)] -
                                       out.level_values[static_cast<std::size_t>(j - 1)]);
  }
  const auto L_last = static_cast<std::size_t>(levels);
  out.value = 2.0 * out.level_values[L_last] - out.level_values[L_last - 1];
  return out;
}

// ---------------------------------------------------------------------------

TensorGrid TensorGrid::uniform(int dim, double lo, double hi, int points) {
  if (dim < 1 || points < 2 || !(hi > lo))
    throw PreconditionError("TensorGrid::uniform: need dim >= 1, points >= 2, hi > lo");
  TensorGrid g;
  g.dim = dim;
  for (int i = 0; i < points; ++i) g.axis.push_back(lo + (hi - lo) * i / (points - 1));
  return g;
}

std::size_t TensorGrid::size() const {
  std::size_t s = 1;
  for (int i = 0; i < dim; ++i) s *= axis.size();
  return s;
}

std::vector<int> TensorGrid::index(std::size_t flat_index) const {
  std::vector<int> idx(static_cast<std::size_t>(dim));
  for (int i = dim - 1; i >= 0; --i) {
    idx[static_cast<std::size_t>(i)] = static_cast<int>(flat_index % axis.size());
    flat_index /= axis.size();
  }
  return idx;
}

std::size_t TensorGrid::flat(const std::vector<int>& idx) const {
  std::size_t f = 0;
  for (int i : idx) f = f * axis.size() + static_cast<std::size_t>(i);
  return f;
}

Vec TensorGrid::point(std::size_t flat_index) const {
  const auto idx = index(flat_index);
  Vec p(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) p[i] = axis[static_cast<std::size_t>(idx[i])];
  return p;
}

double TensorGrid::interpolate(const Vec& values, const Vec& q) const {
  const auto d = static_cast<std::size_t>(dim);
  std::vector<int> base(d);
  Vec frac(d);
  const int last = static_cast<int>(axis.size()) - 2;
  for (std::size_t i = 0; i < d; ++i) {
    const double x = std::clamp(q[i], lo(), hi());
    const double h = axis[1] - axis[0];
    int k = std::clamp(static_cast<int>(std::floor((x - lo()) / h)), 0, last);
    base[i] = k;
    frac[i] = (x - axis[static_cast<std::size_t>(k)]) / h;
  }
  double sum = 0.0;
  std::vector<int> idx(d);
  for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
    double w = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      const bool up = (corner >> i) & 1U;
      idx[i] = base[i] + (up ? 1 : 0);
      w *= up ? frac[i] : 1.0 - frac[i];
    }
    if (w != 0.0) sum += w * values[flat(idx)];
  }
  return sum;
}

// ---------------------------------------------------------------------------

EffectiveLagrangianTable effective_lagrangian(const LagrangianModel& L, const TensorGrid& grid,
                                              int levels, const MetricSettings& settings,
                                              int workers) {
  if (grid.dim != L.dimension())
    throw PreconditionError("effective_lagrangian: grid dimension differs from the model");
  EffectiveLagrangianTable tab;
  tab.grid = grid;
  tab.levels = levels;
  tab.values.assign(grid.size(), 0.0);
  tab.residuals.assign(grid.size(), 0.0);
  parallel_for(grid.size(), workers, [&](std::size_t i) {
    const HomogenizedResult r = homogenized_metric(L, grid.point(i), levels, settings);
    tab.values[i] = r.value;
    tab.residuals[i] = r.residuals.back();
  });
  return tab;
}

double convexity_violation(const TensorGrid& grid, const Vec& values) {
  double worst = 0.0;
  const int n = static_cast<int>(grid.axis.size());
  for (std::size_t f = 0; f < grid.size(); ++f) {
    auto idx = grid.index(f);
    for (std::size_t a = 0; a < idx.size(); ++a) {
      if (idx[a] == 0 || idx[a] == n - 1) continue;
      auto lo = idx, hi = idx;
      --lo[a];
      ++hi[a];
      const double gap = 0.5 * (values[grid.flat(lo)] + values[grid.flat(hi)]) - values[f];
      worst = std::max(worst, -gap);
    }
  }
  return worst;
}

double growth_violation(const EffectiveLagrangianTable& tab, const GrowthBounds& g) {
  double worst = 0.0;
  for (std::size_t f = 0; f < tab.grid.size(); ++f) {
    const Vec q = tab.grid.point(f);
    double r = 0.0;
    for (double c : q) r += c * c;
    const double pw = std::pow(std::sqrt(r), g.m);
    worst = std::max({worst, g.alpha * pw - g.K - tab.values[f],
                      tab.values[f] - g.beta * pw - g.K});
  }
  return worst;
}

EffectiveHamiltonianTable effective_hamiltonian(const EffectiveLagrangianTable& tab,
                                                const TensorGrid& p_grid) {
  if (p_grid.dim != tab.grid.dim)
    throw PreconditionError("effective_hamiltonian: grid dimensions differ");
  EffectiveHamiltonianTable out;
  out.grid = p_grid;
  const TensorGrid& qg = tab.grid;
  const int nq = static_cast<int>(qg.axis.size());
  for (std::size_t fp = 0; fp < p_grid.size(); ++fp) {
    const Vec p = p_grid.point(fp);
    auto objective = [&](std::size_t fq) {
      const Vec q = qg.point(fq);
      double dot = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) dot += p[i] * q[i];
      return dot - tab.values[fq];
    };
    std::size_t best = 0;
    double best_val = -INFINITY;
    for (std::size_t fq = 0; fq < qg.size(); ++fq) {
      const double v = objective(fq);
      if (v > best_val) {
        best_val = v;
        best = fq;
      }
    }
    const auto idx = qg.index(best);
    double gain = 0.0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      if (idx[a] == 0 || idx[a] == nq - 1) {
        std::ostringstream ss;
        ss << "effective_hamiltonian: maximizer for p = " << p[a]
           << " on the q-grid boundary; widen the grid";
        throw GridTooNarrowError(ss.str());
      }
      auto lo = idx, hi = idx;
      --lo[a];
      ++hi[a];
      const double fm = objective(qg.flat(lo)), f0 = best_val, fp1 = objective(qg.flat(hi));
      const double curv = fm - 2.0 * f0 + fp1;
      if (curv < 0.0) gain += -0.125 * (fp1 - fm) * (fp1 - fm) / curv;
    }
    out.values.push_back(best_val + gain);
    out.argmax.push_back(best);
  }
  return out;
}

double fenchel_young_violation(const EffectiveLagrangianTable& lag,
                               const EffectiveHamiltonianTable& ham) {
  double worst = 0.0;
  for (std::size_t fp = 0; fp < ham.grid.size(); ++fp) {
    const Vec p = ham.grid.point(fp);
    for (std::size_t fq = 0; fq < lag.grid.size(); ++fq) {
      const Vec q = lag.grid.point(fq);
      double dot = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) dot += p[i] * q[i];
      worst = std::max(worst, dot - ham.values[fp] - lag.values[fq]);
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------

double coercivity_speed(const GrowthBounds& g, double g_sup, double t) {
  return std::pow((2.0 * g_sup / t + 2.0 * g.K) / g.alpha, 1.0 / g.m);
}

namespace {

constexpr double kInvPhi = 0.6180339887498949;

template <class F>
double golden_min(F&& f, double a, double b, double& fx) {
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > 1e-10 * (1.0 + std::abs(a))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  fx = f(x);
  return x;
}

}  // namespace

HopfLaxResult hopf_lax_effective(const EffectiveLagrangianTable& tab, const InitialDatum& g,
                                 const Vec& x, double t, const GrowthBounds& growth,
                                 const HopfLaxOptions& opts) {
  if (!(t > 0.0)) throw PreconditionError("hopf_lax_effective: t must be positive");
  const auto n = static_cast<std::size_t>(tab.grid.dim);
  if (x.size() != n) throw PreconditionError("hopf_lax_effective: x has the wrong dimension");
  const double q_cap = std::min(-tab.grid.lo(), tab.grid.hi());
  const double speed =
      opts.radius > 0.0 ? opts.radius
                        : std::min(coercivity_speed(growth, opts.g_sup, t), q_cap);
  const double R = speed * t;
  const int per_axis = std::max(3, static_cast<int>(std::ceil(2.0 * R * opts.points_per_unit)) + 1);
  const double h = 2.0 * R / (per_axis - 1);

  auto cost = [&](const Vec& y) {
    Vec q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = (x[i] - y[i]) / t;
    return g(y) + t * tab(q);
  };

  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= static_cast<std::size_t>(per_axis);
  HopfLaxResult out;
  out.value = INFINITY;
  std::vector<int> best_idx(n, 0);
  Vec y(n);
  for (std::size_t f = 0; f < total; ++f) {
    std::size_t rem = f;
    std::vector<int> idx(n);
    for (std::size_t i = n; i-- > 0;) {
      idx[i] = static_cast<int>(rem % static_cast<std::size_t>(per_axis));
      rem /= static_cast<std::size_t>(per_axis);
      y[i] = x[i] - R + h * idx[i];
    }
    const double v = cost(y);
    if (v < out.value) {
      out.value = v;
      out.argmin = y;
      best_idx = idx;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (best_idx[i] == 0 || best_idx[i] == per_axis - 1) out.boundary_warning = true;

  // Coordinate-wise golden refinement around the grid minimizer.
  for (int sweep = 0; sweep < (n == 1 ? 1 : 3); ++sweep) {
    for (std::size_t i = 0; i < n; ++i) {
      Vec probe = out.argmin;
      auto along = [&](double s) {
        probe[i] = s;
        return cost(probe);
      };
      const double a = std::max(x[i] - R, out.argmin[i] - h);
      const double b = std::min(x[i] + R, out.argmin[i] + h);
      double fx = 0.0;
      const double s = golden_min(along, a, b, fx);
      if (fx < out.value) {
        out.value = fx;
        out.argmin[i] = s;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << std::setprecision(17);
  return out;
}

void write_header(std::ofstream& out, const char* var, int dim, const char* tail) {
  for (int i = 0; i < dim; ++i) out << var << (dim == 1 ? "" : std::to_string(i + 1)) << ',';
  out << tail << '\n';
}

}  // namespace

void write_lagrangian_csv(const EffectiveLagrangianTable& tab, const std::string& path) {
  auto out = open_out(path);
  write_header(out, "q", tab.grid.dim, "value,residual");
  for (std::size_t f = 0; f < tab.grid.size(); ++f) {
    for (double c : tab.grid.point(f)) out << c << ',';
    out << tab.values[f] << ',' << tab.residuals[f] << '\n';
  }
  if (!out) throw Error("write failed for " + path);
}

void write_hamiltonian_csv(const EffectiveHamiltonianTable& tab, const std::string& path) {
  auto out = open_out(path);
  write_header(out, "p", tab.grid.dim, "value");
  for (std::size_t f = 0; f < tab.grid.size(); ++f) {
    for (double c : tab.grid.point(f)) out << c << ',';
    out << tab.values[f] << '\n';
  }
  if (!out) throw Error("write failed for " + path);
}

EffectiveLagrangianTable read_lagrangian_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open effective table " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty table");
  const int cols = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
  const int dim = cols - 2;
  if (dim < 1) throw ConfigError(path + ": expected q columns, value, residual");
  std::vector<Vec> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Vec row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError(path + ": malformed number '" + cell + "'");
      }
    }
    if (static_cast<int>(row.size()) != cols) throw ConfigError(path + ": ragged row");
    rows.push_back(std::move(row));
  }
  std::set<double> axis_set;
  for (const auto& r : rows) axis_set.insert(r[0]);
  EffectiveLagrangianTable tab;
  tab.grid.dim = dim;
  tab.grid.axis.assign(axis_set.begin(), axis_set.end());
  if (tab.grid.axis.size() < 2 || rows.size() != tab.grid.size())
    throw ConfigError(path + ": rows do not form a full tensor grid");
  tab.values.assign(rows.size(), 0.0);
  tab.residuals.assign(rows.size(), 0.0);
  for (std::size_t f = 0; f < rows.size(); ++f) {
    const Vec expect = tab.grid.point(f);
    for (int i = 0; i < dim; ++i)
      if (std::abs(rows[f][static_cast<std::size_t>(i)] - expect[static_cast<std::size_t>(i)]) >
          1e-9 * (1.0 + std::abs(expect[static_cast<std::size_t>(i)])))
        throw ConfigError(path + ": rows are not in row-major grid order");
    tab.values[f] = rows[f][static_cast<std::size_t>(dim)];
    tab.residuals[f] = rows[f][static_cast<std::size_t>(dim + 1)];
  }
  return tab;
}

}  // namespace hjlab
