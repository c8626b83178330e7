#include "hjlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "hjlab/errors.hpp"

namespace hjlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double frac(double x) { return x - std::floor(x); }

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

// Coefficient of |v|^m in the conjugate of c |p|^m0.
double conjugate_power_coefficient(double c, double m0) {
  return (m0 - 1.0) / m0 * std::pow(c * m0, -1.0 / (m0 - 1.0));
}

double require_param(const std::map<std::string, double>& params,
                     const std::string& key, const std::string& family) {
  auto it = params.find(key);
  if (it == params.end())
    throw ConfigError("family " + family + " requires parameter '" + key + "'");
  return it->second;
}

double param_or(const std::map<std::string, double>& params,
                const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown(const std::map<std::string, double>& params,
                    std::initializer_list<const char*> allowed,
                    const std::string& family) {
  for (const auto& [key, value] : params) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok)
      throw ConfigError("unknown parameter '" + key + "' for family " + family);
    if (!std::isfinite(value))
      throw ConfigError("parameter '" + key + "' is not finite");
  }
}

}  // namespace

Family parse_family(const std::string& name) {
  if (name == "separable-quadratic") return Family::SeparableQuadratic;
  if (name == "power-coercive") return Family::PowerCoercive;
  if (name == "custom-table") return Family::CustomTable;
  throw ConfigError("unknown model family '" + name + "'");
}

std::string family_name(Family family) {
  switch (family) {
    case Family::SeparableQuadratic:
      return "separable-quadratic";
    case Family::PowerCoercive:
      return "power-coercive";
    case Family::CustomTable:
      return "custom-table";
  }
  return "unknown";
}

GrowthBounds GrowthBounds::from_hamiltonian(double alpha0, double beta0,
                                            double K0, double m0) {
  if (!(alpha0 > 0.0) || !(beta0 >= alpha0) || !(K0 >= 0.0) || !(m0 > 1.0))
    throw ConfigError("growth bounds need 0 < alpha0 <= beta0, K0 >= 0, m0 > 1");
  GrowthBounds g;
  g.alpha0 = alpha0;
  g.beta0 = beta0;
  g.K0 = K0;
  g.m0 = m0;
  g.m = m0 / (m0 - 1.0);
  g.alpha = conjugate_power_coefficient(beta0, m0);
  g.beta = conjugate_power_coefficient(alpha0, m0);
  g.K = K0;
  return g;
}

// ---------------------------------------------------------------------------
// HamiltonianTable

double HamiltonianTable::interpolate(double x, double t, double p) const {
  const std::size_t np = p_nodes.size();
  const double ux = frac(x) * static_cast<double>(nx);
  const double ut = frac(t) * static_cast<double>(nt);
  const auto ix0 = static_cast<std::size_t>(std::floor(ux)) % nx;
  const auto it0 = static_cast<std::size_t>(std::floor(ut)) % nt;
  const std::size_t ix1 = (ix0 + 1) % nx;
  const std::size_t it1 = (it0 + 1) % nt;
  const double fx = ux - std::floor(ux);
  const double ft = ut - std::floor(ut);

  const double dp = p_nodes[1] - p_nodes[0];
  const double up = (p - p_nodes[0]) / dp;
  const auto ip0 = static_cast<std::size_t>(
      std::clamp(std::floor(up), 0.0, static_cast<double>(np - 2)));
  const double fp = up - static_cast<double>(ip0);  // may leave [0,1]

  auto line = [&](std::size_t ix, std::size_t it) {
    return (1.0 - fp) * at(ix, it, ip0) + fp * at(ix, it, ip0 + 1);
  };
  const double v0 = (1.0 - ft) * line(ix0, it0) + ft * line(ix0, it1);
  const double v1 = (1.0 - ft) * line(ix1, it0) + ft * line(ix1, it1);
  return (1.0 - fx) * v0 + fx * v1;
}

HamiltonianTable HamiltonianTable::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open table CSV '" + path + "'");

  struct Row {
    double x, t, p, h;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    Row r{};
    if (!(ss >> r.x >> r.t >> r.p >> r.h)) {
      if (rows.empty() && line_no == 1) continue;  // header
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected four numeric columns x,t,p,H");
    }
    rows.push_back(r);
  }

  auto key = [](double v) { return std::llround(v * 1e9); };
  std::set<long long> xs, ts, ps;
  for (const Row& r : rows) {
    xs.insert(key(r.x));
    ts.insert(key(r.t));
    ps.insert(key(r.p));
  }
  HamiltonianTable table;
  table.nx = xs.size();
  table.nt = ts.size();
  for (long long p : ps) table.p_nodes.push_back(static_cast<double>(p) * 1e-9);
  const std::size_t np = table.p_nodes.size();
  if (table.nx == 0 || table.nt == 0 || np < 2)
    throw ConfigError(path + ": table needs at least one x, one t and two p nodes");
  if (rows.size() != table.nx * table.nt * np)
    throw ConfigError(path + ": samples do not form a full regular grid");

  const double dp = table.p_nodes[1] - table.p_nodes[0];
  for (std::size_t i = 1; i < np; ++i)
    if (std::abs(table.p_nodes[i] - table.p_nodes[i - 1] - dp) > 1e-7)
      throw ConfigError(path + ": p nodes are not uniformly spaced");

  table.values.assign(rows.size(), 0.0);
  for (const Row& r : rows) {
    const double ux = r.x * static_cast<double>(table.nx);
    const double ut = r.t * static_cast<double>(table.nt);
    if (std::abs(ux - std::round(ux)) > 1e-6 || std::abs(ut - std::round(ut)) > 1e-6 ||
        r.x < 0.0 || r.x >= 1.0 || r.t < 0.0 || r.t >= 1.0)
      throw ConfigError(path + ": x and t nodes must be j/nx, k/nt in [0,1)");
    const auto ix = static_cast<std::size_t>(std::lround(ux));
    const auto it = static_cast<std::size_t>(std::lround(ut));
    const auto ip = static_cast<std::size_t>(std::lround((r.p - table.p_nodes[0]) / dp));
    table.values[(ix * table.nt + it) * np + ip] = r.h;
  }
  return table;
}

// ---------------------------------------------------------------------------
// HamiltonianModel

HamiltonianModel HamiltonianModel::separable_quadratic(int dimension, double A,
                                                       double B, double c,
                                                       double D) {
  if (dimension < 1) throw ConfigError("dimension must be positive");
  HamiltonianModel h;
  h.family_ = Family::SeparableQuadratic;
  h.dimension_ = dimension;
  h.A_ = A;
  h.B_ = B;
  h.c_ = c;
  h.D_ = D;
  h.params_ = {{"A", A}, {"B", B}, {"c", c}, {"D", D}};
  h.growth_ = GrowthBounds::from_hamiltonian(
      0.5, 0.5, std::abs(c) + std::hypot(A, B) + std::abs(D), 2.0);
  return h;
}

HamiltonianModel HamiltonianModel::power_coercive(int dimension, double m0,
                                                  double amplitude,
                                                  double offset,
                                                  std::optional<double> K0) {
  if (dimension < 1) throw ConfigError("dimension must be positive");
  if (!(m0 > 1.0)) throw ConfigError("power-coercive needs m0 > 1");
  if (!(amplitude >= 0.0 && amplitude < 1.0))
    throw ConfigError("power-coercive needs 0 <= amplitude < 1");
  HamiltonianModel h;
  h.family_ = Family::PowerCoercive;
  h.dimension_ = dimension;
  h.m0_ = m0;
  h.amp_ = amplitude;
  h.offset_ = offset;
  const double k0 = K0.value_or(std::abs(offset));
  h.params_ = {{"m0", m0}, {"amplitude", amplitude}, {"offset", offset}, {"K0", k0}};
  h.growth_ = GrowthBounds::from_hamiltonian(1.0 - amplitude, 1.0 + amplitude, k0, m0);
  return h;
}

HamiltonianModel HamiltonianModel::custom_table(HamiltonianTable table,
                                                GrowthBounds growth) {
  if (table.nx == 0 || table.nt == 0 || table.p_nodes.size() < 2 ||
      table.values.size() != table.nx * table.nt * table.p_nodes.size())
    throw ConfigError("malformed Hamiltonian table");
  HamiltonianModel h;
  h.family_ = Family::CustomTable;
  h.dimension_ = 1;
  h.growth_ = GrowthBounds::from_hamiltonian(growth.alpha0, growth.beta0,
                                             growth.K0, growth.m0);
  h.params_ = {{"alpha0", growth.alpha0},
               {"beta0", growth.beta0},
               {"K0", growth.K0},
               {"m0", growth.m0}};
  h.table_ = std::make_shared<const HamiltonianTable>(std::move(table));
  return h;
}

HamiltonianModel HamiltonianModel::from_params(
    const std::string& family, const std::map<std::string, double>& params,
    int dimension, const std::optional<std::string>& table_csv) {
  switch (parse_family(family)) {
    case Family::SeparableQuadratic:
      reject_unknown(params, {"A", "B", "c", "D"}, family);
      return separable_quadratic(dimension, param_or(params, "A", 0.0),
                                 param_or(params, "B", 0.0),
                                 param_or(params, "c", 0.0),
                                 param_or(params, "D", 0.0));
    case Family::PowerCoercive: {
      reject_unknown(params, {"m0", "amplitude", "offset", "K0"}, family);
      std::optional<double> k0;
      if (auto it = params.find("K0"); it != params.end()) k0 = it->second;
      return power_coercive(dimension, param_or(params, "m0", 2.0),
                            param_or(params, "amplitude", 0.5),
                            param_or(params, "offset", 0.0), k0);
    }
    case Family::CustomTable: {
      reject_unknown(params, {"alpha0", "beta0", "K0", "m0"}, family);
      if (dimension != 1) throw ConfigError("custom-table supports dimension 1 only");
      if (!table_csv) throw ConfigError("custom-table requires a table CSV path");
      GrowthBounds g;
      g.alpha0 = require_param(params, "alpha0", family);
      g.beta0 = require_param(params, "beta0", family);
      g.K0 = require_param(params, "K0", family);
      g.m0 = require_param(params, "m0", family);
      return custom_table(HamiltonianTable::load_csv(*table_csv), g);
    }
  }
  throw ConfigError("unknown model family '" + family + "'");
}

double HamiltonianModel::param(const std::string& key) const {
  auto it = params_.find(key);
  if (it == params_.end()) throw ConfigError("model has no parameter '" + key + "'");
  return it->second;
}

bool HamiltonianModel::translation_invariant() const {
  switch (family_) {
    case Family::SeparableQuadratic:
      return A_ == 0.0 && B_ == 0.0 && D_ == 0.0;
    case Family::PowerCoercive:
      return amp_ == 0.0;
    case Family::CustomTable:
      return false;
  }
  return false;
}

double HamiltonianModel::potential(std::span<const double> x, double t) const {
  const double n = static_cast<double>(x.size());
  double s = 0.0, co = 0.0;
  for (double xi : x) {
    const double r = frac(xi);
    s += std::sin(kTwoPi * r);
    co += std::cos(kTwoPi * r);
  }
  const double tr = frac(t);
  return c_ + (A_ * std::sin(kTwoPi * tr) + B_ * std::cos(kTwoPi * tr)) * (s / n) +
         D_ * (co / n);
}

void HamiltonianModel::potential_gradient(std::span<const double> x, double t,
                                          std::span<double> grad) const {
  const double n = static_cast<double>(x.size());
  const double tr = frac(t);
  const double time_factor = A_ * std::sin(kTwoPi * tr) + B_ * std::cos(kTwoPi * tr);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = frac(x[i]);
    grad[i] = kTwoPi / n *
              (time_factor * std::cos(kTwoPi * r) - D_ * std::sin(kTwoPi * r));
  }
}

void HamiltonianModel::potential_hessian_diag(std::span<const double> x, double t,
                                              std::span<double> diag) const {
  const double n = static_cast<double>(x.size());
  const double tr = frac(t);
  const double time_factor = A_ * std::sin(kTwoPi * tr) + B_ * std::cos(kTwoPi * tr);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = frac(x[i]);
    diag[i] = -kTwoPi * kTwoPi / n *
              (time_factor * std::sin(kTwoPi * r) + D_ * std::cos(kTwoPi * r));
  }
}

double HamiltonianModel::coefficient(std::span<const double> x, double t) const {
  const double n = static_cast<double>(x.size());
  double s = 0.0;
  for (double xi : x) s += std::sin(kTwoPi * frac(xi));
  return 1.0 + amp_ * (s / n) * std::cos(kTwoPi * frac(t));
}

void HamiltonianModel::coefficient_gradient(std::span<const double> x, double t,
                                            std::span<double> grad) const {
  const double n = static_cast<double>(x.size());
  const double ct = std::cos(kTwoPi * frac(t));
  for (std::size_t i = 0; i < x.size(); ++i)
    grad[i] = amp_ * ct * kTwoPi / n * std::cos(kTwoPi * frac(x[i]));
}

double HamiltonianModel::operator()(std::span<const double> x, double t,
                                    std::span<const double> p) const {
  switch (family_) {
    case Family::SeparableQuadratic: {
      double pp = 0.0;
      for (double c : p) pp += c * c;
      return 0.5 * pp + potential(x, t);
    }
    case Family::PowerCoercive:
      return coefficient(x, t) * std::pow(norm(p), m0_) + offset_;
    case Family::CustomTable:
      return table_->interpolate(x[0], t, p[0]);
  }
  throw ConfigError("unknown model family");
}

double eval_hamiltonian(const HamiltonianModel& model, std::span<const double> x,
                        double t, std::span<const double> p) {
  if (x.size() != static_cast<std::size_t>(model.dimension()) || p.size() != x.size())
    throw PreconditionError("eval_hamiltonian: dimension mismatch");
  for (double c : x)
    if (!std::isfinite(c)) throw PreconditionError("eval_hamiltonian: non-finite x");
  for (double c : p)
    if (!std::isfinite(c)) throw PreconditionError("eval_hamiltonian: non-finite p");
  if (!std::isfinite(t)) throw PreconditionError("eval_hamiltonian: non-finite t");
  return model(x, t, p);
}

// ---------------------------------------------------------------------------
// LagrangianModel

ConjugationMode parse_conjugation_mode(const std::string& name) {
  if (name == "analytic") return ConjugationMode::Analytic;
  if (name == "numeric-conjugate" || name == "numeric")
    return ConjugationMode::NumericConjugate;
  throw ConfigError("unknown conjugation mode '" + name + "'");
}

LagrangianModel::LagrangianModel(HamiltonianModel source)
    : LagrangianModel(source, source.family() == Family::CustomTable
                                  ? ConjugationMode::NumericConjugate
                                  : ConjugationMode::Analytic) {}

LagrangianModel::LagrangianModel(HamiltonianModel source, ConjugationMode mode,
                                 std::optional<double> radius, int grid_size)
    : source_(std::make_shared<const HamiltonianModel>(std::move(source))),
      mode_(mode),
      radius_(radius),
      grid_size_(grid_size) {
  if (mode_ == ConjugationMode::Analytic && source_->family() == Family::CustomTable)
    throw ConfigError("custom-table models have no analytic conjugate");
  if (radius_ && !(*radius_ > 0.0)) throw ConfigError("conjugation radius must be positive");
  if (grid_size_ < 4) throw ConfigError("conjugation grid needs at least 4 points");
}

double LagrangianModel::radius_for(std::span<const double> v) const {
  if (radius_) return *radius_;
  const GrowthBounds& g = source_->growth();
  return std::pow(2.0 * norm(v) / (g.alpha0 * g.m0), 1.0 / (g.m0 - 1.0)) + 1.0;
}

double LagrangianModel::analytic(std::span<const double> x, double t,
                                 std::span<const double> v) const {
  const HamiltonianModel& h = *source_;
  if (h.family() == Family::SeparableQuadratic) {
    double vv = 0.0;
    for (double c : v) vv += c * c;
    return 0.5 * vv - h.potential(x, t);
  }
  const double m0 = h.growth().m0;
  const double m = h.growth().m;
  const double a = h.coefficient(x, t);
  return conjugate_power_coefficient(a, m0) * std::pow(norm(v), m) - h.offset();
}

double LagrangianModel::numeric(std::span<const double> x, double t,
                                std::span<const double> v) const {
  const HamiltonianModel& h = *source_;
  const std::size_t n = v.size();
  const double R = radius_for(v);
  Vec p(n, 0.0);

  auto objective = [&](const Vec& q) {
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += q[i] * v[i];
    return dot - h(x, t, q);
  };

  // Maximizes along axis i with the other coordinates frozen.
  auto axis_search = [&](std::size_t i) {
    const int G = grid_size_;
    const double step = 2.0 * R / G;
    int best = 0;
    double best_val = -INFINITY;
    for (int k = 0; k <= G; ++k) {
      p[i] = -R + k * step;
      const double f = objective(p);
      if (f > best_val) {
        best_val = f;
        best = k;
      }
    }
    if (best == 0 || best == G)
      throw RadiusTooSmallError("conjugation argmax on the boundary |p| = " +
                                std::to_string(R) + "; enlarge the radius");
    constexpr double kInvPhi = 0.6180339887498949;
    double lo = -R + (best - 1) * step;
    double hi = -R + (best + 1) * step;
    double c = hi - kInvPhi * (hi - lo);
    double d = lo + kInvPhi * (hi - lo);
    p[i] = c;
    double fc = objective(p);
    p[i] = d;
    double fd = objective(p);
    while (hi - lo > 1e-11 * (1.0 + R)) {
      if (fc > fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - kInvPhi * (hi - lo);
        p[i] = c;
        fc = objective(p);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + kInvPhi * (hi - lo);
        p[i] = d;
        fd = objective(p);
      }
    }
    double best_p = -R + best * step;
    double fbest = best_val;
    if (fc > fbest) { best_p = c; fbest = fc; }
    if (fd > fbest) { best_p = d; fbest = fd; }
    p[i] = best_p;
    return fbest;
  };

  double value = axis_search(0);
  if (n == 1) return value;
  for (int sweep = 0; sweep < 200; ++sweep) {
    const double before = value;
    for (std::size_t i = 0; i < n; ++i) value = axis_search(i);
    if (std::abs(value - before) <= 1e-14 * (1.0 + std::abs(value))) break;
  }
  return value;
}

double LagrangianModel::operator()(std::span<const double> x, double t,
                                   std::span<const double> v) const {
  return mode_ == ConjugationMode::Analytic ? analytic(x, t, v) : numeric(x, t, v);
}

void LagrangianModel::gradient(std::span<const double> x, double t,
                               std::span<const double> v, std::span<double> grad_x,
                               std::span<double> grad_v) const {
  const HamiltonianModel& h = *source_;
  const std::size_t n = x.size();
  if (mode_ == ConjugationMode::Analytic) {
    if (h.family() == Family::SeparableQuadratic) {
      h.potential_gradient(x, t, grad_x);
      for (std::size_t i = 0; i < n; ++i) {
        grad_x[i] = -grad_x[i];
        grad_v[i] = v[i];
      }
      return;
    }
    const double m0 = h.growth().m0;
    const double m = h.growth().m;
    const double a = h.coefficient(x, t);
    const double kappa = conjugate_power_coefficient(a, m0);
    const double speed = norm(v);
    const double speed_m = std::pow(speed, m);
    h.coefficient_gradient(x, t, grad_x);
    const double dkappa_da = -kappa / ((m0 - 1.0) * a);
    for (std::size_t i = 0; i < n; ++i) grad_x[i] *= dkappa_da * speed_m;
    const double scale = speed > 0.0 ? kappa * m * std::pow(speed, m - 2.0) : 0.0;
    for (std::size_t i = 0; i < n; ++i) grad_v[i] = scale * v[i];
    return;
  }
  constexpr double kStep = 1e-5;
  Vec xs(x.begin(), x.end()), vs(v.begin(), v.end());
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[i] + kStep;
    const double fp = (*this)(xs, t, v);
    xs[i] = x[i] - kStep;
    const double fm = (*this)(xs, t, v);
    xs[i] = x[i];
    grad_x[i] = (fp - fm) / (2.0 * kStep);
    vs[i] = v[i] + kStep;
    const double gp = (*this)(x, t, vs);
    vs[i] = v[i] - kStep;
    const double gm = (*this)(x, t, vs);
    vs[i] = v[i];
    grad_v[i] = (gp - gm) / (2.0 * kStep);
  }
}

void LagrangianModel::curvature(std::span<const double> x, double t,
                                std::span<const double> v,
                                std::span<double> diag_xx,
                                std::span<double> diag_vv) const {
  const HamiltonianModel& h = *source_;
  const std::size_t n = x.size();
  if (mode_ == ConjugationMode::Analytic && h.family() == Family::SeparableQuadratic) {
    h.potential_hessian_diag(x, t, diag_xx);
    for (std::size_t i = 0; i < n; ++i) {
      diag_xx[i] = -diag_xx[i];
      diag_vv[i] = 1.0;
    }
    return;
  }
  const double step = mode_ == ConjugationMode::Analytic ? 1e-6 : 1e-4;
  Vec xs(x.begin(), x.end()), vs(v.begin(), v.end());
  Vec gx_p(n), gx_m(n), gv_p(n), gv_m(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[i] + step;
    gradient(xs, t, v, gx_p, gv_p);
    xs[i] = x[i] - step;
    gradient(xs, t, v, gx_m, gv_m);
    xs[i] = x[i];
    diag_xx[i] = (gx_p[i] - gx_m[i]) / (2.0 * step);
    vs[i] = v[i] + step;
    gradient(x, t, vs, gx_p, gv_p);
    vs[i] = v[i] - step;
    gradient(x, t, vs, gx_m, gv_m);
    vs[i] = v[i];
    diag_vv[i] = (gv_p[i] - gv_m[i]) / (2.0 * step);
  }
}

double legendre_transform(const LagrangianModel& model, std::span<const double> x,
                          double t, std::span<const double> v) {
  if (x.size() != static_cast<std::size_t>(model.dimension()) || v.size() != x.size())
    throw PreconditionError("legendre_transform: dimension mismatch");
  return model(x, t, v);
}

// ---------------------------------------------------------------------------
// verify_model

bool ModelReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const PropertyCheck& c) { return c.passed; });
}

const PropertyCheck& ModelReport::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw PreconditionError("no property check named '" + name + "'");
}

ModelReport verify_model(const HamiltonianModel& model, int samples, double tol,
                         std::uint64_t seed) {
  if (samples < 1) throw PreconditionError("verify_model: samples must be >= 1");
  const auto n = static_cast<std::size_t>(model.dimension());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> shift(-5, 5);

  double p_lo = -3.0, p_hi = 3.0;
  if (const HamiltonianTable* tab = model.table()) {
    p_lo = tab->p_nodes.front();
    p_hi = tab->p_nodes.back();
  }
  auto random_p = [&] {
    Vec p(n);
    for (double& c : p) c = p_lo + (p_hi - p_lo) * unit(rng);
    return p;
  };

  PropertyCheck periodic{"periodicity", true, 0.0};
  PropertyCheck convex{"convexity", true, 0.0};
  PropertyCheck growth{"growth", true, 0.0};
  const GrowthBounds& g = model.growth();

  for (int s = 0; s < samples; ++s) {
    Vec x(n), xs(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = unit(rng);
      xs[i] = x[i] + shift(rng);
    }
    const double t = unit(rng);
    const double ts = t + shift(rng);
    const Vec p1 = random_p();
    const Vec p2 = random_p();
    Vec mid(n);
    for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (p1[i] + p2[i]);

    const double h1 = model(x, t, p1);
    periodic.worst_violation =
        std::max(periodic.worst_violation, std::abs(model(xs, ts, p1) - h1));

    const double h2 = model(x, t, p2);
    convex.worst_violation = std::max(
        convex.worst_violation, model(x, t, mid) - 0.5 * (h1 + h2));

    const double r = std::pow(norm(p1), g.m0);
    growth.worst_violation =
        std::max({growth.worst_violation, g.alpha0 * r - g.K0 - h1,
                  h1 - g.beta0 * r - g.K0});
  }
  for (PropertyCheck* c : {&periodic, &convex, &growth}) {
    c->worst_violation = std::max(0.0, c->worst_violation);
    c->passed = c->worst_violation <= tol;
  }
  return ModelReport{{periodic, convex, growth}};
}

}  // namespace hjlab
