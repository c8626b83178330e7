#include "hjlab/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hjlab/errors.hpp"

namespace hjlab {

namespace {

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double length_eps(double scale) { return 1e-12 * std::max(1.0, std::abs(scale)); }

double norm(const Vec& v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

Vec floor_of(std::span<const double> v) {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::floor(v[i]);
  return out;
}

// Spacing used for connectors: the mean segment length of the source.
double source_step(const Curve& eta) {
  return eta.duration() / static_cast<double>(eta.segment_count());
}

Vec zeros(int n) { return Vec(static_cast<std::size_t>(n), 0.0); }

}  // namespace

CheapWindow find_cheap_window(const LagrangianModel& L, const Curve& eta,
                              double width, std::optional<double> budget) {
  const double D = eta.duration();
  if (!(width > 0.0) || D < width - length_eps(D))
    throw PreconditionError("find_cheap_window: domain shorter than the window");
  const double s0 = eta.start_time();
  const double total = action_of_curve(L, eta);
  const double windows = std::floor(D / width + 1e-12);
  const double bound = budget ? *budget : (total + L.growth().K * D) / windows;

  CheapWindow best;
  best.width = width;
  best.budget = bound;
  best.window_action = INFINITY;
  for (int i = 0;; ++i) {
    const double l = s0 + i;
    if (l + width > eta.end_time() + length_eps(eta.end_time())) break;
    const double hi = std::min(l + width, eta.end_time());
    const Curve piece = eta.restricted(l, hi);
    const double cost = action_of_curve(L, piece);
    if (cost < best.window_action) {
      best.l = l;
      best.window_action = cost;
      best.window_velocity_m_integral = velocity_power_integral(piece, L.growth().m);
    }
  }
  if (best.window_action > bound) {
    std::ostringstream ss;
    ss << "find_cheap_window: cheapest window costs " << best.window_action
       << ", above the averaging bound " << bound;
    throw ConstructionError(ss.str());
  }
  return best;
}

DoublingResult build_doubling_path(const LagrangianModel& L, const Curve& eta,
                                   const Vec& y) {
  const int n = eta.dimension();
  if (static_cast<int>(y.size()) != n)
    throw PreconditionError("build_doubling_path: y has the wrong dimension");
  if (std::abs(eta.start_time()) > length_eps(0.0))
    throw PreconditionError("build_doubling_path: eta must start at time 0");
  const double t = eta.end_time();
  if (!(t > 6.0)) throw PreconditionError("build_doubling_path: requires t > 6");

  DoublingReport rep;
  const Vec z = floor_of(y);  // y - w
  rep.w.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) rep.w[i] = y[i] - z[i];
  const double ct = std::ceil(t - 1e-12);
  rep.window = find_cheap_window(L, eta, 6.0);
  const double l = rep.window.l;
  const double step = source_step(eta);

  Vec two_y(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) two_y[i] = 2.0 * y[i];
  auto segments_for = [step](double len) {
    return std::max(1, static_cast<int>(std::ceil(len / step - 1e-9)));
  };

  std::array<std::optional<Curve>, 6> pieces;
  pieces[0] = eta;
  pieces[1] = Curve::straight(t, ct + 2.0, y, z, segments_for(ct + 2.0 - t));
  if (l > 0.0) pieces[2] = eta.restricted(0.0, l).shifted(ct + 2.0, z);
  pieces[3] = eta.restricted(l, l + 6.0).retimed(ct + l + 2.0, 6.0).shifted(0.0, z);
  if (l + 6.0 < t - length_eps(t)) pieces[4] = eta.restricted(l + 6.0, t).shifted(ct - 3.0, z);
  Vec z_end(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) z_end[i] = y[i] + z[i];
  pieces[5] = Curve::straight(ct + t - 3.0, 2.0 * t, z_end, two_y,
                              segments_for(2.0 * t - (ct + t - 3.0)));

  CurveBuilder builder(n);
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (!pieces[i]) continue;
    rep.K[i] = action_of_curve(L, *pieces[i]);
    rep.total += rep.K[i];
    builder.append(*pieces[i]);
  }
  Curve mu = builder.build();
  rep.eta_action = rep.K[0];
  rep.defect = rep.total - 2.0 * rep.eta_action;
  rep.max_junction_gap = builder.max_junction_gap();
  rep.start_gap = norm(Vec(mu.front().begin(), mu.front().end()));
  rep.end_gap = distance(mu.back(), two_y);
  return {std::move(mu), rep};
}

std::vector<std::pair<double, double>> complement_intervals(
    const std::vector<std::pair<double, double>>& intervals, double start,
    double end) {
  auto sorted = intervals;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> out;
  double cursor = start;
  const double eps = length_eps(end);
  for (const auto& [a, b] : sorted) {
    if (a - cursor > eps) out.emplace_back(cursor, a);
    cursor = std::max(cursor, b);
  }
  if (end - cursor > eps) out.emplace_back(cursor, end);
  return out;
}

ShiftSchedule make_shift_schedule(const Curve& eta,
                                  std::vector<std::pair<double, double>> intervals) {
  ShiftSchedule s;
  const double eps = length_eps(eta.end_time());
  std::sort(intervals.begin(), intervals.end());
  for (const auto& iv : intervals)
    if (iv.second - iv.first > eps) s.source.push_back(iv);
  if (s.source.empty())
    throw PreconditionError("make_shift_schedule: no non-degenerate interval");

  s.d.push_back(0.0);
  double best_len = -1.0;
  for (std::size_t i = 0; i < s.source.size(); ++i) {
    const auto [a, b] = s.source[i];
    const double c = a + std::ceil(s.d.back() + 1.0 - a - 1e-12);
    s.connector_time += c - s.d.back();
    s.c.push_back(c);
    s.d.push_back(c + (b - a));
    if (b - a > best_len) {
      best_len = b - a;
      s.j = static_cast<int>(i);
    }

    // mu_1(c_1) in [0,1)^n; later starts share the cube of the previous end.
    const Vec start = eta.at(a);
    Vec w = floor_of(start);
    for (double& x : w) x = -x;
    if (i > 0) {
      const Vec prev_end = eta.at(s.source[i - 1].second);
      const Vec& wp = s.w.back();
      Vec landing(prev_end.size());
      for (std::size_t q = 0; q < landing.size(); ++q) landing[q] = prev_end[q] + wp[q];
      const Vec cube = floor_of(landing);
      for (std::size_t q = 0; q < w.size(); ++q) w[q] += cube[q];
      Vec next(start.size());
      for (std::size_t q = 0; q < next.size(); ++q) next[q] = start[q] + w[q];
      s.max_connector_displacement =
          std::max(s.max_connector_displacement, distance(landing, next));
    }
    s.w.push_back(std::move(w));
  }
  s.connector_budget = static_cast<int>(std::floor(s.connector_time)) + 1;
  return s;
}

HalvingResult build_halving_path(const LagrangianModel& L, const Curve& eta,
                                 const Vec& y,
                                 const std::vector<std::pair<double, double>>& intervals) {
  const int n = eta.dimension();
  if (static_cast<int>(y.size()) != n)
    throw PreconditionError("build_halving_path: y has the wrong dimension");
  if (std::abs(eta.start_time()) > length_eps(0.0))
    throw PreconditionError("build_halving_path: eta must start at time 0");
  const double t = 0.5 * eta.end_time();
  const double threshold = 4.0 * (n + 4.0) * (n + 4.0);
  if (!(t > threshold))
    throw PreconditionError("build_halving_path: requires t > 4(n+4)^2");

  HalvingResult out;
  ShiftSchedule& s = out.schedule;
  s = make_shift_schedule(eta, intervals);
  double duration = 0.0;
  for (const auto& [a, b] : s.source) duration += b - a;
  if (std::abs(duration - t) > 1e-6 * std::max(1.0, t))
    throw PreconditionError("build_halving_path: interval durations must sum to t");

  const std::size_t k = s.source.size();
  const auto j = static_cast<std::size_t>(s.j);
  const double M = s.connector_budget;
  const double twoM = 2.0 * M;
  if (!(s.d[j + 1] - s.c[j] > 3.0 * M))
    throw ConstructionError("build_halving_path: no segment longer than 3M");

  std::vector<Curve> mu;
  for (std::size_t i = 0; i < k; ++i) {
    const auto [a, b] = s.source[i];
    const Curve piece = eta.restricted(a, b);
    out.source_action += action_of_curve(L, piece);
    mu.push_back(piece.shifted(s.c[i] - a, s.w[i]));
  }
  out.window = find_cheap_window(L, mu[j], 3.0 * M);
  const double l = out.window.l;
  const double step = source_step(eta);
  const Vec none = zeros(n);

  CurveBuilder builder(n);
  const Vec first = Vec(mu[0].front().begin(), mu[0].front().end());
  builder.append(Curve::straight(0.0, s.c[0], none, first,
                                 std::max(1, static_cast<int>(std::ceil(s.c[0] / step)))));
  for (std::size_t i = 0; i < k; ++i) {
    if (i < j) {
      builder.append(mu[i]);
    } else if (i == j) {
      const double cj = s.c[j], dj = s.d[j + 1];
      if (l > cj + length_eps(l)) builder.append(mu[j].restricted(cj, l));
      builder.append(mu[j].restricted(l, l + 3.0 * M).retimed(l, 3.0));
      if (dj > l + 3.0 * M + length_eps(dj))
        builder.append(mu[j].restricted(l + 3.0 * M, dj).shifted(-twoM, none));
    } else {
      builder.append(mu[i].shifted(-twoM, none));
    }
    const double shift = i >= j ? twoM : 0.0;
    if (i + 1 < k) {
      const Vec next(mu[i + 1].front().begin(), mu[i + 1].front().end());
      builder.append_straight_to(s.c[i + 1] - shift, next, step);
    } else {
      builder.append_straight_to(t, y, step);
    }
  }
  out.zeta = builder.build();
  out.max_junction_gap = builder.max_junction_gap();
  out.start_gap = norm(Vec(out.zeta.front().begin(), out.zeta.front().end()));
  out.end_gap = distance(out.zeta.back(), y);
  out.upper_bound = action_of_curve(L, out.zeta);
  return out;
}

double small_time_constant(const GrowthBounds& g, double velocity_bound) {
  return g.beta * std::pow(velocity_bound, g.m) + g.K;
}

namespace {

Vec scaled(const Vec& v, double f) {
  Vec out = v;
  for (double& c : out) c *= f;
  return out;
}

void check_velocity_bound(const Vec& y, double t, double velocity_bound, const char* who) {
  if (!(t > 0.0)) throw PreconditionError(std::string(who) + ": t must be positive");
  if (norm(y) > velocity_bound * t * (1.0 + 1e-12))
    throw PreconditionError(std::string(who) + ": |y| exceeds the velocity bound times t");
}

}  // namespace

SubadditivityReport check_subadditivity(const LagrangianModel& L, double t,
                                        const Vec& y, const MetricSettings& settings,
                                        double velocity_bound) {
  check_velocity_bound(y, t, velocity_bound, "check_subadditivity");
  SubadditivityReport rep;
  rep.t = t;
  rep.y = y;
  const Vec origin = zeros(L.dimension());
  const MetricResult small = compute_metric(L, settings.query(0.0, t, origin, y));
  rep.m_t = small.value;
  rep.residual_t = small.first_order_residual;

  MetricQuery big = settings.query(0.0, 2.0 * t, origin, scaled(y, 2.0));
  if (t > 6.0) {
    DoublingResult dbl = build_doubling_path(L, small.minimizer, y);
    rep.constructive_bound = dbl.report.total - 2.0 * rep.m_t;
    big.warm_starts.push_back(dbl.mu);
    rep.doubling = dbl.report;
  } else {
    rep.small_time_bound = 4.0 * small_time_constant(L.growth(), velocity_bound) * t;
  }
  const MetricResult large = compute_metric(L, big);
  rep.m_2t = large.value;
  rep.residual_2t = large.first_order_residual;
  rep.defect = rep.m_2t - 2.0 * rep.m_t;
  return rep;
}

SuperadditivityReport check_superadditivity(const LagrangianModel& L, double t,
                                            const Vec& y, const MetricSettings& settings,
                                            double velocity_bound) {
  check_velocity_bound(y, t, velocity_bound, "check_superadditivity");
  SuperadditivityReport rep;
  rep.t = t;
  rep.y = y;
  const int n = L.dimension();
  const Vec origin = zeros(n);
  const MetricResult large =
      compute_metric(L, settings.query(0.0, 2.0 * t, origin, scaled(y, 2.0)));
  rep.m_2t = large.value;
  rep.residual_2t = large.first_order_residual;

  MetricQuery small = settings.query(0.0, t, origin, y);
  if (t > 4.0 * (n + 4.0) * (n + 4.0)) {
    const Curve lift = large.minimizer.space_time_lift();
    BuragoDecomposition dec = burago_nd(lift);
    HalvingResult main = build_halving_path(L, large.minimizer, y, dec.intervals);
    HalvingResult comp = build_halving_path(
        L, large.minimizer, y,
        complement_intervals(dec.intervals, 0.0, large.minimizer.end_time()));
    rep.constructive_bound = main.upper_bound + comp.upper_bound - rep.m_2t;
    small.warm_starts.push_back(main.zeta);
    small.warm_starts.push_back(comp.zeta);
    rep.decomposition = std::move(dec);
    rep.halving = std::move(main);
    rep.complement = std::move(comp);
  } else {
    rep.small_time_bound = 3.0 * small_time_constant(L.growth(), velocity_bound) * t;
  }
  const MetricResult res = compute_metric(L, small);
  rep.m_t = res.value;
  rep.residual_t = res.first_order_residual;
  rep.defect = 2.0 * rep.m_t - rep.m_2t;
  return rep;
}

}  // namespace hjlab
