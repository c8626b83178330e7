#include "doctest.h"

#include <cmath>

#include "hjlab/action.hpp"
#include "hjlab/constructions.hpp"
#include "hjlab/errors.hpp"

using namespace hjlab;

namespace {

const LagrangianModel& free_quadratic() {
  static const LagrangianModel L(HamiltonianModel::separable_quadratic(1, 0.0));
  return L;
}

const LagrangianModel& oscillating() {
  static const LagrangianModel L(HamiltonianModel::separable_quadratic(1, 1.0));
  return L;
}

Curve minimizer(const LagrangianModel& L, double t, double y) {
  MetricSettings s;
  return compute_metric(L, s.query(0.0, t, {0.0}, {y})).minimizer;
}

}  // namespace

TEST_CASE("cheap window on a uniform line") {
  const Vec a{0.0}, b{12.0};
  const Curve line = Curve::straight(0.0, 12.0, a, b, 24);
  const CheapWindow w = find_cheap_window(free_quadratic(), line, 6.0, 3.5);
  CHECK(w.window_action == doctest::Approx(3.0));
  CHECK(w.window_velocity_m_integral == doctest::Approx(6.0));
  CHECK(w.l == 0.0);
  CHECK_THROWS_AS(find_cheap_window(free_quadratic(), line, 6.0, 2.0), ConstructionError);
  CHECK_THROWS_AS(find_cheap_window(free_quadratic(), line, 13.0), PreconditionError);
}

TEST_CASE("cheap window avoids a burst") {
  Vec knots, nodes;
  for (int i = 0; i <= 6; ++i) {
    knots.push_back(i);
    nodes.push_back(i % 2);
  }
  knots.push_back(12.0);
  nodes.push_back(0.0);
  const Curve c(knots, nodes, 1);
  const CheapWindow w = find_cheap_window(free_quadratic(), c, 6.0);
  CHECK(w.l == 6.0);
  CHECK(w.window_action == 0.0);
}

TEST_CASE("cheap window obeys the averaging budget") {
  const auto& L = oscillating();
  const Curve eta = minimizer(L, 30.0, 11.37);
  const double total = action_of_curve(L, eta);
  const CheapWindow w = find_cheap_window(L, eta, 6.0);
  CHECK(w.window_action <= (total + 30.0 * L.growth().K) / 5.0 + 1e-12);
  CHECK(w.l + 6.0 <= 30.0);
}

TEST_CASE("doubling path on the free quadratic") {
  const auto& L = free_quadratic();
  const Curve eta = minimizer(L, 8.0, 4.0);
  const DoublingResult r = build_doubling_path(L, eta, {4.0});
  const DoublingReport& d = r.report;
  const double eta_action = action_of_curve(L, eta);
  CHECK(d.K[2] + d.K[4] == doctest::Approx(eta_action - d.window.window_action).epsilon(1e-12));
  const double connector_bound =
      2.0 * L.growth().beta * std::pow(0.5, L.growth().m) + 2.0 * L.growth().K;
  CHECK(d.K[1] <= connector_bound + 1e-12);
  CHECK(d.K[5] <= connector_bound + 1e-12);
  double sum = 0.0;
  for (double k : d.K) sum += k;
  CHECK(std::abs(d.total - sum) <= 1e-12);
  CHECK(std::abs(d.total - action_of_curve(L, r.mu)) <= 1e-9);
}

TEST_CASE("doubling path endpoints, junctions and shifted pieces") {
  const auto& L = oscillating();
  for (double t : {7.0, 10.0, 13.5}) {
    const double y = 0.4 * t + 0.37;
    const Curve eta = minimizer(L, t, y);
    const DoublingResult r = build_doubling_path(L, eta, {y});
    const DoublingReport& d = r.report;
    CHECK(r.mu.start_time() == 0.0);
    CHECK(r.mu.end_time() == doctest::Approx(2.0 * t).epsilon(1e-15));
    CHECK(d.start_gap <= 1e-12);
    CHECK(d.end_gap <= 1e-12);
    CHECK(d.max_junction_gap <= 1e-12);
    CHECK(y - d.w[0] == doctest::Approx(std::round(y - d.w[0])).epsilon(1e-15));
    CHECK(d.w[0] >= 0.0);
    CHECK(d.w[0] <= 1.0);
    // Integer shifts in (x,t) leave the cost of the copied pieces unchanged.
    const double l = d.window.l;
    if (l > 0.0) CHECK(std::abs(d.K[2] - action_of_curve(L, eta.restricted(0.0, l))) <= 1e-10);
    if (l + 6.0 < t)
      CHECK(std::abs(d.K[4] - action_of_curve(L, eta.restricted(l + 6.0, t))) <= 1e-10);
  }
  CHECK_THROWS_AS(build_doubling_path(L, minimizer(L, 5.0, 1.0), {1.0}), PreconditionError);
}

TEST_CASE("subadditivity defect") {
  SUBCASE("free quadratic") {
    for (double t : {3.0, 9.0}) {
      const SubadditivityReport r = check_subadditivity(free_quadratic(), t, {0.7 * t});
      CHECK(std::abs(r.defect) <= 2e-7);
    }
  }
  SUBCASE("small-time branch") {
    const SubadditivityReport r = check_subadditivity(oscillating(), 4.0, {1.37});
    REQUIRE(r.small_time_bound.has_value());
    const double C = small_time_constant(oscillating().growth(), 2.0);
    CHECK(*r.small_time_bound == doctest::Approx(4.0 * C * 4.0));
    CHECK(r.defect <= *r.small_time_bound);
    CHECK_FALSE(r.constructive_bound.has_value());
  }
  SUBCASE("constructive bound dominates") {
    const SubadditivityReport r = check_subadditivity(oscillating(), 10.0, {3.0});
    REQUIRE(r.constructive_bound.has_value());
    CHECK(r.defect <= *r.constructive_bound + 1e-9);
    CHECK(r.doubling->total >= r.m_2t - 1e-9);
  }
  SUBCASE("velocity bound precondition") {
    CHECK_THROWS_AS(check_subadditivity(oscillating(), 2.0, {5.0}), PreconditionError);
  }
}

TEST_CASE("iterated doubling") {
  const auto& L = oscillating();
  MetricSettings s;
  const double t = 10.0, y = 3.37;
  const double base = compute_metric(L, s.query(0.0, t, {0.0}, {y})).value;
  const double C = 0.5;
  for (int k = 1; k <= 3; ++k) {
    const double f = std::pow(2.0, k);
    const double v = compute_metric(L, s.query(0.0, f * t, {0.0}, {f * y})).value;
    CHECK(v <= f * base + C * (f - 1.0));
  }
}

TEST_CASE("complement intervals") {
  const auto c = complement_intervals({{1.0, 2.0}, {3.0, 5.0}}, 0.0, 6.0);
  REQUIRE(c.size() == 3);
  CHECK(c[0] == std::pair<double, double>{0.0, 1.0});
  CHECK(c[1] == std::pair<double, double>{2.0, 3.0});
  CHECK(c[2] == std::pair<double, double>{5.0, 6.0});
  CHECK(complement_intervals({{0.0, 2.0}}, 0.0, 4.0).size() == 1);
}

TEST_CASE("shift schedule sanity") {
  const auto& L = oscillating();
  const double t = 200.0, y = 0.5 * t + 0.37;
  const SuperadditivityReport r = check_superadditivity(L, t, {y});
  REQUIRE(r.halving.has_value());
  for (const HalvingResult* h : {&*r.halving, &*r.complement}) {
    const ShiftSchedule& s = h->schedule;
    REQUIRE(s.c.size() == s.source.size());
    for (std::size_t i = 0; i < s.c.size(); ++i) {
      const auto [a, b] = s.source[i];
      CHECK(s.c[i] - a == doctest::Approx(std::round(s.c[i] - a)));
      CHECK(s.c[i] - s.d[i] >= 1.0 - 1e-9);
      CHECK(s.c[i] - s.d[i] < 2.0);
      CHECK(s.d[i + 1] - s.c[i] == doctest::Approx(b - a));
      for (double w : s.w[i]) CHECK(w == std::round(w));
    }
    CHECK(s.connector_budget > s.connector_time);
    CHECK(s.max_connector_displacement <= 1.0 + 1e-12);
    CHECK(h->start_gap <= 1e-12);
    CHECK(h->end_gap <= 1e-12);
    CHECK(h->max_junction_gap <= 1e-12);
    CHECK(h->zeta.end_time() == doctest::Approx(t));
    CHECK(h->upper_bound >= r.m_t - 1e-9);
  }
  CHECK(r.halving->schedule.connector_budget <= 1 + 3);
  CHECK(r.defect <= *r.constructive_bound + 1e-9);
}

TEST_CASE("halving on the free quadratic has a t-independent excess") {
  const auto& L = free_quadratic();
  Vec excess;
  for (double t : {200.0, 400.0, 800.0}) {
    const SuperadditivityReport r = check_superadditivity(L, t, {0.5 * t});
    REQUIRE(r.halving.has_value());
    CHECK(std::abs(r.defect) <= 2e-7);
    excess.push_back(r.halving->upper_bound - r.halving->source_action);
  }
  for (double e : excess) CHECK(e <= excess.front() + 1e-6);
  CHECK(excess.front() < 5.0);
}

TEST_CASE("halving preconditions") {
  const auto& L = oscillating();
  const Curve eta = minimizer(L, 20.0, 4.0);
  CHECK_THROWS_AS(build_halving_path(L, eta, {2.0}, {{0.0, 10.0}}), PreconditionError);
  const SuperadditivityReport r = check_superadditivity(L, 8.0, {2.37});
  REQUIRE(r.small_time_bound.has_value());
  CHECK(r.defect <= *r.small_time_bound);
}
