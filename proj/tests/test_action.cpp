#include "doctest.h"

#include <cmath>

#include "hjlab/action.hpp"
#include "hjlab/curve.hpp"
#include "hjlab/errors.hpp"

using namespace hjlab;

namespace {

LagrangianModel quadratic(double A = 0.0, double B = 0.0, double c = 0.0, double D = 0.0) {
  return LagrangianModel(HamiltonianModel::separable_quadratic(1, A, B, c, D));
}

MetricQuery query(double t0, double t1, double from, double to, int segments = 0) {
  MetricQuery q = MetricQuery::make(t0, t1, {from}, {to});
  if (segments > 0) q.segments = segments;
  return q;
}

}  // namespace

TEST_CASE("curve validation and helpers") {
  CHECK_THROWS_AS(Curve({0.0}, {0.0}, 1), PreconditionError);
  CHECK_THROWS_AS(Curve({0.0, 0.0}, {0.0, 1.0}, 1), PreconditionError);
  CHECK_THROWS_AS(Curve({0.0, 1.0}, {0.0}, 1), PreconditionError);

  const Curve c({0.0, 1.0, 3.0}, {0.0, 2.0, 0.0}, 1);
  CHECK(c.at(0.5)[0] == doctest::Approx(1.0));
  CHECK(c.at(2.0)[0] == doctest::Approx(1.0));
  CHECK(c.velocity(1)[0] == doctest::Approx(-1.0));

  const Curve r = c.restricted(0.5, 2.0);
  CHECK(r.start_time() == 0.5);
  CHECK(r.end_time() == 2.0);
  CHECK(r.back()[0] == doctest::Approx(1.0));

  const Vec dx{3.0};
  const Curve s = c.shifted(2.0, dx);
  CHECK(s.start_time() == 2.0);
  CHECK(s.at(3.0)[0] == doctest::Approx(5.0));

  const Curve fast = c.retimed(10.0, 2.0);
  CHECK(fast.end_time() == doctest::Approx(11.5));
  CHECK(fast.at(10.5)[0] == doctest::Approx(2.0));

  const Curve lift = c.space_time_lift();
  CHECK(lift.dimension() == 2);
  CHECK(lift.at(2.0)[1] == doctest::Approx(2.0));
}

TEST_CASE("action of simple curves") {
  const auto L = quadratic();
  for (int n : {1, 7, 64}) {
    const Vec a{0.0}, b{1.0};
    CHECK(action_of_curve(L, Curve::straight(0.0, 1.0, a, b, n)) == doctest::Approx(0.5));
  }
  CHECK(action_of_curve(L, Curve({0.0, 0.5, 1.0}, {0.0, 1.0, 0.0}, 1)) == doctest::Approx(2.0));

  // L = v^2/2 + cos(2 pi x) would be V = -cos; the sign convention here is
  // L = v^2/2 - V with V = D cos(2 pi x).
  const auto Lc = quadratic(0.0, 0.0, 0.0, 1.0);
  const Vec a{0.0}, b{1.0};
  const double midpoint = action_of_curve(Lc, Curve::straight(0.0, 1.0, a, b, 64));
  double expected = 0.5;
  for (int k = 0; k < 64; ++k) expected -= std::cos(2 * M_PI * (k + 0.5) / 64) / 64;
  CHECK(midpoint == doctest::Approx(expected).epsilon(1e-12));
  // Fine quadrature of the continuum integral.
  double fine = 0.0;
  const int m = 1000000;
  for (int k = 0; k < m; ++k) fine += (0.5 - std::cos(2 * M_PI * (k + 0.5) / m)) / m;
  CHECK(std::abs(midpoint - fine) < 1e-9);
}

TEST_CASE("metric of the free quadratic") {
  const auto L = quadratic();
  const MetricResult r = compute_metric(L, query(0.0, 1.0, 0.0, 1.0));
  CHECK(r.value == doctest::Approx(0.5).epsilon(1e-10));
  for (std::size_t k = 0; k < r.minimizer.knot_count(); ++k)
    CHECK(r.minimizer.node(k)[0] == doctest::Approx(r.minimizer.knot(k)).epsilon(1e-7));
  const MetricResult r2 = compute_metric(L, query(0.0, 2.0, 0.0, 2.0));
  CHECK(r2.value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(r2.value - 2.0 * r.value) < 1e-9);
}

TEST_CASE("metric result invariants") {
  const auto L = quadratic(1.0);
  const MetricQuery q = query(0.3, 4.3, -0.2, 1.7);
  const MetricResult r = compute_metric(L, q);
  CHECK(r.minimizer.front()[0] == -0.2);
  CHECK(r.minimizer.back()[0] == 1.7);
  CHECK(r.minimizer.start_time() == 0.3);
  CHECK(r.minimizer.end_time() == 4.3);
  CHECK(std::abs(r.value - action_of_curve(L, r.minimizer)) <= 1e-12);
  const Vec a{-0.2}, b{1.7};
  CHECK(r.value <= action_of_curve(L, Curve::straight(0.3, 4.3, a, b, q.segments)) + 1e-9);
  CHECK(r.starts_tried == q.multistarts);

  MetricQuery fine = q;
  fine.segments *= 2;
  CHECK(compute_metric(L, fine).value <= r.value + 1e-6);
}

TEST_CASE("metric growth sandwich") {
  const auto L = quadratic(1.0);
  const GrowthBounds& g = L.growth();
  const double M = 2.0;
  for (double T : {1.0, 3.0}) {
    for (double y : {0.0, 1.3, M * T}) {
      const double v = compute_metric(L, query(0.0, T, 0.0, y)).value;
      CHECK(v >= -g.K * T - 1e-9);
      CHECK(v <= g.beta * std::pow(M, g.m) * T + g.K * T + 1e-9);
    }
  }
}

TEST_CASE("invalid queries") {
  const auto L = quadratic();
  CHECK_THROWS_AS(compute_metric(L, query(1.0, 1.0, 0.0, 1.0)), PreconditionError);
  MetricQuery q = query(0.0, 1.0, 0.0, 1.0);
  q.segments = 1;
  CHECK_THROWS_AS(compute_metric(L, q), PreconditionError);
  q = query(0.0, 1.0, 0.0, 1.0);
  q.to = {1.0, 2.0};
  CHECK_THROWS_AS(compute_metric(L, q), PreconditionError);
}

TEST_CASE("dynamic programming oracle") {
  DpGrid grid;
  grid.dx = grid.dt = 1.0 / 64;
  CHECK(std::abs(dp_metric_oracle(quadratic(), query(0.0, 1.0, 0.0, 1.0), grid) - 0.5) < 0.05);
  CHECK(std::abs(dp_metric_oracle(quadratic(0.0, 0.0, -1.0), query(0.0, 1.0, 0.0, 0.0), grid) -
                 1.0) < 0.05);

  const auto L = quadratic(1.0);
  double previous = INFINITY;
  for (double h : {1.0 / 32, 1.0 / 64}) {
    DpGrid g;
    g.dx = g.dt = h;
    const double v = dp_metric_oracle(L, query(0.0, 2.0, 0.0, 1.0), g);
    CHECK(v <= previous + 1e-12);
    previous = v;
  }

  const LagrangianModel two(HamiltonianModel::separable_quadratic(2, 1.0));
  MetricQuery q2 = MetricQuery::make(0.0, 1.0, {0.0, 0.0}, {1.0, 1.0});
  CHECK_THROWS_AS(dp_metric_oracle(two, q2, grid), UnsupportedError);
}

TEST_CASE("optimizer agrees with the oracle on an oscillating cost") {
  // L = v^2/2 + 1 + sin(2 pi x) cos(2 pi t) / 2
  const auto L = quadratic(0.0, -0.5, -1.0);
  const MetricQuery q = query(0.0, 4.0, 0.0, 2.0);
  const double opt = compute_metric(L, q).value;
  const double dp = dp_metric_oracle(L, q, DpGrid{});
  CHECK(std::abs(opt - dp) <= 0.02 * std::abs(dp));
}

TEST_CASE("metric periodicity") {
  const auto free = quadratic();
  CHECK(check_metric_periodicity(free, 2.0, {0.3}, {0.7}, {3.0}) <= 1e-12);

  const auto L = quadratic(1.0);
  CHECK(check_metric_periodicity(L, 2.0, {0.3}, {0.7}, {1.0}) <= 2e-7);
  CHECK(check_metric_periodicity(L, 2.0, {0.3}, {0.7}, {0.5}) > 1e-3);
}
