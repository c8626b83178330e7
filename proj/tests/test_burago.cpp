#include "doctest.h"

#include <cmath>
#include <functional>
#include <random>

#include "hjlab/action.hpp"
#include "hjlab/burago.hpp"
#include "hjlab/errors.hpp"

using namespace hjlab;

namespace {

Curve sampled(double T, int n, int dim, const std::function<Vec(double)>& f) {
  Vec knots, nodes;
  for (int i = 0; i <= n; ++i) {
    const double s = T * i / n;
    knots.push_back(s);
    const Vec p = f(s);
    nodes.insert(nodes.end(), p.begin(), p.end());
  }
  return Curve(knots, nodes, dim);
}

double displacement_1d(const Curve& c, const BuragoDecomposition& d) {
  double sum = 0.0;
  for (const auto& [a, b] : d.intervals) sum += c.at(b)[0] - c.at(a)[0];
  return sum;
}

}  // namespace

TEST_CASE("interval count bound") {
  CHECK(burago_max_intervals(1) == 1);
  CHECK(burago_max_intervals(2) == 2);
  CHECK(burago_max_intervals(3) == 2);
  CHECK(burago_max_intervals(4) == 3);
}

TEST_CASE("one-dimensional decompositions") {
  const Curve line = sampled(1.0, 8, 1, [](double s) { return Vec{s}; });
  const BuragoDecomposition d = burago_1d(line);
  REQUIRE(d.k == 1);
  CHECK(d.intervals[0].second - d.intervals[0].first == doctest::Approx(0.5));
  CHECK(displacement_1d(line, d) == doctest::Approx(0.5).epsilon(1e-12));

  // h(s) = 1/2 + (sin 2pi(s+1/2) - sin 2pi s) / (4 pi) = 1/2 - sin(2 pi s) / (2 pi)
  // vanishes in [0, 1/2] only at s = 0 and s = 1/2.
  const Curve wave = sampled(1.0, 4000, 1, [](double s) {
    return Vec{s + std::sin(2 * M_PI * s) / (4 * M_PI)};
  });
  const BuragoDecomposition w = burago_1d(wave);
  const double a = w.intervals[0].first;
  CHECK((std::abs(a) < 1e-6 || std::abs(a - 0.5) < 1e-6));
  CHECK(w.residual <= 1e-8);

  const Curve flat = sampled(1.0, 3, 1, [](double) { return Vec{0.25}; });
  const BuragoDecomposition f = burago_1d(flat);
  CHECK(f.intervals[0].first == 0.0);
  CHECK(f.intervals[0].second == 0.5);
  CHECK(f.residual == 0.0);
}

TEST_CASE("1000 random scalar paths certify") {
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> step(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, 80);
  std::uniform_real_distribution<double> gap(0.01, 2.0);
  for (int p = 0; p < 1000; ++p) {
    const int n = count(rng);
    Vec knots{0.0}, nodes{step(rng)};
    for (int i = 0; i < n; ++i) {
      knots.push_back(knots.back() + gap(rng));
      nodes.push_back(nodes.back() + step(rng));
    }
    const Curve c(knots, nodes, 1);
    const BuragoDecomposition d = burago_1d(c, 1e-8);
    const DecompositionCheck v = verify_decomposition(c, d, 1e-8);
    CHECK(v.passed);
    CHECK(d.k == 1);
    CHECK(std::abs(displacement_1d(c, d) - 0.5 * (nodes.back() - nodes.front())) <= 1e-8);
  }
}

TEST_CASE("multi-dimensional decompositions") {
  const Curve diag = sampled(1.0, 10, 2, [](double s) { return Vec{s, s}; });
  const BuragoDecomposition d = burago_nd(diag);
  CHECK(d.k == 1);
  CHECK(d.residual <= 1e-12);
  CHECK(d.duration_sum == doctest::Approx(0.5));

  const Curve loop = sampled(1.0, 256, 2, [](double s) {
    return Vec{std::cos(2 * M_PI * s) - 1.0, std::sin(2 * M_PI * s)};
  });
  const BuragoDecomposition l = burago_nd(loop);
  const DecompositionCheck v = verify_decomposition(loop, l, 1e-6);
  CHECK(v.passed);
  CHECK(l.k <= burago_max_intervals(2));

  const Curve single = sampled(1.0, 4, 1, [](double s) { return Vec{s}; });
  CHECK_THROWS_AS(burago_nd(single), PreconditionError);
}

TEST_CASE("space-time lifts split time in half") {
  const LagrangianModel L(HamiltonianModel::separable_quadratic(1, 1.0));
  for (double t : {3.0, 7.5}) {
    for (double y : {0.0, 2.2, -4.0}) {
      const Curve eta = compute_metric(L, MetricQuery::make(0.0, t, {0.0}, {y})).minimizer;
      const Curve lift = eta.space_time_lift();
      const BuragoDecomposition d = burago_nd(lift);
      CHECK(verify_decomposition(lift, d, 1e-6).passed);
      CHECK(std::abs(d.duration_sum - 0.5 * t) <= 1e-9);
      CHECK(d.k <= burago_max_intervals(2));
    }
  }
}

TEST_CASE("certificate rejects bad decompositions") {
  const Curve line = sampled(1.0, 8, 1, [](double s) { return Vec{s}; });
  BuragoDecomposition overlap = measure_decomposition(line, {{0.0, 0.3}, {0.2, 0.4}});
  const DecompositionCheck o = verify_decomposition(line, overlap, 1e-6);
  CHECK_FALSE(o.disjoint);
  CHECK_FALSE(o.passed);

  BuragoDecomposition off = measure_decomposition(line, {{0.0, 0.8}});
  CHECK(off.residual == doctest::Approx(0.3));
  const DecompositionCheck r = verify_decomposition(line, off, 1e-6);
  CHECK(r.disjoint);
  CHECK_FALSE(r.passed);

  BuragoDecomposition outside = measure_decomposition(line, {{0.9, 1.4}});
  CHECK_FALSE(verify_decomposition(line, outside, 1e-6).within_domain);

  BuragoDecomposition touching = measure_decomposition(line, {{0.0, 0.25}, {0.25, 0.5}});
  CHECK(verify_decomposition(line, touching, 1e-6).disjoint);
}
