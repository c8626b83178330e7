#include "doctest.h"

#include <cmath>

#include "hjlab/errors.hpp"
#include "hjlab/pde.hpp"

using namespace hjlab;

namespace {

HamiltonianModel hamiltonian(double A = 0.0) {
  return HamiltonianModel::separable_quadratic(1, A);
}

double sine(const Vec& y) { return std::sin(2 * M_PI * y[0]); }

// inf_y sin(2 pi y) + (x - y)^2 / (2 t) on a dense grid.
double quadratic_hopf_lax(double x, double t) {
  double best = INFINITY;
  const int n = 400000;
  for (int i = 0; i <= n; ++i) {
    const double y = x - 2.0 + 4.0 * i / n;
    best = std::min(best, std::sin(2 * M_PI * y) + (x - y) * (x - y) / (2.0 * t));
  }
  return best;
}

}  // namespace

TEST_CASE("control route with the free cost") {
  const LagrangianModel L(hamiltonian());
  const ControlResult zero = solve_control(L, [](const Vec&) { return 0.0; }, 0.5, {0.3}, 0.2);
  CHECK(std::abs(zero.value) <= 1e-12);

  // eps m(t/eps; y/eps -> x/eps) = |x - y|^2 / (2t) for every eps.
  const double exact = quadratic_hopf_lax(0.3, 0.2);
  for (double eps : {0.5, 0.25}) {
    const ControlResult r = solve_control(L, sine, eps, {0.3}, 0.2);
    CHECK(std::abs(r.value - exact) <= 1e-3);
    CHECK_FALSE(r.boundary_warning);
  }
}

TEST_CASE("control solver caches metric values") {
  const LagrangianModel L(hamiltonian());
  ControlSolver s(L, sine, 0.5, 0.2);
  const double a = s.evaluate({0.25}).value;
  const std::size_t filled = s.cache_size();
  CHECK(filled > 0);
  // x + 1 has the same fractional part of x / eps: no new queries.
  const double b = s.evaluate({1.25}).value;
  CHECK(s.cache_size() == filled);
  CHECK(a == doctest::Approx(b).epsilon(1e-9));
  CHECK_THROWS_AS(ControlSolver(L, sine, 1.5, 0.2), PreconditionError);
  CHECK_THROWS_AS(s.evaluate({0.1, 0.2}), PreconditionError);
}

TEST_CASE("control route agrees with the scheme") {
  const auto H = hamiltonian(1.0);
  const LagrangianModel L(H);
  MetricSettings settings;
  settings.optimizer.max_iterations = 300;
  const double eps = 0.25;
  const ControlResult c = solve_control(L, sine, eps, {0.0}, 1.0, settings);
  const GridSolution s = solve_scheme(H, sine, eps, 1.0, eps / 64);
  CHECK(std::abs(c.value - s.at(0.0)) <= 2e-2);
}

TEST_CASE("scheme reproduces the Hopf-Lax solution") {
  const GridSolution s = solve_scheme(hamiltonian(), sine, 1.0, 0.1, 1.0 / 512);
  double worst = 0.0;
  for (std::size_t j = 0; j < s.x.size(); j += 8)
    worst = std::max(worst, std::abs(s.final_values()[j] - quadratic_hopf_lax(s.x[j], 0.1)));
  CHECK(worst <= 5e-2);
  CHECK(s.cfl_ratio <= 0.5 + 1e-12);
  CHECK(s.times.back() == doctest::Approx(0.1));
}

TEST_CASE("scheme fixed point and comparison") {
  const GridSolution zero = solve_scheme(hamiltonian(), [](const Vec&) { return 0.0; }, 0.5, 1.0,
                                         1.0 / 128);
  for (double v : zero.final_values()) CHECK(v == 0.0);

  SchemeOptions opts;
  opts.snapshots = 4;
  const auto H = hamiltonian(1.0);
  const GridSolution lo = solve_scheme(H, sine, 0.5, 0.5, 1.0 / 128, opts);
  const GridSolution hi = solve_scheme(
      H, [](const Vec& y) { return sine(y) + 0.1 * (1.0 + std::cos(2 * M_PI * y[0])); }, 0.5, 0.5,
      1.0 / 128, opts);
  REQUIRE(lo.values.size() == 5);
  for (std::size_t k = 0; k < lo.values.size(); ++k)
    for (std::size_t j = 0; j < lo.x.size(); ++j) CHECK(lo.values[k][j] <= hi.values[k][j] + 1e-12);
}

TEST_CASE("scheme preconditions") {
  const auto H = hamiltonian();
  CHECK_THROWS_AS(solve_scheme(H, sine, 0.3, 1.0, 0.01), PreconditionError);
  CHECK_THROWS_AS(solve_scheme(H, sine, 0.5, 1.0, 0.3), PreconditionError);
  CHECK_THROWS_AS(solve_scheme(H, sine, 0.5, -1.0, 1.0 / 64), PreconditionError);
  SchemeOptions bad;
  bad.cfl = 0.9;
  CHECK_THROWS_AS(solve_scheme(H, sine, 0.5, 1.0, 1.0 / 64, bad), ConfigError);
  bad = SchemeOptions{};
  bad.dt = 1.0;
  CHECK_THROWS_AS(solve_scheme(H, sine, 0.5, 1.0, 1.0 / 64, bad), ConfigError);
  CHECK_THROWS_AS(solve_scheme(HamiltonianModel::separable_quadratic(2, 0.0), sine, 0.5, 1.0,
                               1.0 / 64),
                  UnsupportedError);
}

TEST_CASE("sup error") {
  const std::vector<Vec> pts = periodic_grid(3);
  CHECK(pts[1][0] == doctest::Approx(1.0 / 3));
  const ErrorReport r = sup_error({1.0, 2.0, 3.0}, {1.0, 2.5, 3.0}, pts);
  CHECK(r.sup_error == 0.5);
  CHECK(r.index == 1);
  CHECK(r.location == pts[1]);
  CHECK(sup_error({1.0, 2.0}, {1.0, 2.0}, periodic_grid(2)).sup_error == 0.0);
  CHECK_THROWS_AS(sup_error({1.0}, {1.0, 2.0}, pts), PreconditionError);
  CHECK_THROWS_AS(periodic_grid(0), PreconditionError);
}

TEST_CASE("integer time shifts of the window leave metric values unchanged") {
  const LagrangianModel L(hamiltonian(1.0));
  const double a = compute_metric(L, MetricQuery::make(-1.3, 0.0, {0.2}, {0.9})).value;
  const double b = compute_metric(L, MetricQuery::make(0.7, 2.0, {0.2}, {0.9})).value;
  const double c = compute_metric(L, MetricQuery::make(0.7, 2.0, {3.2}, {3.9})).value;
  CHECK(std::abs(a - b) <= 1e-8);
  CHECK(std::abs(a - c) <= 1e-8);
}
