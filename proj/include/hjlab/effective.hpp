#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hjlab/action.hpp"
#include "hjlab/model.hpp"

namespace hjlab {

struct HomogenizedResult {
  /// Extrapolated limit 2 a_L - a_{L-1}.
  double value = 0.0;
  /// a_j = m(2^j t, 0, 2^j t q) / 2^j for j = 0 .. levels.
  Vec level_values;
  /// a_j - a_{j-1} for j = 1 .. levels.
  Vec residuals;
};

/// Approximates mbar(t, 0, t q) / t = Lbar(q) from the doubling sequence
/// m(2^j t, 0, 2^j t q) / 2^j. Requires levels >= 2.
HomogenizedResult homogenized_metric(const LagrangianModel& L, const Vec& q,
                                     int levels,
                                     const MetricSettings& settings = {},
                                     double t = 1.0);

/// Regular tensor grid with the same axis in every dimension, stored
/// row-major (the last coordinate varies fastest).
struct TensorGrid {
  int dim = 1;
  Vec axis;

  static TensorGrid uniform(int dim, double lo, double hi, int points);
  std::size_t size() const;
  Vec point(std::size_t flat) const;
  std::vector<int> index(std::size_t flat) const;
  std::size_t flat(const std::vector<int>& idx) const;
  double step() const { return axis.size() > 1 ? axis[1] - axis[0] : 0.0; }
  double lo() const { return axis.front(); }
  double hi() const { return axis.back(); }
  /// Multilinear interpolation of grid values at q (clamped to the box).
  double interpolate(const Vec& values, const Vec& q) const;
};

struct EffectiveLagrangianTable {
  TensorGrid grid;
  Vec values;
  /// Last successive difference of the level sequence at each point.
  Vec residuals;
  int levels = 0;

  double operator()(const Vec& q) const { return grid.interpolate(values, q); }
};

struct EffectiveHamiltonianTable {
  TensorGrid grid;
  Vec values;
  /// Grid index of the maximizing q for each p.
  std::vector<std::size_t> argmax;
};

/// Tabulates Lbar(q) = homogenized_metric(L, q, levels) over the grid.
EffectiveLagrangianTable effective_lagrangian(const LagrangianModel& L,
                                              const TensorGrid& grid, int levels,
                                              const MetricSettings& settings = {},
                                              int workers = 1);

/// Midpoint convexity along grid lines: worst value of
/// (f(q-h) + f(q+h))/2 - f(q) below zero, reported as a positive number.
double convexity_violation(const TensorGrid& grid, const Vec& values);

/// Largest violation of alpha|q|^m - K <= Lbar(q) <= beta|q|^m + K.
double growth_violation(const EffectiveLagrangianTable& tab, const GrowthBounds& g);

/// Hbar(p) = max over the q-grid of p.q - Lbar(q), refined by a parabola
/// through the neighbours of the discrete maximizer along each axis.
/// Throws GridTooNarrowError if the maximizer sits on the grid boundary.
EffectiveHamiltonianTable effective_hamiltonian(const EffectiveLagrangianTable& tab,
                                                const TensorGrid& p_grid);

/// Largest violation of Hbar(p) + Lbar(q) >= p.q over all grid pairs.
double fenchel_young_violation(const EffectiveLagrangianTable& lag,
                               const EffectiveHamiltonianTable& ham);

using InitialDatum = std::function<double(const Vec&)>;

struct HopfLaxOptions {
  /// Search radius |y - x| <= radius * t; 0 picks the coercivity radius,
  /// capped by the q-grid extent.
  double radius = 0.0;
  /// Sup of |g|, used by the automatic radius.
  double g_sup = 1.0;
  /// y-grid points per unit length (per axis).
  int points_per_unit = 64;
};

struct HopfLaxResult {
  double value = 0.0;
  Vec argmin;
  bool boundary_warning = false;
};

/// Speed bound t ((2 G / t + 2 K) / alpha)^{1/m} / t for minimizers of
/// g(y) + t Lbar((x-y)/t) with |g| <= G.
double coercivity_speed(const GrowthBounds& g, double g_sup, double t);

/// u(x,t) = inf_y g(y) + t Lbar((x - y)/t) over a y-grid followed by
/// golden-section refinement along each axis.
HopfLaxResult hopf_lax_effective(const EffectiveLagrangianTable& tab,
                                 const InitialDatum& g, const Vec& x, double t,
                                 const GrowthBounds& growth,
                                 const HopfLaxOptions& opts = {});

/// CSV: q_1..q_n,value,residual with a header row.
void write_lagrangian_csv(const EffectiveLagrangianTable& tab, const std::string& path);
EffectiveLagrangianTable read_lagrangian_csv(const std::string& path);
/// CSV: p_1..p_n,value with a header row.
void write_hamiltonian_csv(const EffectiveHamiltonianTable& tab, const std::string& path);

}  // namespace hjlab
