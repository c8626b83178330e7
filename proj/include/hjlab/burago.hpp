#pragma once

#include <utility>
#include <vector>

#include "hjlab/curve.hpp"

namespace hjlab {

/// Disjoint subintervals [a_i, b_i] of a path's domain whose endpoint
/// displacements sum to half of the total displacement.
struct BuragoDecomposition {
  std::vector<std::pair<double, double>> intervals;
  int k = 0;
  /// |sum_i (xi(b_i) - xi(a_i)) - (xi(end) - xi(start)) / 2|
  double residual = 0.0;
  /// sum_i (b_i - a_i)
  double duration_sum = 0.0;
};

/// ceil((d + 1) / 2): the largest interval count accepted in dimension d.
int burago_max_intervals(int dimension);

/// Residual and duration sum of `intervals` on `xi`, recomputed from scratch.
BuragoDecomposition measure_decomposition(
    const Curve& xi, std::vector<std::pair<double, double>> intervals);

/// Scalar paths: bisection on h(s) = xi(s + T/2) - xi(s) - Delta/2, which
/// satisfies h(s0) + h(s0 + T/2) = 0 and therefore changes sign.
BuragoDecomposition burago_1d(const Curve& xi, double tol = 1e-8);

/// Paths into R^d, d >= 2. For k = 1, ..., ceil((d+1)/2): score ordered
/// endpoint tuples on a coarse grid, refine the best ones with damped
/// Gauss-Newton steps, return the first decomposition with residual <= tol.
/// `budget` caps the number of coarse candidates scored per k.
/// Throws SearchFailure (carrying the best residual) when nothing certifies.
BuragoDecomposition burago_nd(const Curve& xi, double tol = 1e-6,
                              int budget = 50000);

struct DecompositionCheck {
  bool passed = false;
  bool disjoint = false;
  bool within_domain = false;
  bool count_ok = false;
  double residual = 0.0;
};

/// Independent certificate check: disjointness, containment, the k bound
/// and the residual, all recomputed from the path.
DecompositionCheck verify_decomposition(const Curve& xi,
                                        const BuragoDecomposition& dec,
                                        double tol);

}  // namespace hjlab
