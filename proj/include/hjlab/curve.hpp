#pragma once

#include <span>
#include <vector>

#include "hjlab/model.hpp"

namespace hjlab {

/// A piecewise-linear curve s -> eta(s) in R^d given by time knots
/// s_0 < ... < s_N and the nodes eta(s_0), ..., eta(s_N).
///
/// The dimension d is free: a curve in R^n, a scalar path, or the
/// space-time lift (eta(s), s) in R^{n+1} all use the same type.
class Curve {
 public:
  /// Validates: N >= 1, strictly increasing finite knots,
  /// nodes.size() == knots.size() * dim.
  Curve(Vec knots, Vec nodes, int dim);

  /// Straight line from a (at s0) to b (at s1) with uniform knots.
  static Curve straight(double s0, double s1, std::span<const double> a,
                        std::span<const double> b, int segments);

  int dimension() const { return dim_; }
  std::size_t knot_count() const { return knots_.size(); }
  std::size_t segment_count() const { return knots_.size() - 1; }
  double start_time() const { return knots_.front(); }
  double end_time() const { return knots_.back(); }
  double duration() const { return end_time() - start_time(); }

  double knot(std::size_t i) const { return knots_[i]; }
  std::span<const double> node(std::size_t i) const {
    return {nodes_.data() + i * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  std::span<const double> front() const { return node(0); }
  std::span<const double> back() const { return node(knot_count() - 1); }

  const Vec& knots() const { return knots_; }
  const Vec& nodes() const { return nodes_; }

  /// eta(s) by linear interpolation; s is clamped to the domain.
  Vec at(double s) const;
  /// Constant velocity on segment i.
  Vec velocity(std::size_t segment) const;

  /// Sub-curve on [a, b]; the endpoints are inserted as knots.
  Curve restricted(double a, double b) const;
  /// (s, eta(s)) -> (s + dt, eta(s) + dx).
  Curve shifted(double dt, std::span<const double> dx) const;
  /// Reparametrizes to start at new_start and run `factor` times faster:
  /// the result at time new_start + (s - start)/factor equals eta(s).
  Curve retimed(double new_start, double factor) const;
  /// Lift s -> (eta(s), s).
  Curve space_time_lift() const;
  /// Uniform resampling with `segments` segments over the same domain.
  Curve resampled(int segments) const;

 private:
  std::size_t locate(double s) const;

  Vec knots_;
  Vec nodes_;
  int dim_;
};

/// Concatenates pieces that meet in time, recording spatial gaps at the
/// junctions. The node at a junction is taken from the later piece.
class CurveBuilder {
 public:
  explicit CurveBuilder(int dim) : dim_(dim) {}

  void append(const Curve& piece);
  /// Appends a straight segment from the current end point to `to`
  /// ending at time `end`, subdivided into pieces no longer than max_step.
  void append_straight_to(double end, std::span<const double> to,
                          double max_step);

  bool empty() const { return knots_.empty(); }
  double end_time() const { return knots_.back(); }
  Vec end_point() const;
  double max_junction_gap() const { return max_gap_; }

  Curve build() const;

 private:
  int dim_;
  Vec knots_;
  Vec nodes_;
  double max_gap_ = 0.0;
};

/// Sum over segments of ds * L(spatial midpoint, time midpoint, velocity).
double action_of_curve(const LagrangianModel& L, const Curve& c);

/// Integral of |velocity|^m over the curve.
double velocity_power_integral(const Curve& c, double m);

}  // namespace hjlab
