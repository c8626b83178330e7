#include "hjlab/curve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hjlab/errors.hpp"

namespace hjlab {

namespace {

// Knots closer than this are treated as the same instant.
double knot_eps(double scale) { return 1e-12 * std::max(1.0, std::abs(scale)); }

}  // namespace

Curve::Curve(Vec knots, Vec nodes, int dim)
    : knots_(std::move(knots)), nodes_(std::move(nodes)), dim_(dim) {
  if (dim_ < 1) throw PreconditionError("Curve: dimension must be positive");
  if (knots_.size() < 2) throw PreconditionError("Curve: needs at least one segment");
  if (nodes_.size() != knots_.size() * static_cast<std::size_t>(dim_))
    throw PreconditionError("Curve: node count does not match knot count");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!std::isfinite(knots_[i])) throw PreconditionError("Curve: non-finite knot");
    if (i > 0 && !(knots_[i] > knots_[i - 1]))
      throw PreconditionError("Curve: knots must be strictly increasing (index " +
                              std::to_string(i) + ")");
  }
  for (double c : nodes_)
    if (!std::isfinite(c)) throw PreconditionError("Curve: non-finite node");
}

Curve Curve::straight(double s0, double s1, std::span<const double> a,
                      std::span<const double> b, int segments) {
  if (segments < 1) throw PreconditionError("Curve::straight: segments must be >= 1");
  if (a.size() != b.size()) throw PreconditionError("Curve::straight: dimension mismatch");
  const std::size_t d = a.size();
  Vec knots(static_cast<std::size_t>(segments) + 1);
  Vec nodes(knots.size() * d);
  for (int k = 0; k <= segments; ++k) {
    const double f = static_cast<double>(k) / segments;
    knots[static_cast<std::size_t>(k)] = k == segments ? s1 : s0 + f * (s1 - s0);
    for (std::size_t i = 0; i < d; ++i)
      nodes[static_cast<std::size_t>(k) * d + i] =
          k == segments ? b[i] : a[i] + f * (b[i] - a[i]);
  }
  return Curve(std::move(knots), std::move(nodes), static_cast<int>(d));
}

std::size_t Curve::locate(double s) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), s);
  if (it == knots_.begin()) return 0;
  const auto idx = static_cast<std::size_t>(it - knots_.begin()) - 1;
  return std::min(idx, segment_count() - 1);
}

Vec Curve::at(double s) const {
  s = std::clamp(s, start_time(), end_time());
  const std::size_t k = locate(s);
  const double f = (s - knots_[k]) / (knots_[k + 1] - knots_[k]);
  const auto d = static_cast<std::size_t>(dim_);
  Vec out(d);
  for (std::size_t i = 0; i < d; ++i)
    out[i] = nodes_[k * d + i] + f * (nodes_[(k + 1) * d + i] - nodes_[k * d + i]);
  return out;
}

Vec Curve::velocity(std::size_t segment) const {
  const auto d = static_cast<std::size_t>(dim_);
  const double ds = knots_[segment + 1] - knots_[segment];
  Vec v(d);
  for (std::size_t i = 0; i < d; ++i)
    v[i] = (nodes_[(segment + 1) * d + i] - nodes_[segment * d + i]) / ds;
  return v;
}

Curve Curve::restricted(double a, double b) const {
  const double eps = knot_eps(end_time());
  if (a < start_time() - eps || b > end_time() + eps || !(b > a + eps))
    throw PreconditionError("Curve::restricted: [" + std::to_string(a) + ", " +
                            std::to_string(b) + "] not a proper subinterval");
  a = std::max(a, start_time());
  b = std::min(b, end_time());
  const auto d = static_cast<std::size_t>(dim_);
  Vec knots{a};
  Vec nodes = at(a);
  for (std::size_t k = 0; k < knots_.size(); ++k) {
    if (knots_[k] > a + eps && knots_[k] < b - eps) {
      knots.push_back(knots_[k]);
      nodes.insert(nodes.end(), nodes_.begin() + static_cast<std::ptrdiff_t>(k * d),
                   nodes_.begin() + static_cast<std::ptrdiff_t>((k + 1) * d));
    }
  }
  knots.push_back(b);
  const Vec end = at(b);
  nodes.insert(nodes.end(), end.begin(), end.end());
  return Curve(std::move(knots), std::move(nodes), dim_);
}

Curve Curve::shifted(double dt, std::span<const double> dx) const {
  if (dx.size() != static_cast<std::size_t>(dim_))
    throw PreconditionError("Curve::shifted: dimension mismatch");
  Vec knots = knots_;
  for (double& s : knots) s += dt;
  Vec nodes = nodes_;
  const auto d = static_cast<std::size_t>(dim_);
  for (std::size_t k = 0; k < knots.size(); ++k)
    for (std::size_t i = 0; i < d; ++i) nodes[k * d + i] += dx[i];
  return Curve(std::move(knots), std::move(nodes), dim_);
}

Curve Curve::retimed(double new_start, double factor) const {
  if (!(factor > 0.0)) throw PreconditionError("Curve::retimed: factor must be positive");
  Vec knots = knots_;
  const double s0 = start_time();
  for (double& s : knots) s = new_start + (s - s0) / factor;
  return Curve(std::move(knots), nodes_, dim_);
}

Curve Curve::space_time_lift() const {
  const auto d = static_cast<std::size_t>(dim_);
  Vec nodes;
  nodes.reserve(knots_.size() * (d + 1));
  for (std::size_t k = 0; k < knots_.size(); ++k) {
    for (std::size_t i = 0; i < d; ++i) nodes.push_back(nodes_[k * d + i]);
    nodes.push_back(knots_[k]);
  }
  return Curve(knots_, std::move(nodes), dim_ + 1);
}

Curve Curve::resampled(int segments) const {
  if (segments < 1) throw PreconditionError("Curve::resampled: segments must be >= 1");
  Vec knots(static_cast<std::size_t>(segments) + 1);
  Vec nodes;
  nodes.reserve(knots.size() * static_cast<std::size_t>(dim_));
  for (int k = 0; k <= segments; ++k) {
    const double s = k == segments
                         ? end_time()
                         : start_time() + duration() * static_cast<double>(k) / segments;
    knots[static_cast<std::size_t>(k)] = s;
    const Vec p = at(s);
    nodes.insert(nodes.end(), p.begin(), p.end());
  }
  return Curve(std::move(knots), std::move(nodes), dim_);
}

// ---------------------------------------------------------------------------

void CurveBuilder::append(const Curve& piece) {
  if (piece.dimension() != dim_)
    throw PreconditionError("CurveBuilder::append: dimension mismatch");
  const auto d = static_cast<std::size_t>(dim_);
  std::size_t first = 0;
  if (!knots_.empty()) {
    if (std::abs(piece.start_time() - end_time()) > knot_eps(end_time()))
      throw PreconditionError("CurveBuilder::append: piece starts at " +
                              std::to_string(piece.start_time()) + ", expected " +
                              std::to_string(end_time()));
    double gap = 0.0;
    const auto tail = nodes_.end() - static_cast<std::ptrdiff_t>(d);
    for (std::size_t i = 0; i < d; ++i) {
      const double diff = piece.front()[i] - tail[static_cast<std::ptrdiff_t>(i)];
      gap += diff * diff;
    }
    max_gap_ = std::max(max_gap_, std::sqrt(gap));
    knots_.pop_back();
    nodes_.resize(nodes_.size() - d);
  }
  for (std::size_t k = first; k < piece.knot_count(); ++k) {
    knots_.push_back(piece.knot(k));
    const auto p = piece.node(k);
    nodes_.insert(nodes_.end(), p.begin(), p.end());
  }
}

void CurveBuilder::append_straight_to(double end, std::span<const double> to,
                                      double max_step) {
  if (knots_.empty())
    throw PreconditionError("CurveBuilder::append_straight_to: builder is empty");
  const double start = end_time();
  if (!(end > start)) throw PreconditionError("CurveBuilder: straight run needs end > start");
  const int segments =
      std::max(1, static_cast<int>(std::ceil((end - start) / max_step - 1e-9)));
  const Vec from = end_point();
  append(Curve::straight(start, end, from, to, segments));
}

Vec CurveBuilder::end_point() const {
  const auto d = static_cast<std::size_t>(dim_);
  return Vec(nodes_.end() - static_cast<std::ptrdiff_t>(d), nodes_.end());
}

Curve CurveBuilder::build() const { return Curve(knots_, nodes_, dim_); }

// ---------------------------------------------------------------------------

double action_of_curve(const LagrangianModel& L, const Curve& c) {
  const auto d = static_cast<std::size_t>(c.dimension());
  if (static_cast<int>(d) != L.dimension())
    throw PreconditionError("action_of_curve: curve and Lagrangian dimensions differ");
  Vec mid(d), vel(d);
  double total = 0.0;
  for (std::size_t k = 0; k < c.segment_count(); ++k) {
    const double ds = c.knot(k + 1) - c.knot(k);
    const auto a = c.node(k);
    const auto b = c.node(k + 1);
    for (std::size_t i = 0; i < d; ++i) {
      mid[i] = 0.5 * (a[i] + b[i]);
      vel[i] = (b[i] - a[i]) / ds;
    }
    total += ds * L(mid, 0.5 * (c.knot(k) + c.knot(k + 1)), vel);
  }
  return total;
}

double velocity_power_integral(const Curve& c, double m) {
  double total = 0.0;
  for (std::size_t k = 0; k < c.segment_count(); ++k) {
    const Vec v = c.velocity(k);
    double s = 0.0;
    for (double x : v) s += x * x;
    total += (c.knot(k + 1) - c.knot(k)) * std::pow(std::sqrt(s), m);
  }
  return total;
}

}  // namespace hjlab
