#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hjlab {

using Vec = std::vector<double>;

enum class Family { SeparableQuadratic, PowerCoercive, CustomTable };

/// Parses "separable-quadratic", "power-coercive" or "custom-table".
/// Throws ConfigError on anything else.
Family parse_family(const std::string& name);
std::string family_name(Family family);

/// Growth constants of H and the Lagrangian constants derived from them.
///
///   alpha0 |p|^m0 - K0 <= H <= beta0 |p|^m0 + K0
///   alpha  |v|^m  - K  <= L <= beta  |v|^m  + K,     1/m + 1/m0 = 1
///
/// The Lagrangian side comes from conjugating the two power bounds, so
/// alpha uses beta0 and beta uses alpha0.
struct GrowthBounds {
  double alpha0 = 0.5;
  double beta0 = 0.5;
  double K0 = 0.0;
  double m0 = 2.0;
  double alpha = 0.5;
  double beta = 0.5;
  double K = 0.0;
  double m = 2.0;

  static GrowthBounds from_hamiltonian(double alpha0, double beta0, double K0,
                                       double m0);
};

/// Samples of H(x,t,p) for n = 1 on a regular grid; x and t nodes are
/// j/nx and k/nt (periodic), p nodes ascending and uniformly spaced.
struct HamiltonianTable {
  std::size_t nx = 0;
  std::size_t nt = 0;
  Vec p_nodes;
  Vec values;  // index ((ix * nt) + it) * np + ip

  double at(std::size_t ix, std::size_t it, std::size_t ip) const {
    return values[(ix * nt + it) * p_nodes.size() + ip];
  }
  /// Periodic trilinear interpolation; linear extrapolation in p outside
  /// the sampled range.
  double interpolate(double x, double t, double p) const;

  /// Reads a CSV with columns x,t,p,H (header optional, any row order).
  static HamiltonianTable load_csv(const std::string& path);
};

/// A Hamiltonian family H(x,t,p), Z^{n+1}-periodic in (x,t), convex in p.
///
/// separable-quadratic:
///   H = |p|^2/2 + V(x,t),
///   V = c + (A sin 2pi t + B cos 2pi t) S(x) + D C(x),
///   S(x) = mean_i sin(2pi x_i), C(x) = mean_i cos(2pi x_i).
/// power-coercive:
///   H = (1 + amp S(x) cos 2pi t) |p|^m0 + offset.
/// custom-table:
///   periodic trilinear interpolation of a HamiltonianTable (n = 1).
class HamiltonianModel {
 public:
  static HamiltonianModel separable_quadratic(int dimension, double A,
                                              double B = 0.0, double c = 0.0,
                                              double D = 0.0);
  static HamiltonianModel power_coercive(int dimension, double m0,
                                         double amplitude = 0.5,
                                         double offset = 0.0,
                                         std::optional<double> K0 = {});
  static HamiltonianModel custom_table(HamiltonianTable table,
                                       GrowthBounds growth);

  /// Builds a model from a config block. Unknown families and missing
  /// or invalid parameters raise ConfigError.
  static HamiltonianModel from_params(
      const std::string& family, const std::map<std::string, double>& params,
      int dimension, const std::optional<std::string>& table_csv = {});

  double operator()(std::span<const double> x, double t,
                    std::span<const double> p) const;

  Family family() const { return family_; }
  int dimension() const { return dimension_; }
  const GrowthBounds& growth() const { return growth_; }
  const std::map<std::string, double>& params() const { return params_; }
  double param(const std::string& key) const;
  const HamiltonianTable* table() const { return table_.get(); }
  double offset() const { return offset_; }

  /// True when H does not depend on (x,t) at all.
  bool translation_invariant() const;

  /// Separable-quadratic potential V(x,t) and its spatial gradient.
  double potential(std::span<const double> x, double t) const;
  void potential_gradient(std::span<const double> x, double t,
                          std::span<double> grad) const;
  void potential_hessian_diag(std::span<const double> x, double t,
                              std::span<double> diag) const;

  /// Power-coercive coefficient a(x,t) and its spatial gradient.
  double coefficient(std::span<const double> x, double t) const;
  void coefficient_gradient(std::span<const double> x, double t,
                            std::span<double> grad) const;

 private:
  HamiltonianModel() = default;

  Family family_ = Family::SeparableQuadratic;
  int dimension_ = 1;
  std::map<std::string, double> params_;
  GrowthBounds growth_;
  std::shared_ptr<const HamiltonianTable> table_;
  // cached parameters
  double A_ = 0, B_ = 0, c_ = 0, D_ = 0;
  double m0_ = 2, amp_ = 0, offset_ = 0;
};

/// eval_hamiltonian: H(x,t,p) with (x,t) reduced to the unit cell.
double eval_hamiltonian(const HamiltonianModel& model,
                        std::span<const double> x, double t,
                        std::span<const double> p);

enum class ConjugationMode { Analytic, NumericConjugate };

ConjugationMode parse_conjugation_mode(const std::string& name);

/// L(x,t,v) = sup_p (p.v - H(x,t,p)).
///
/// Analytic mode uses closed forms (separable-quadratic, power-coercive).
/// Numeric mode maximizes over the box |p_i| <= R with a per-axis grid
/// followed by golden-section refinement; an argmax on the box boundary
/// raises RadiusTooSmallError.
class LagrangianModel {
 public:
  explicit LagrangianModel(HamiltonianModel source);
  LagrangianModel(HamiltonianModel source, ConjugationMode mode,
                  std::optional<double> radius = {}, int grid_size = 64);

  double operator()(std::span<const double> x, double t,
                    std::span<const double> v) const;

  /// dL/dx and dL/dv. Analytic for the built-in families in analytic
  /// mode, central finite differences otherwise.
  void gradient(std::span<const double> x, double t,
                std::span<const double> v, std::span<double> grad_x,
                std::span<double> grad_v) const;

  /// Diagonals of d2L/dx2 and d2L/dv2 (analytic for separable-quadratic,
  /// finite differences of gradient() otherwise).
  void curvature(std::span<const double> x, double t,
                 std::span<const double> v, std::span<double> diag_xx,
                 std::span<double> diag_vv) const;

  /// Conjugation radius used for velocity v.
  double radius_for(std::span<const double> v) const;

  const HamiltonianModel& hamiltonian() const { return *source_; }
  ConjugationMode mode() const { return mode_; }
  int dimension() const { return source_->dimension(); }
  const GrowthBounds& growth() const { return source_->growth(); }
  int grid_size() const { return grid_size_; }
  std::optional<double> radius() const { return radius_; }

 private:
  double analytic(std::span<const double> x, double t,
                  std::span<const double> v) const;
  double numeric(std::span<const double> x, double t,
                 std::span<const double> v) const;

  std::shared_ptr<const HamiltonianModel> source_;
  ConjugationMode mode_;
  std::optional<double> radius_;
  int grid_size_;
};

/// legendre_transform: L(x,t,v) for the given Lagrangian model.
double legendre_transform(const LagrangianModel& model,
                          std::span<const double> x, double t,
                          std::span<const double> v);

struct PropertyCheck {
  std::string name;
  bool passed = true;
  double worst_violation = 0.0;
};

struct ModelReport {
  std::vector<PropertyCheck> checks;
  bool all_passed() const;
  const PropertyCheck& check(const std::string& name) const;
};

/// Samples periodicity, midpoint convexity in p and the growth sandwich.
/// Failures are report entries, never exceptions.
ModelReport verify_model(const HamiltonianModel& model, int samples,
                         double tol, std::uint64_t seed = 7);

}  // namespace hjlab
