#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "reachsdp/monomial.h"
#include "reachsdp/polynomial.h"

namespace reachsdp {

/// Axis-aligned box Π [lower_i, upper_i].
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// Euclidean ball ‖x − center‖ ≤ radius.
struct Ball {
  Eigen::VectorXd center;
  double radius = 1.0;
};

/// Ellipsoid (x − center)ᵀ shape (x − center) ≤ 1 with shape ≻ 0.
struct Ellipsoid {
  Eigen::VectorXd center;
  Eigen::MatrixXd shape;
};

/// A state-space region whose Lebesgue moments are known in closed form.
class DomainGeometry {
 public:
  using Variant = std::variant<Box, Ball, Ellipsoid>;

  /// Validates invariants; throws std::invalid_argument on violation.
  explicit DomainGeometry(Variant v);

  static DomainGeometry MakeBox(Eigen::VectorXd lower, Eigen::VectorXd upper);
  static DomainGeometry MakeBall(Eigen::VectorXd center, double radius);
  static DomainGeometry MakeEllipsoid(Eigen::VectorXd center,
                                      Eigen::MatrixXd shape);
  static DomainGeometry UnitBall(int n);

  int n_vars() const { return n_vars_; }
  const Variant& variant() const { return v_; }
  bool is_box() const { return std::holds_alternative<Box>(v_); }

  bool Contains(const Eigen::VectorXd& x, double tol = 0.0) const;
  /// Tight axis-aligned bounding box.
  Box BoundingBox() const;
  double Volume() const;

  /// Defining inequalities g ≥ 0: 2n facets for a box, one quadratic
  /// otherwise.
  std::vector<Polynomial> Inequalities() const;

  /// Σ_i max(|lo_i|, |hi_i|)² over the bounding box; the smallest N for
  /// which N − ‖x‖² ≥ 0 is implied by the bounding box.
  double BallBoundHint() const;

 private:
  Variant v_;
  int n_vars_ = 0;
};

/// Affine change of variables x = center + L·s.
class AffineFrame {
 public:
  AffineFrame() = default;
  AffineFrame(Eigen::VectorXd center, Eigen::MatrixXd linear);

  static AffineFrame Identity(int n);
  /// Maps a box onto [−1,1]ⁿ and a ball or ellipsoid onto the unit ball.
  static AffineFrame ForGeometry(const DomainGeometry& g);

  int n_vars() const { return static_cast<int>(center_.size()); }
  const Eigen::VectorXd& center() const { return center_; }
  const Eigen::MatrixXd& linear() const { return linear_; }
  double AbsDeterminant() const;

  Eigen::VectorXd ToOriginal(const Eigen::VectorXd& s) const;
  Eigen::VectorXd ToScaled(const Eigen::VectorXd& x) const;

  /// p ↦ p(center + L·s).
  Polynomial PullToScaled(const Polynomial& p) const;
  /// q ↦ q(L⁻¹(x − center)).
  Polynomial PushToOriginal(const Polynomial& q) const;
  /// Conjugated map s ↦ L⁻¹(f(center + L·s) − center).
  std::vector<Polynomial> ConjugateMap(std::span<const Polynomial> f) const;

  /// Image of a geometry under x ↦ L⁻¹(x − center).
  DomainGeometry ScaledGeometry(const DomainGeometry& g) const;

 private:
  Eigen::VectorXd center_;
  Eigen::MatrixXd linear_;
  Eigen::MatrixXd inverse_;
};

/// Truncated moment sequence y_β, complete on ℕⁿ_D, stored in graded-lex
/// order.
class MomentSequence {
 public:
  MomentSequence() = default;
  MomentSequence(MonomialBasis basis, Eigen::VectorXd values);

  int n_vars() const { return basis_.n_vars(); }
  int max_degree() const { return basis_.max_degree(); }
  const MonomialBasis& basis() const { return basis_; }
  const Eigen::VectorXd& values() const { return values_; }
  double at(const Monomial& beta) const;
  /// ℓ_y(p) = Σ p_β y_β.
  double Apply(const Polynomial& p) const;

 private:
  MonomialBasis basis_;
  Eigen::VectorXd values_;
};

/// ∫ x^β dλ over the geometry, in closed form.
double GeometryMoment(const DomainGeometry& g, const Monomial& beta);

MomentSequence MomentVector(const DomainGeometry& g, int max_degree);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
};

/// Uniform sampling over the bounding box with rejection; n_samples ≥ 1000.
MonteCarloEstimate McMoment(const DomainGeometry& g, const Monomial& beta,
                            int n_samples, std::uint64_t seed);

/// Same estimator for every β in ℕⁿ_D from one sample stream.
std::vector<MonteCarloEstimate> McMomentVector(const DomainGeometry& g,
                                               int max_degree, int n_samples,
                                               std::uint64_t seed);

/// Moment (or localizing) matrix M_r(g·y) with entries ℓ_y(g·x^(β+γ)).
Eigen::MatrixXd MomentMatrix(const MomentSequence& y, int r,
                             const Polynomial& weight);

}  // namespace reachsdp
