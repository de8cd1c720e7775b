#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "reachsdp/geometry.h"
#include "reachsdp/polynomial.h"

namespace reachsdp {

/// {x : g_j(x) ≥ 0 for all j}.
class SemialgebraicSet {
 public:
  SemialgebraicSet() = default;
  /// Throws std::invalid_argument if `inequalities` is empty or the
  /// polynomials disagree on n_vars.
  explicit SemialgebraicSet(std::vector<Polynomial> inequalities);

  int n_vars() const { return n_vars_; }
  const std::vector<Polynomial>& inequalities() const { return g_; }
  int size() const { return static_cast<int>(g_.size()); }

  bool Contains(const Eigen::VectorXd& x, double tol = 0.0) const;
  /// ⌈deg g_j / 2⌉ per inequality.
  std::vector<int> HalfDegrees() const;
  int MaxHalfDegree() const;

  /// Copy with every inequality mapped through `fn`.
  template <class Fn>
  SemialgebraicSet Transform(Fn&& fn) const {
    std::vector<Polynomial> out;
    out.reserve(g_.size());
    for (const auto& g : g_) out.push_back(fn(g));
    return SemialgebraicSet(std::move(out));
  }

 private:
  int n_vars_ = 0;
  std::vector<Polynomial> g_;
};

/// True if g = N − ‖x‖² with N > 0: degree 2, quadratic part −Σx_i² within
/// 1e−9, no linear terms.
bool IsBallConstraint(const Polynomial& g);

struct ArchimedeanResult {
  SemialgebraicSet set;
  bool augmented = false;
  /// Radius-squared of the ball constraint present after the check.
  double bound = 0.0;
};

/// Appends N − ‖x‖² with N = bound_hint unless a ball constraint is already
/// present. Throws std::invalid_argument when augmentation is needed and the
/// hint is missing or non-positive.
ArchimedeanResult ValidateArchimedean(const SemialgebraicSet& set,
                                      std::optional<double> bound_hint);

/// x⁺ = f(x).
class DynamicalSystem {
 public:
  DynamicalSystem() = default;
  /// Throws std::invalid_argument unless there is one component per
  /// variable.
  explicit DynamicalSystem(std::vector<Polynomial> components);

  int n_vars() const { return static_cast<int>(f_.size()); }
  const std::vector<Polynomial>& components() const { return f_; }
  /// max deg f_i, at least 1.
  int degree() const;
  Eigen::VectorXd Apply(const Eigen::VectorXd& x) const;

 private:
  std::vector<Polynomial> f_;
};

struct ReachProblem {
  std::string name;
  std::vector<std::string> variables;
  /// X⁰ and X after the Archimedean check.
  SemialgebraicSet init;
  SemialgebraicSet state;
  bool init_augmented = false;
  bool state_augmented = false;
  DynamicalSystem system;
  int horizon = 100;
  /// Fix u = 0 instead of using the horizon.
  bool u_zero = false;
  /// Lebesgue moments of X come from this geometry.
  DomainGeometry state_geometry = DomainGeometry::UnitBall(1);
  std::optional<DomainGeometry> init_geometry;
  /// User assertion that vol X^∞ equals the volume of its closure.
  bool assume_closure_volume = false;

  int n_vars() const { return system.n_vars(); }
  /// Largest half-degree over the inequalities of X⁰ and X.
  int MinRelaxationOrder() const;
  /// Throws std::invalid_argument if the pieces disagree on n_vars.
  void Validate() const;
};

/// Builds a problem, applying the Archimedean check to both sets with
/// bound hints from the declared geometries.
ReachProblem MakeReachProblem(std::string name, std::vector<Polynomial> dynamics,
                              std::vector<Polynomial> init_inequalities,
                              std::vector<Polynomial> state_inequalities,
                              DomainGeometry state_geometry,
                              std::optional<DomainGeometry> init_geometry,
                              int horizon, bool u_zero);

}  // namespace reachsdp
