#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "reachsdp/conic_program.h"
#include "reachsdp/geometry.h"
#include "reachsdp/polynomial.h"
#include "reachsdp/sdp_solver.h"
#include "reachsdp/semialgebraic.h"

namespace reachsdp {

/// Linear functional Σ c_α y_α over moment indices.
using MomentFunctional = std::vector<std::pair<Monomial, double>>;

/// Symbolic localizing matrix M_r(g y): entry (i, j) is the functional
/// ℓ_y(g · b_i · b_j) over the basis b of ℕⁿ_r. Entries depend only on
/// b_i·b_j, so each distinct product is expanded once.
class LocalizingMatrixSpec {
 public:
  LocalizingMatrixSpec(int n_vars, int r, const Polynomial& weight);

  const MonomialBasis& basis() const { return basis_; }
  int size() const { return basis_.size(); }
  const MomentFunctional& at(int i, int j) const;
  /// Number of distinct entry functionals.
  int distinct_entries() const { return static_cast<int>(distinct_.size()); }

  Eigen::MatrixXd Evaluate(const MomentSequence& y) const;

 private:
  MonomialBasis basis_;
  std::vector<MomentFunctional> distinct_;
  std::vector<int> entry_;  // svec layout → index into distinct_
};

/// f(x)^β expanded as a polynomial; throws std::invalid_argument if its
/// degree exceeds `max_degree`.
Polynomial PushforwardRow(const DynamicalSystem& f, const Monomial& beta,
                          int max_degree);

/// f(x)^β for every β of `basis`, built incrementally in basis order.
std::vector<Polynomial> PushforwardTable(std::span<const Polynomial> f,
                                         const MonomialBasis& basis);

/// The problem expressed in the frame that maps the state geometry onto
/// [−1,1]ⁿ (box) or the unit ball (ball, ellipsoid).
struct ScaledProblem {
  AffineFrame frame;
  std::vector<Polynomial> dynamics;
  std::vector<Polynomial> init;   // generators of X⁰, without g₀ = 1
  std::vector<Polynomial> state;  // generators of X, without g₀ = 1
  DomainGeometry geometry = DomainGeometry::UnitBall(1);
  int degree = 1;
  int horizon = 100;
  bool u_zero = false;
  int n_vars() const { return frame.n_vars(); }
};

ScaledProblem ScaleProblem(const ReachProblem& p);

/// One moment block of the primal relaxation, addressed by monomial.
struct MomentBlock {
  std::string name;
  MonomialBasis basis;
  int offset = 0;
  int Index(const Monomial& m) const;
};

/// Maps (y0, y, ŷ, z) onto the conic dual vector of the primal program and
/// the scalar a onto the slack of its nonnegative column.
struct VariableLayout {
  MomentBlock y0, y, yhat, z;
  /// Column of a, −1 when u = 0 is imposed.
  int a_column = -1;
  int size() const { return z.offset + z.basis.size(); }
  MomentSequence Extract(const MomentBlock& block, const Eigen::VectorXd& v) const;
};

struct PrimalRelaxation {
  ConicProgram program;
  VariableLayout layout;
  ScaledProblem scaled;
  int r = 1;
  /// Original-frame objective = scaled objective × volume_scale.
  double volume_scale = 1.0;
};

/// The moment relaxation: maximize y_0 subject to the mass, Liouville and
/// domination constraints and the moment/localizing matrix constraints, in
/// the LMI form of the conic dual. Its optimal value is bᵀy.
PrimalRelaxation AssemblePrimal(const ReachProblem& p, int r);

/// A quadratic-module membership target ∈ Q_k encoded by Gram blocks.
struct GramBlockSpec {
  Polynomial multiplier;  // g_j, or 1
  MonomialBasis basis;    // ℕⁿ_{k − r_j}
  int column = 0;         // first svec column
};

struct MembershipSpec {
  std::string name;
  int order = 0;  // k: coefficients matched on ℕⁿ_{2k}
  int row_offset = 0;
  MonomialBasis rows;
  std::vector<GramBlockSpec> grams;
};

struct DualRelaxation {
  ConicProgram program;
  ScaledProblem scaled;
  int r = 1;
  MonomialBasis poly_basis;  // ℕⁿ_{2r}, basis of v and w
  int u_column = -1;         // −1 when u = 0 is imposed
  int v_column = 0;
  int w_column = 0;
  std::vector<MembershipSpec> memberships;
  std::vector<Polynomial> pushforward;  // f^β over poly_basis
  double volume_scale = 1.0;
};

/// The SOS relaxation: minimize ∫ w dλ_X + u·T·vol X over v, w of degree 2r
/// and u ≥ 0 with v ∈ Q⁰, w − 1 − v ∈ Q_r, u + v∘f − v ∈ Q_{rd}, w ∈ Q_r.
DualRelaxation AssembleDual(const ReachProblem& p, int r);

/// One Gram matrix of a solved membership.
struct GramTerm {
  Polynomial multiplier;
  MonomialBasis basis;
  Eigen::MatrixXd gram;
};

struct Membership {
  std::string name;
  Polynomial target;  // in the scaled frame
  std::vector<GramTerm> terms;
};

struct Certificate {
  std::vector<std::string> variables;
  int r = 1;
  int horizon = 100;
  bool u_zero = false;
  double u = 0.0;
  Polynomial v;  // original coordinates
  Polynomial w;
  double objective = 0.0;
  /// Bounding box of X, for plotting.
  Box state_box;
  std::string problem_hash;

  /// Scaled-frame data backing the reconstruction checks.
  AffineFrame frame;
  std::vector<Membership> memberships;

  int n_vars() const { return v.n_vars(); }
  /// v(x) + u·T (u·T dropped when u = 0 is imposed).
  double Margin(const Eigen::VectorXd& x) const;
};

/// Non-optimal solver outcome with its diagnostics.
class SolveFailure : public std::runtime_error {
 public:
  SolveFailure(SolveStatus status, Residuals residuals);
  SolveStatus status() const { return status_; }
  const Residuals& residuals() const { return residuals_; }

 private:
  SolveStatus status_;
  Residuals residuals_;
};

/// Rebuilds (u, v, w) and the Gram matrices. Throws SolveFailure unless the
/// status is optimal or near-optimal.
Certificate ExtractCertificate(const DualRelaxation& relax, const Solution& sol,
                               const ReachProblem& p);

/// max_μ |coeff_μ(Σ_j bᵀQ_j b · g_j − target)| per membership.
std::vector<double> ReconstructionResiduals(const Certificate& cert);

struct DualResult {
  Solution solution;
  Certificate certificate;
  double objective = 0.0;  // d_r in the original frame
};

/// Assemble, solve and extract in one call.
DualResult SolveDual(const ReachProblem& p, int r, const SdpBackend& backend,
                     const SolverOptions& opts);

struct PrimalResult {
  Solution solution;
  double objective = 0.0;  // p_r in the original frame
};

PrimalResult SolvePrimal(const ReachProblem& p, int r, const SdpBackend& backend,
                         const SolverOptions& opts);

}  // namespace reachsdp
