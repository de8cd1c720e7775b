#pragma once

#include <Eigen/Core>

#include "reachsdp/conic_program.h"
#include "reachsdp/geometry.h"
#include "reachsdp/relaxation.h"
#include "reachsdp/sdp_solver.h"

namespace reachsdp {

/// x⁺ = A x with X⁰ = {xᵀV0x ≤ 1} and X = {xᵀGx ≤ 1}.
struct LinearReachProblem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd V0;
  Eigen::MatrixXd G;

  int n_vars() const { return static_cast<int>(A.rows()); }
  /// Throws std::invalid_argument on shape mismatch, asymmetric or
  /// indefinite V0/G, or λ_min(V0 − G) < −1e−9.
  void Validate() const;
  DomainGeometry StateGeometry() const;
  DomainGeometry InitGeometry() const;
};

/// Lower bound ε in V ⪰ εI.
inline constexpr double kLinearEpsilon = 1e-8;

/// Degree-two Lebesgue moments M_ij = ∫ x_i x_j dλ over the geometry.
Eigen::MatrixXd SecondMomentMatrix(const DomainGeometry& g);

/// max trace(M V) s.t. V0 ⪰ V, V ⪰ AᵀVA, V ⪰ εI, in the LMI form of the
/// conic dual: y = svec(V), objective bᵀy.
ConicProgram AssembleLinear(const LinearReachProblem& p, const Eigen::MatrixXd& m);

/// Quadratic outer certificate: u = 0, v = 1 − xᵀVx, w = 2 − xᵀVx.
Certificate QuadraticCertificate(const LinearReachProblem& p, const Eigen::MatrixXd& v);

struct LinearResult {
  Solution solution;
  Eigen::MatrixXd V;
  double objective = 0.0;  // trace(M V)
  Certificate certificate;
};

/// Throws SolveFailure unless the solve is optimal or near-optimal.
LinearResult SolveLinearEllipsoid(const LinearReachProblem& p, const SdpBackend& backend,
                                  const SolverOptions& opts);

/// The same data as a generic problem (ellipsoid geometries, u = 0).
ReachProblem ToReachProblem(const LinearReachProblem& p);

}  // namespace reachsdp
