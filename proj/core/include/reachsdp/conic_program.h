#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace reachsdp {

enum class ConeKind { kFree, kNonneg, kPsd };

/// One block of the cone K. A PSD block of order k occupies k(k+1)/2
/// columns in svec layout.
struct ConeBlock {
  ConeKind kind = ConeKind::kFree;
  int size = 0;

  /// Number of scalar columns.
  int dim() const { return kind == ConeKind::kPsd ? size * (size + 1) / 2 : size; }
  /// Barrier degree: count for nonneg, order for PSD, 0 for free.
  int degree() const { return kind == ConeKind::kFree ? 0 : size; }

  friend bool operator==(const ConeBlock&, const ConeBlock&) = default;
};

/// Position of entry (i, j) of an order-k symmetric matrix in svec layout:
/// column-wise lower triangle, off-diagonal entries scaled by √2.
inline int SvecIndex(int k, int i, int j) {
  if (i < j) std::swap(i, j);
  return j * k - j * (j - 1) / 2 + (i - j);
}

Eigen::VectorXd Svec(const Eigen::MatrixXd& m);
Eigen::MatrixXd Smat(const Eigen::Ref<const Eigen::VectorXd>& v, int k);

/// Standard-form conic program
///
///   (P)  min cᵀx  s.t.  A x = b,  x ∈ K
///   (D)  max bᵀy  s.t.  Aᵀy + s = c,  s ∈ K*
///
/// K is a product of free, nonnegative and PSD blocks in `cones` order. The
/// dual slack of a free block is zero.
struct ConicProgram {
  using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  std::vector<ConeBlock> cones;
  Eigen::VectorXd c;
  SparseMatrix A;
  Eigen::VectorXd b;

  int n_cols() const { return static_cast<int>(c.size()); }
  int n_rows() const { return static_cast<int>(b.size()); }
  /// First column of each block, plus a final entry equal to n_cols().
  std::vector<int> BlockOffsets() const;
  /// Throws std::invalid_argument if dimensions disagree or a row of A is
  /// empty.
  void Validate() const;
};

enum class SolveStatus {
  kOptimal,
  kNearOptimal,
  kInfeasible,
  kUnbounded,
  kMaxIter,
  kNumericalError,
};

std::string ToString(SolveStatus s);

struct Residuals {
  /// ‖Ax − b‖ / (1 + ‖b‖)
  double primal = 0.0;
  /// ‖Aᵀy + s − c‖ / (1 + ‖c‖)
  double dual = 0.0;
  /// |cᵀx − bᵀy| / (1 + |cᵀx| + |bᵀy|)
  double gap = 0.0;
  /// Largest violation of x ∈ K and s ∈ K*, measured by eigenvalues.
  double primal_cone = 0.0;
  double dual_cone = 0.0;
};

struct Solution {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd s;
  SolveStatus status = SolveStatus::kNumericalError;
  int iterations = 0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  Residuals residuals;
};

/// Recomputes residuals of (x, y, s) from the program data alone.
Residuals ComputeResiduals(const ConicProgram& p, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y, const Eigen::VectorXd& s);

/// Sparse triplet text dump (format in docs/formats.md).
void WriteSparseText(const ConicProgram& p, std::ostream& os);
ConicProgram ReadSparseText(std::istream& is);

}  // namespace reachsdp
