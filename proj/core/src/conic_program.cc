#include "reachsdp/conic_program.h"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "reachsdp/polynomial.h"

namespace reachsdp {

Eigen::VectorXd Svec(const Eigen::MatrixXd& m) {
  const int k = static_cast<int>(m.rows());
  Eigen::VectorXd v(k * (k + 1) / 2);
  int idx = 0;
  for (int j = 0; j < k; ++j) {
    v[idx++] = m(j, j);
    for (int i = j + 1; i < k; ++i) {
      v[idx++] = std::numbers::sqrt2 * 0.5 * (m(i, j) + m(j, i));
    }
  }
  return v;
}

Eigen::MatrixXd Smat(const Eigen::Ref<const Eigen::VectorXd>& v, int k) {
  if (v.size() != k * (k + 1) / 2) {
    throw std::invalid_argument("Smat: length does not match order");
  }
  Eigen::MatrixXd m(k, k);
  int idx = 0;
  for (int j = 0; j < k; ++j) {
    m(j, j) = v[idx++];
    for (int i = j + 1; i < k; ++i) {
      m(i, j) = m(j, i) = v[idx++] / std::numbers::sqrt2;
    }
  }
  return m;
}

std::vector<int> ConicProgram::BlockOffsets() const {
  std::vector<int> off;
  off.reserve(cones.size() + 1);
  int pos = 0;
  for (const auto& cone : cones) {
    off.push_back(pos);
    pos += cone.dim();
  }
  off.push_back(pos);
  return off;
}

void ConicProgram::Validate() const {
  int total = 0;
  for (const auto& cone : cones) {
    if (cone.size < 0) throw std::invalid_argument("ConicProgram: negative cone size");
    total += cone.dim();
  }
  if (total != c.size()) {
    throw std::invalid_argument("ConicProgram: cone dimension " +
                                std::to_string(total) +
                                " != objective length " +
                                std::to_string(c.size()));
  }
  if (A.cols() != c.size() || A.rows() != b.size()) {
    throw std::invalid_argument("ConicProgram: constraint matrix shape mismatch");
  }
  for (int i = 0; i < A.outerSize(); ++i) {
    bool any = false;
    for (SparseMatrix::InnerIterator it(A, i); it; ++it) {
      if (it.value() != 0.0) {
        any = true;
        break;
      }
    }
    if (!any) {
      throw std::invalid_argument("ConicProgram: row " + std::to_string(i) +
                                  " of A is empty");
    }
  }
}

std::string ToString(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kNearOptimal: return "near_optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kMaxIter: return "max_iter";
    case SolveStatus::kNumericalError: return "numerical_error";
  }
  return "unknown";
}

namespace {

// max(0, −min over the block of its eigenvalues / entries).
double ConeViolation(const ConicProgram& p, const Eigen::VectorXd& v,
                     bool dual) {
  const auto off = p.BlockOffsets();
  double worst = 0.0;
  for (std::size_t k = 0; k < p.cones.size(); ++k) {
    const auto& cone = p.cones[k];
    const auto seg = v.segment(off[k], cone.dim());
    switch (cone.kind) {
      case ConeKind::kFree:
        // The dual cone of a free block is {0}.
        if (dual && cone.size > 0) worst = std::max(worst, seg.cwiseAbs().maxCoeff());
        break;
      case ConeKind::kNonneg:
        if (cone.size > 0) worst = std::max(worst, -seg.minCoeff());
        break;
      case ConeKind::kPsd: {
        if (cone.size == 0) break;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
            Smat(seg, cone.size), Eigen::EigenvaluesOnly);
        worst = std::max(worst, -es.eigenvalues()[0]);
        break;
      }
    }
  }
  return worst;
}

}  // namespace

Residuals ComputeResiduals(const ConicProgram& p, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y, const Eigen::VectorXd& s) {
  if (x.size() != p.n_cols() || s.size() != p.n_cols() || y.size() != p.n_rows()) {
    throw std::invalid_argument("ComputeResiduals: dimension mismatch");
  }
  Residuals r;
  r.primal = (p.A * x - p.b).norm() / (1.0 + p.b.norm());
  r.dual = (p.A.transpose() * y + s - p.c).norm() / (1.0 + p.c.norm());
  const double pobj = p.c.dot(x), dobj = p.b.dot(y);
  r.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
  r.primal_cone = ConeViolation(p, x, false);
  r.dual_cone = ConeViolation(p, s, true);
  return r;
}

namespace {

const char* KindName(ConeKind k) {
  switch (k) {
    case ConeKind::kFree: return "free";
    case ConeKind::kNonneg: return "nonneg";
    case ConeKind::kPsd: return "psd";
  }
  return "?";
}

template <class T>
T ReadOrThrow(std::istream& is, const char* what) {
  T v;
  if (!(is >> v)) {
    throw std::runtime_error(std::string("ReadSparseText: expected ") + what);
  }
  return v;
}

void ExpectKeyword(std::istream& is, const std::string& kw) {
  const auto got = ReadOrThrow<std::string>(is, kw.c_str());
  if (got != kw) {
    throw std::runtime_error("ReadSparseText: expected '" + kw + "', got '" +
                             got + "'");
  }
}

}  // namespace

void WriteSparseText(const ConicProgram& p, std::ostream& os) {
  os << p.n_cols() << ' ' << p.n_rows() << '\n';
  os << "cones " << p.cones.size() << '\n';
  for (const auto& cone : p.cones) os << KindName(cone.kind) << ' ' << cone.size << '\n';
  int nnz_c = 0;
  for (int i = 0; i < p.c.size(); ++i) nnz_c += p.c[i] != 0.0;
  os << "objective " << nnz_c << '\n';
  for (int i = 0; i < p.c.size(); ++i) {
    if (p.c[i] != 0.0) os << i << ' ' << FormatDouble(p.c[i]) << '\n';
  }
  int nnz_b = 0;
  for (int i = 0; i < p.b.size(); ++i) nnz_b += p.b[i] != 0.0;
  os << "rhs " << nnz_b << '\n';
  for (int i = 0; i < p.b.size(); ++i) {
    if (p.b[i] != 0.0) os << i << ' ' << FormatDouble(p.b[i]) << '\n';
  }
  os << "matrix " << p.A.nonZeros() << '\n';
  for (int i = 0; i < p.A.outerSize(); ++i) {
    for (ConicProgram::SparseMatrix::InnerIterator it(p.A, i); it; ++it) {
      os << it.row() << ' ' << it.col() << ' ' << FormatDouble(it.value()) << '\n';
    }
  }
}

ConicProgram ReadSparseText(std::istream& is) {
  ConicProgram p;
  const int n_cols = ReadOrThrow<int>(is, "column count");
  const int n_rows = ReadOrThrow<int>(is, "row count");
  ExpectKeyword(is, "cones");
  const int n_cones = ReadOrThrow<int>(is, "cone count");
  for (int k = 0; k < n_cones; ++k) {
    const auto kind = ReadOrThrow<std::string>(is, "cone kind");
    const int size = ReadOrThrow<int>(is, "cone size");
    ConeKind ck;
    if (kind == "free") {
      ck = ConeKind::kFree;
    } else if (kind == "nonneg") {
      ck = ConeKind::kNonneg;
    } else if (kind == "psd") {
      ck = ConeKind::kPsd;
    } else {
      throw std::runtime_error("ReadSparseText: unknown cone kind '" + kind + "'");
    }
    p.cones.push_back({ck, size});
  }
  p.c = Eigen::VectorXd::Zero(n_cols);
  p.b = Eigen::VectorXd::Zero(n_rows);
  ExpectKeyword(is, "objective");
  for (int n = ReadOrThrow<int>(is, "count"); n > 0; --n) {
    const int i = ReadOrThrow<int>(is, "index");
    if (i < 0 || i >= n_cols) throw std::runtime_error("ReadSparseText: objective index out of range");
    p.c[i] = ReadOrThrow<double>(is, "value");
  }
  ExpectKeyword(is, "rhs");
  for (int n = ReadOrThrow<int>(is, "count"); n > 0; --n) {
    const int i = ReadOrThrow<int>(is, "index");
    if (i < 0 || i >= n_rows) throw std::runtime_error("ReadSparseText: rhs index out of range");
    p.b[i] = ReadOrThrow<double>(is, "value");
  }
  ExpectKeyword(is, "matrix");
  std::vector<Eigen::Triplet<double>> trips;
  for (int n = ReadOrThrow<int>(is, "count"); n > 0; --n) {
    const int i = ReadOrThrow<int>(is, "row");
    const int j = ReadOrThrow<int>(is, "col");
    const double v = ReadOrThrow<double>(is, "value");
    if (i < 0 || i >= n_rows || j < 0 || j >= n_cols) {
      throw std::runtime_error("ReadSparseText: matrix index out of range");
    }
    trips.emplace_back(i, j, v);
  }
  p.A.resize(n_rows, n_cols);
  p.A.setFromTriplets(trips.begin(), trips.end());
  p.Validate();
  return p;
}

}  // namespace reachsdp
