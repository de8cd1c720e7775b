#include "reachsdp/linear_ellipsoid.h"

#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

namespace reachsdp {

namespace {

void RequireSpd(const Eigen::MatrixXd& m, int n, const char* name) {
  if (m.rows() != n || m.cols() != n) {
    throw std::invalid_argument(std::string(name) + " must be " + std::to_string(n) +
                                "x" + std::to_string(n));
  }
  if (!m.isApprox(m.transpose(), 1e-12)) {
    throw std::invalid_argument(std::string(name) + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues()[0] > 0.0)) {
    throw std::invalid_argument(std::string(name) + " must be positive definite");
  }
}

Polynomial QuadraticForm(const Eigen::MatrixXd& v) {
  const int n = static_cast<int>(v.rows());
  Polynomial q(n);
  for (int i = 0; i < n; ++i) {
    const auto xi = Polynomial::Variable(n, i);
    for (int j = 0; j < n; ++j) {
      if (v(i, j) != 0.0) q += v(i, j) * (xi * Polynomial::Variable(n, j));
    }
  }
  return q;
}

}  // namespace

void LinearReachProblem::Validate() const {
  const int n = n_vars();
  if (n == 0 || A.cols() != n) throw std::invalid_argument("A must be square and nonempty");
  RequireSpd(V0, n, "V0");
  RequireSpd(G, n, "G");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(V0 - G, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()[0] < -1e-9) {
    throw std::invalid_argument("initial ellipsoid is not contained in the state ellipsoid");
  }
}

DomainGeometry LinearReachProblem::StateGeometry() const {
  return DomainGeometry::MakeEllipsoid(Eigen::VectorXd::Zero(n_vars()), G);
}

DomainGeometry LinearReachProblem::InitGeometry() const {
  return DomainGeometry::MakeEllipsoid(Eigen::VectorXd::Zero(n_vars()), V0);
}

Eigen::MatrixXd SecondMomentMatrix(const DomainGeometry& g) {
  const int n = g.n_vars();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      m(i, j) = m(j, i) =
          GeometryMoment(g, Monomial::Unit(n, i) * Monomial::Unit(n, j));
    }
  }
  return m;
}

ConicProgram AssembleLinear(const LinearReachProblem& p, const Eigen::MatrixXd& m) {
  p.Validate();
  const int n = p.n_vars();
  const int dim = n * (n + 1) / 2;
  ConicProgram prog;
  prog.cones = {{ConeKind::kPsd, n}, {ConeKind::kPsd, n}, {ConeKind::kPsd, n}};
  prog.b = Svec(m);
  prog.c = Eigen::VectorXd::Zero(3 * dim);
  prog.c.segment(0, dim) = Svec(p.V0);
  prog.c.segment(2 * dim, dim) =
      -kLinearEpsilon * Svec(Eigen::MatrixXd::Identity(n, n));
  // Row i is the basis matrix E_i = Smat(e_i); slack blocks are V0 − V,
  // V − AᵀVA and V − εI, written as c − Aᵀy.
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < dim; ++i) {
    const Eigen::MatrixXd e = Smat(Eigen::VectorXd::Unit(dim, i), n);
    const Eigen::VectorXd blocks[] = {
        Svec(e),
        -Svec(e - p.A.transpose() * e * p.A),
        -Svec(e),
    };
    for (int b = 0; b < 3; ++b) {
      for (int j = 0; j < dim; ++j) {
        if (blocks[b][j] != 0.0) trips.emplace_back(i, b * dim + j, blocks[b][j]);
      }
    }
  }
  prog.A.resize(dim, 3 * dim);
  prog.A.setFromTriplets(trips.begin(), trips.end());
  prog.Validate();
  return prog;
}

Certificate QuadraticCertificate(const LinearReachProblem& p, const Eigen::MatrixXd& v) {
  const int n = p.n_vars();
  const Polynomial q = QuadraticForm(v);
  const auto geometry = p.StateGeometry();
  Certificate cert;
  cert.variables = DefaultVariableNames(n);
  cert.r = 1;
  cert.u_zero = true;
  cert.u = 0.0;
  cert.v = (Polynomial::Constant(n, 1.0) - q).Clean();
  cert.w = (Polynomial::Constant(n, 2.0) - q).Clean();
  cert.objective =
      2.0 * geometry.Volume() - (SecondMomentMatrix(geometry) * v).trace();
  cert.state_box = geometry.BoundingBox();
  cert.frame = AffineFrame::Identity(n);
  return cert;
}

LinearResult SolveLinearEllipsoid(const LinearReachProblem& p, const SdpBackend& backend,
                                  const SolverOptions& opts) {
  const Eigen::MatrixXd m = SecondMomentMatrix(p.StateGeometry());
  const ConicProgram prog = AssembleLinear(p, m);
  LinearResult out;
  out.solution = backend.Solve(prog, opts);
  if (out.solution.status != SolveStatus::kOptimal &&
      out.solution.status != SolveStatus::kNearOptimal) {
    throw SolveFailure(out.solution.status, out.solution.residuals);
  }
  out.V = Smat(out.solution.y, p.n_vars());
  out.objective = (m * out.V).trace();
  out.certificate = QuadraticCertificate(p, out.V);
  return out;
}

ReachProblem ToReachProblem(const LinearReachProblem& p) {
  p.Validate();
  const int n = p.n_vars();
  std::vector<Polynomial> f;
  for (int i = 0; i < n; ++i) {
    Polynomial fi(n);
    for (int j = 0; j < n; ++j) {
      if (p.A(i, j) != 0.0) fi += p.A(i, j) * Polynomial::Variable(n, j);
    }
    f.push_back(std::move(fi));
  }
  const auto init = p.InitGeometry();
  const auto state = p.StateGeometry();
  return MakeReachProblem("linear", std::move(f), init.Inequalities(),
                          state.Inequalities(), state, init, 100, true);
}

}  // namespace reachsdp
