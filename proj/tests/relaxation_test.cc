#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "reachsdp/certify.h"
#include "reachsdp/problem_file.h"
#include "reachsdp/relaxation.h"
#include "test_support.h"

namespace reachsdp {
namespace {

using test::C;
using test::X;

const ReachProblem& Toy() {
  static const ReachProblem p = LoadProblem(test::FixturePath("toy")).problem;
  return p;
}

ReachProblem Interval(double slope, bool u_zero) {
  const int n = 1;
  return MakeReachProblem("interval", {slope * X(n, 0)}, {X(n, 0) - C(n, 0.5), C(n, 1.0) - X(n, 0)},
                          {X(n, 0), C(n, 1.0) - X(n, 0)},
                          DomainGeometry::MakeBox(Eigen::VectorXd::Constant(1, 0.0),
                                                  Eigen::VectorXd::Constant(1, 1.0)),
                          DomainGeometry::MakeBox(Eigen::VectorXd::Constant(1, 0.5),
                                                  Eigen::VectorXd::Constant(1, 1.0)),
                          100, u_zero);
}

TEST(PushforwardTest, Rows) {
  const int n = 2;
  const DynamicalSystem toy({0.5 * (X(n, 0) + 2.0 * X(n, 0) * X(n, 1)),
                             0.5 * (X(n, 1) - 2.0 * X(n, 0).Pow(3))});
  EXPECT_EQ(PushforwardRow(toy, Monomial(n), 4), C(n, 1.0));
  Polynomial expected(n);
  expected.AddTerm(Monomial({0, 1}), 0.5);
  expected.AddTerm(Monomial({3, 0}), -1.0);
  EXPECT_EQ(PushforwardRow(toy, Monomial({0, 1}), 12), expected);
  EXPECT_THROW(PushforwardRow(toy, Monomial({0, 2}), 5), std::invalid_argument);

  const DynamicalSystem linear({2.0 * X(n, 0) - 3.0 * X(n, 1), X(n, 1)});
  EXPECT_EQ(PushforwardRow(linear, Monomial({1, 0}), 2), 2.0 * X(n, 0) - 3.0 * X(n, 1));

  const MonomialBasis basis(n, 4);
  const auto table = PushforwardTable(toy.components(), basis);
  for (int i = 0; i < static_cast<int>(table.size()); ++i) {
    const Monomial& beta = basis[i];
    EXPECT_EQ(table[i], PushforwardRow(toy, beta, 12)) << ToString(beta);
  }
}

TEST(LocalizingMatrixSpecTest, MatchesNumericMomentMatrix) {
  const auto disk = DomainGeometry::UnitBall(2);
  const auto y = MomentVector(disk, 8);
  const Polynomial g = C(2, 1.0) - X(2, 0) * X(2, 0) - X(2, 1) * X(2, 1);
  const LocalizingMatrixSpec spec(2, 3, g);
  EXPECT_EQ(spec.size(), 10);
  EXPECT_TRUE(spec.Evaluate(y).isApprox(MomentMatrix(y, 3, g), 1e-14));
  // Entries depend only on b_i·b_j: 10x10 entries over 28 monomials of degree ≤ 6.
  EXPECT_EQ(spec.distinct_entries(), 28);
  const int xy = spec.basis().IndexOf(Monomial({1, 1}));
  const int x2 = spec.basis().IndexOf(Monomial({2, 0}));
  EXPECT_EQ(&spec.at(xy, xy), &spec.at(x2, spec.basis().IndexOf(Monomial({0, 2}))));
}

TEST(AssemblePrimalTest, ToyDimensions) {
  const PrimalRelaxation pr = AssemblePrimal(Toy(), 2);
  EXPECT_EQ(pr.layout.y.basis.size(), 15);
  EXPECT_EQ(pr.layout.z.basis.max_degree(), 2 * 2 * 3);
  // The moment matrix of y lives on ℕ²₂.
  EXPECT_NE(std::find(pr.program.cones.begin(), pr.program.cones.end(),
                      ConeBlock{ConeKind::kPsd, 6}),
            pr.program.cones.end());
  EXPECT_EQ(pr.program.cones[0].kind, ConeKind::kFree);
  EXPECT_EQ(pr.program.cones[0].size, 2 * 15);
  EXPECT_GE(pr.layout.a_column, 0);
}

TEST(AssembleDualTest, ToyDegreeBookkeeping) {
  const DualRelaxation dr = AssembleDual(Toy(), 2);
  ASSERT_EQ(dr.memberships.size(), 4u);
  const MembershipSpec& decrease = dr.memberships[2];
  EXPECT_EQ(decrease.order, 2 * 3);
  // The g₀ = 1 Gram block of u + v∘f − v lives on ℕ²_{rd}.
  EXPECT_EQ(decrease.grams[0].basis.max_degree(), 6);
  EXPECT_EQ(decrease.grams[0].basis.size(), 28);
  EXPECT_EQ(dr.memberships[1].grams[0].basis.max_degree(), 2);
  EXPECT_EQ(dr.poly_basis.size(), 15);
}

TEST(AssembleDualTest, ObjectiveAtUnitWIsVolume) {
  const DualRelaxation dr = AssembleDual(Toy(), 2);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dr.program.n_cols());
  x[dr.w_column + dr.poly_basis.IndexOf(Monomial(2))] = 1.0;
  EXPECT_NEAR(dr.program.c.dot(x) * dr.volume_scale, std::numbers::pi, 1e-12);
}

TEST(AssembleTest, RejectsOrderBelowMinimum) {
  const int n = 1;
  const auto p = MakeReachProblem(
      "quartic", {0.5 * X(n, 0)}, {C(n, 0.25) - X(n, 0) * X(n, 0)},
      {C(n, 1.0) - X(n, 0) * X(n, 0), C(n, 1.0) - X(n, 0).Pow(4)}, DomainGeometry::UnitBall(1),
      std::nullopt, 100, false);
  EXPECT_EQ(p.MinRelaxationOrder(), 2);
  EXPECT_THROW(AssembleDual(p, 1), std::invalid_argument);
  EXPECT_THROW(AssemblePrimal(p, 1), std::invalid_argument);
  EXPECT_NO_THROW(AssembleDual(p, 2));
}

TEST(AssembleTest, UZeroDropsTheMassVariable) {
  ReachProblem p = Toy();
  p.u_zero = true;
  EXPECT_EQ(AssembleDual(p, 2).u_column, -1);
  EXPECT_EQ(AssemblePrimal(p, 2).layout.a_column, -1);
  EXPECT_EQ(AssembleDual(p, 2).program.n_cols() + 1, AssembleDual(Toy(), 2).program.n_cols());
}

TEST(SolveTest, HalvingIntervalPrimalIsBoundedByVolume) {
  const auto pr = SolvePrimal(Interval(0.5, false), 1, InteriorPointSolver(), {});
  EXPECT_TRUE(pr.solution.status == SolveStatus::kOptimal ||
              pr.solution.status == SolveStatus::kNearOptimal);
  EXPECT_LE(pr.objective, 1.0 + 1e-6);
  EXPECT_GT(pr.objective, 0.5 - 1e-6);
}

class ToyOrderFour : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dual_ = new DualResult(SolveDual(Toy(), 2, InteriorPointSolver(), {}));
  }
  static void TearDownTestSuite() { delete dual_; }
  static DualResult* dual_;
};
DualResult* ToyOrderFour::dual_ = nullptr;

TEST_F(ToyOrderFour, ConvergesAndReconstructs) {
  EXPECT_EQ(dual_->solution.status, SolveStatus::kOptimal);
  EXPECT_LT(dual_->solution.residuals.gap, 1e-8);
  const Certificate& cert = dual_->certificate;
  EXPECT_GE(cert.u, -1e-9);
  EXPECT_LE(cert.v.degree(), 4);
  EXPECT_LE(cert.w.degree(), 4);
  const auto residuals = ReconstructionResiduals(cert);
  ASSERT_EQ(residuals.size(), 4u);
  for (double r : residuals) EXPECT_LT(r, 1e-6);
}

TEST_F(ToyOrderFour, MatchesPrimalValue) {
  const auto pr = SolvePrimal(Toy(), 2, InteriorPointSolver(), {});
  const double d = dual_->objective;
  EXPECT_LE(std::abs(d - pr.objective), 1e-6 * std::max(1.0, std::abs(pr.objective)));
  EXPECT_GE(d, pr.objective - 1e-6 * std::max(1.0, std::abs(pr.objective)));
}

TEST_F(ToyOrderFour, CertificateInequalitiesHoldOnSamples) {
  const Certificate& cert = dual_->certificate;
  const auto disk = DomainGeometry::UnitBall(2);
  const SemialgebraicSet x_set = Toy().state;
  const auto pts = SampleSet(x_set, disk, 5000, 17);
  for (const auto& x : pts) {
    const double v = cert.v.Evaluate(x), w = cert.w.Evaluate(x);
    EXPECT_GE(w, -1e-6);
    if (v >= 0.0) EXPECT_GE(w, 1.0 - 1e-6);
    const Eigen::VectorXd fx = Toy().system.Apply(x);
    EXPECT_GE(cert.u + cert.v.Evaluate(fx) - v, -1e-6);
  }
}

TEST_F(ToyOrderFour, ContainsSimulatedTrajectories) {
  const Certificate& cert = dual_->certificate;
  const auto init = SampleSet(Toy().init, *Toy().init_geometry, 1000, 21);
  const auto batch = Simulate(Toy().system, init, 7, &Toy().state_geometry);
  const auto c = CheckContainment(cert, batch, 100);
  EXPECT_EQ(c.violations, 0);
  EXPECT_TRUE(c.passed());
}

TEST(ExtractCertificateTest, UZeroCertificateHasExactZero) {
  ReachProblem p = Toy();
  p.u_zero = true;
  const auto res = SolveDual(p, 2, InteriorPointSolver(), {});
  EXPECT_EQ(res.certificate.u, 0.0);
  EXPECT_TRUE(res.certificate.u_zero);
}

TEST(ExtractCertificateTest, FailedSolvePropagates) {
  const DualRelaxation dr = AssembleDual(Toy(), 2);
  Solution bad;
  bad.status = SolveStatus::kMaxIter;
  bad.residuals.primal = 0.5;
  try {
    ExtractCertificate(dr, bad, Toy());
    FAIL() << "expected SolveFailure";
  } catch (const SolveFailure& e) {
    EXPECT_EQ(e.status(), SolveStatus::kMaxIter);
    EXPECT_EQ(e.residuals().primal, 0.5);
  }
}

}  // namespace
}  // namespace reachsdp
