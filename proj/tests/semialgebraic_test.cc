#include <vector>

#include <gtest/gtest.h>

#include "reachsdp/semialgebraic.h"
#include "test_support.h"

namespace reachsdp {
namespace {

using test::C;
using test::X;

Polynomial Ball(int n, double radius_sq) {
  Polynomial g = C(n, radius_sq);
  for (int i = 0; i < n; ++i) g -= X(n, i) * X(n, i);
  return g;
}

int CountBalls(const SemialgebraicSet& s) {
  int count = 0;
  for (const auto& g : s.inequalities()) count += IsBallConstraint(g);
  return count;
}

TEST(SemialgebraicSetTest, RejectsEmptyAndMixedSets) {
  EXPECT_THROW(SemialgebraicSet(std::vector<Polynomial>{}), std::invalid_argument);
  EXPECT_THROW(SemialgebraicSet({X(2, 0), X(3, 0)}), std::invalid_argument);
}

TEST(SemialgebraicSetTest, HalfDegrees) {
  EXPECT_EQ(SemialgebraicSet({Ball(2, 1.0)}).HalfDegrees(), std::vector<int>{1});
  const int n = 2;
  const Polynomial cathala_init =
      C(n, 0.16) - (X(n, 0) + C(n, 0.6)).Pow(2) - (X(n, 1) - C(n, 0.5)).Pow(2);
  EXPECT_EQ(SemialgebraicSet({cathala_init}).HalfDegrees(), std::vector<int>{1});
  EXPECT_EQ(SemialgebraicSet({C(n, 1.0) - X(n, 0).Pow(3)}).HalfDegrees(), std::vector<int>{2});
}

TEST(SemialgebraicSetTest, Contains) {
  const SemialgebraicSet disk({Ball(2, 1.0)});
  EXPECT_TRUE(disk.Contains(Eigen::Vector2d(0.5, 0.5)));
  EXPECT_FALSE(disk.Contains(Eigen::Vector2d(0.8, 0.8)));
}

TEST(ArchimedeanTest, BallAlreadyPresent) {
  const SemialgebraicSet disk({Ball(2, 1.0)});
  const auto r = ValidateArchimedean(disk, std::nullopt);
  EXPECT_FALSE(r.augmented);
  EXPECT_EQ(r.set.size(), 1);
  EXPECT_EQ(r.bound, 1.0);
}

TEST(ArchimedeanTest, BoxIsAugmentedWithHint) {
  const int n = 3;
  const double lo[] = {-0.5, -0.5, -0.5};
  const double hi[] = {1.5, 0.5, 0.5};
  std::vector<Polynomial> facets;
  for (int i = 0; i < n; ++i) {
    facets.push_back(X(n, i) - C(n, lo[i]));
    facets.push_back(C(n, hi[i]) - X(n, i));
  }
  const auto box = DomainGeometry::MakeBox(Eigen::Vector3d(lo[0], lo[1], lo[2]),
                                           Eigen::Vector3d(hi[0], hi[1], hi[2]));
  EXPECT_DOUBLE_EQ(box.BallBoundHint(), 1.5 * 1.5 + 0.5 * 0.5 + 0.5 * 0.5);
  const auto r = ValidateArchimedean(SemialgebraicSet(facets), box.BallBoundHint());
  EXPECT_TRUE(r.augmented);
  ASSERT_EQ(r.set.size(), 7);
  EXPECT_EQ(CountBalls(r.set), 1);
  EXPECT_DOUBLE_EQ(r.set.inequalities().back().Evaluate(Eigen::Vector3d::Zero()), 2.75);
}

TEST(ArchimedeanTest, LinearSetWithoutHintFails) {
  const SemialgebraicSet half({X(2, 0)});
  EXPECT_THROW(ValidateArchimedean(half, std::nullopt), std::invalid_argument);
  EXPECT_THROW(ValidateArchimedean(half, -1.0), std::invalid_argument);
}

TEST(ArchimedeanTest, BallDetection) {
  const int n = 2;
  EXPECT_TRUE(IsBallConstraint(Ball(n, 3.0)));
  EXPECT_FALSE(IsBallConstraint(Ball(n, -1.0)));
  EXPECT_FALSE(IsBallConstraint(Ball(n, 1.0) + X(n, 0)));
  EXPECT_FALSE(IsBallConstraint(Ball(n, 1.0) + X(n, 0) * X(n, 1)));
  EXPECT_FALSE(IsBallConstraint(C(n, 1.0) - 2.0 * X(n, 0) * X(n, 0) - X(n, 1) * X(n, 1)));
}

TEST(DynamicalSystemTest, DegreeAndShape) {
  const int n = 2;
  const DynamicalSystem toy({0.5 * (X(n, 0) + 2.0 * X(n, 0) * X(n, 1)),
                             0.5 * (X(n, 1) - 2.0 * X(n, 0).Pow(3))});
  EXPECT_EQ(toy.degree(), 3);
  EXPECT_EQ(DynamicalSystem({C(n, 1.0), C(n, 2.0)}).degree(), 1);
  EXPECT_THROW(DynamicalSystem({X(n, 0)}), std::invalid_argument);
  const Eigen::VectorXd y = toy.Apply(Eigen::Vector2d(0.5, 0.5));
  EXPECT_DOUBLE_EQ(y[0], 0.5);
  EXPECT_DOUBLE_EQ(y[1], 0.125);
}

TEST(ReachProblemTest, MinimumOrderAndAugmentation) {
  const int n = 2;
  const auto p = MakeReachProblem(
      "toy", {0.5 * (X(n, 0) + 2.0 * X(n, 0) * X(n, 1)), 0.5 * (X(n, 1) - 2.0 * X(n, 0).Pow(3))},
      {C(n, 0.0625) - (X(n, 0) - C(n, 0.5)).Pow(2) - (X(n, 1) - C(n, 0.5)).Pow(2)},
      {Ball(n, 1.0)}, DomainGeometry::UnitBall(n),
      DomainGeometry::MakeBall(Eigen::Vector2d(0.5, 0.5), 0.25), 100, false);
  EXPECT_EQ(p.MinRelaxationOrder(), 1);
  EXPECT_TRUE(p.init_augmented);
  EXPECT_FALSE(p.state_augmented);
  EXPECT_EQ(CountBalls(p.init), 1);
  EXPECT_EQ(CountBalls(p.state), 1);
  EXPECT_THROW(MakeReachProblem("bad", {X(n, 0), X(n, 1)}, {X(n, 0)}, {Ball(3, 1.0)},
                                DomainGeometry::UnitBall(n), std::nullopt, 100, false),
               std::invalid_argument);
}

}  // namespace
}  // namespace reachsdp
