#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "reachsdp/monomial.h"
#include "reachsdp/polynomial.h"
#include "test_support.h"

namespace reachsdp {
namespace {

using test::C;
using test::X;

// Brute-force count of β ∈ ℕⁿ with |β| ≤ r.
int CountExponents(int n, int r) {
  int count = 0;
  std::vector<int> e(n, 0);
  while (true) {
    int sum = 0;
    for (int v : e) sum += v;
    if (sum <= r) ++count;
    int i = 0;
    while (i < n && ++e[i] > r) e[i++] = 0;
    if (i == n) break;
  }
  return count;
}

TEST(MonomialBasisTest, SmallBasisOrder) {
  const MonomialBasis b = EnumerateBasis(2, 1);
  ASSERT_EQ(b.size(), 3);
  EXPECT_EQ(b[0], Monomial({0, 0}));
  EXPECT_EQ(b[1], Monomial({0, 1}));
  EXPECT_EQ(b[2], Monomial({1, 0}));
}

TEST(MonomialBasisTest, SizesMatchEnumeration) {
  EXPECT_EQ(EnumerateBasis(2, 2).size(), 6);
  EXPECT_EQ(EnumerateBasis(3, 3).size(), 20);
  for (int n = 1; n <= 4; ++n) {
    for (int r = 0; r <= 8; ++r) {
      const MonomialBasis b = EnumerateBasis(n, r);
      EXPECT_EQ(b.size(), CountExponents(n, r)) << "n=" << n << " r=" << r;
      EXPECT_EQ(b.size(), Binomial(n + r, r));
    }
  }
}

TEST(MonomialBasisTest, GradedOrderAndLookup) {
  const MonomialBasis b = EnumerateBasis(3, 4);
  std::set<Monomial> seen;
  for (int i = 0; i < b.size(); ++i) {
    EXPECT_EQ(b.IndexOf(b[i]), i);
    EXPECT_TRUE(seen.insert(b[i]).second);
    if (i > 0) {
      EXPECT_LE(b[i - 1].degree(), b[i].degree());
      EXPECT_LT(b[i - 1], b[i]);
    }
  }
  EXPECT_EQ(b.IndexOf(Monomial({5, 0, 0})), -1);
  // Truncation to lower degree is a prefix.
  const MonomialBasis small = EnumerateBasis(3, 2);
  EXPECT_EQ(b.PrefixSize(2), small.size());
  for (int i = 0; i < small.size(); ++i) EXPECT_EQ(b[i], small[i]);
}

TEST(MonomialTest, RejectsNegativeExponent) {
  EXPECT_THROW(Monomial({1, -1}), std::invalid_argument);
}

TEST(PolynomialTest, Arithmetic) {
  const int n = 2;
  EXPECT_EQ(X(n, 0) * X(n, 0), Polynomial::FromMonomial(Monomial({2, 0})));
  const Polynomial toy1 = 0.5 * (X(n, 0) + 2.0 * X(n, 0) * X(n, 1));
  EXPECT_EQ(toy1.num_terms(), 2);
  EXPECT_EQ(toy1.coeff(Monomial({1, 0})), 0.5);
  EXPECT_EQ(toy1.coeff(Monomial({1, 1})), 1.0);
  const Polynomial s = X(n, 0) + X(n, 1);
  const Polynomial zero = s - s;
  EXPECT_TRUE(zero.is_zero());
  EXPECT_TRUE(zero.terms().empty());
  EXPECT_EQ(zero.degree(), 0);
}

TEST(PolynomialTest, VariableCountMismatchThrows) {
  EXPECT_THROW(X(2, 0) + X(3, 0), std::invalid_argument);
  EXPECT_THROW(X(2, 0) * X(3, 0), std::invalid_argument);
}

TEST(PolynomialTest, Evaluate) {
  const int n = 2;
  const Polynomial diff = X(n, 0) * X(n, 0) - X(n, 1) * X(n, 1);
  EXPECT_EQ(diff.Evaluate(Eigen::Vector2d(1.0, 1.0)), 0.0);
  const Polynomial cathala2 = C(n, -0.5952) + X(n, 0) * X(n, 0);
  EXPECT_EQ(cathala2.Evaluate(Eigen::Vector2d(0.0, 0.0)), -0.5952);
  const Polynomial toy1 = 0.5 * (X(n, 0) + 2.0 * X(n, 0) * X(n, 1));
  EXPECT_DOUBLE_EQ(toy1.Evaluate(Eigen::Vector2d(0.5, 0.5)), 0.5);
  EXPECT_THROW(toy1.Evaluate(Eigen::Vector3d(0.5, 0.5, 0.5)), std::invalid_argument);
}

TEST(PolynomialTest, ComposeToyAndCathala) {
  const int n = 2;
  const std::vector<Polynomial> toy = {0.5 * (X(n, 0) + 2.0 * X(n, 0) * X(n, 1)),
                                       0.5 * (X(n, 1) - 2.0 * X(n, 0).Pow(3))};
  const Polynomial composed = Compose(X(n, 1), toy);
  Polynomial expected(n);
  expected.AddTerm(Monomial({0, 1}), 0.5);
  expected.AddTerm(Monomial({3, 0}), -1.0);
  EXPECT_EQ(composed, expected);
  EXPECT_EQ(Compose(C(n, 1.0), toy), C(n, 1.0));

  const std::vector<Polynomial> cathala = {X(n, 0) + X(n, 1), C(n, -0.5952) + X(n, 0) * X(n, 0)};
  Polynomial square(n);
  square.AddTerm(Monomial({2, 0}), 1.0);
  square.AddTerm(Monomial({1, 1}), 2.0);
  square.AddTerm(Monomial({0, 2}), 1.0);
  EXPECT_EQ(Compose(X(n, 0) * X(n, 0), cathala), square);
  EXPECT_THROW(Compose(X(n, 0), std::vector<Polynomial>{X(n, 0)}), std::invalid_argument);
}

TEST(PolynomialTest, ComposeWithIdentityIsExact) {
  std::mt19937_64 gen(11);
  for (int n = 1; n <= 3; ++n) {
    std::vector<Polynomial> id;
    for (int i = 0; i < n; ++i) id.push_back(X(n, i));
    for (int trial = 0; trial < 20; ++trial) {
      const Polynomial p = test::RandomPolynomial(n, 4, 8, gen);
      EXPECT_EQ(Compose(p, id), p);
    }
  }
}

TEST(PolynomialTest, ProductAndCompositionEvaluateConsistently) {
  std::mt19937_64 gen(12);
  for (int n = 1; n <= 3; ++n) {
    for (int trial = 0; trial < 100; ++trial) {
      const Polynomial p = test::RandomPolynomial(n, 4, 6, gen);
      const Polynomial q = test::RandomPolynomial(n, 4, 6, gen);
      const Eigen::VectorXd x = test::RandomPoint(n, gen);
      const double expected = p.Evaluate(x) * q.Evaluate(x);
      EXPECT_NEAR((p * q).Evaluate(x), expected, 1e-10 * std::max(1.0, std::abs(expected)));

      std::vector<Polynomial> f;
      Eigen::VectorXd fx(n);
      for (int i = 0; i < n; ++i) {
        f.push_back(test::RandomPolynomial(n, 2, 4, gen));
        fx[i] = f.back().Evaluate(x);
      }
      const double direct = p.Evaluate(fx);
      EXPECT_NEAR(Compose(p, f).Evaluate(x), direct, 1e-9 * std::max(1.0, std::abs(direct)));
      EXPECT_LE(Compose(p, f).degree(), p.degree() * 2);
    }
  }
}

TEST(PolynomialTest, CoefficientVector) {
  const int n = 2;
  const MonomialBasis b = EnumerateBasis(n, 2);
  EXPECT_TRUE(CoefficientVector(Polynomial(n), b).isZero());
  const Eigen::VectorXd v = CoefficientVector(C(n, 1.0) + X(n, 0) * X(n, 1), b);
  EXPECT_EQ((v.array() != 0.0).count(), 2);
  EXPECT_EQ(v[b.IndexOf(Monomial({0, 0}))], 1.0);
  EXPECT_EQ(v[b.IndexOf(Monomial({1, 1}))], 1.0);
  try {
    CoefficientVector(X(n, 0).Pow(3), b);
    FAIL() << "expected a degree overflow";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("x1^3"), std::string::npos) << e.what();
  }
}

TEST(PolynomialTest, CoefficientVectorRoundTrip) {
  std::mt19937_64 gen(13);
  for (int n = 1; n <= 3; ++n) {
    const MonomialBasis b = EnumerateBasis(n, 5);
    for (int trial = 0; trial < 20; ++trial) {
      const Polynomial p = test::RandomPolynomial(n, 5, 10, gen);
      EXPECT_EQ(FromCoefficientVector(CoefficientVector(p, b), b), p);
    }
  }
}

TEST(PolynomialTest, CleanPrunesSmallCoefficients) {
  const int n = 1;
  const Polynomial p = C(n, 1e-13) + 2.0 * X(n, 0) + 1e-11 * X(n, 0).Pow(2);
  const Polynomial cleaned = p.Clean();
  EXPECT_EQ(cleaned.num_terms(), 2);
  EXPECT_EQ(cleaned.constant_term(), 0.0);
  EXPECT_EQ(p.Clean(1e-10).num_terms(), 1);
}

TEST(PolynomialTest, ToStringUsesShortestRoundTrip) {
  const int n = 2;
  const std::vector<std::string> names = {"a", "b"};
  EXPECT_EQ(ToString(0.5 * X(n, 0) - C(n, 2.0), names), "-2 + 0.5*a");
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_EQ(std::stod(FormatDouble(1.0 / 3.0)), 1.0 / 3.0);
}

}  // namespace
}  // namespace reachsdp
