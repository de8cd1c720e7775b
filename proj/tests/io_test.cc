#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "reachsdp/certificate_io.h"
#include "reachsdp/grid_file.h"
#include "reachsdp/poly_parser.h"
#include "reachsdp/problem_file.h"
#include "reachsdp/report_io.h"
#include "test_support.h"

namespace reachsdp {
namespace {

using test::C;
using test::X;

const std::vector<std::string> kXy = {"x", "y"};

TEST(ParsePolynomialTest, Examples) {
  const int n = 2;
  EXPECT_EQ(ParsePolynomial("x^2 - 2*x*y + 3", kXy), X(n, 0).Pow(2) - 2.0 * X(n, 0) * X(n, 1) + C(n, 3.0));
  EXPECT_EQ(ParsePolynomial("-(x + y)^2", kXy), -1.0 * (X(n, 0) + X(n, 1)).Pow(2));
  EXPECT_EQ(ParsePolynomial("  0.5 * x *y ", kXy), 0.5 * X(n, 0) * X(n, 1));
  EXPECT_EQ(ParsePolynomial("1e-3*y + -x", kXy), 1e-3 * X(n, 1) - X(n, 0));
  EXPECT_EQ(ParsePolynomial("x - x", kXy), Polynomial(n));
  EXPECT_EQ(ParsePolynomial("--x", kXy), X(n, 0));
  EXPECT_EQ(ParsePolynomial("x^0", kXy), C(n, 1.0));
}

TEST(ParsePolynomialTest, ErrorsCarryOffsets) {
  const auto offset = [](std::string_view text) -> std::size_t {
    try {
      ParsePolynomial(text, kXy);
    } catch (const PolynomialParseError& e) {
      return e.offset();
    }
    return std::string::npos;
  };
  EXPECT_EQ(offset("x + z"), 4u);
  EXPECT_EQ(offset("x +"), 3u);
  EXPECT_EQ(offset("2x"), 1u);
  EXPECT_EQ(offset("(x + y"), 6u);
  EXPECT_EQ(offset("x / y"), 2u);
  EXPECT_EQ(offset("x^65"), 2u);
  EXPECT_EQ(offset(""), 0u);
  EXPECT_NO_THROW(ParsePolynomial("x^64", kXy));
}

TEST(ParsePolynomialTest, Identifiers) {
  EXPECT_TRUE(IsValidIdentifier("x1"));
  EXPECT_TRUE(IsValidIdentifier("state_2"));
  EXPECT_FALSE(IsValidIdentifier("1x"));
  EXPECT_FALSE(IsValidIdentifier(""));
  EXPECT_FALSE(IsValidIdentifier("a-b"));
}

TEST(ParsePolynomialTest, PrintParseRoundTripOnFixtures) {
  for (const char* name : {"toy", "cathala", "fitzhugh_nagumo", "julia", "phytoplankton",
                           "example1", "example2"}) {
    const ReachProblem p = LoadProblem(test::FixturePath(name)).problem;
    std::vector<Polynomial> all = p.system.components();
    for (const auto& g : p.init.inequalities()) all.push_back(g);
    for (const auto& g : p.state.inequalities()) all.push_back(g);
    for (const auto& q : all) {
      const std::string text = ToString(q, p.variables);
      EXPECT_EQ(ParsePolynomial(text, p.variables), q) << name << ": " << text;
    }
  }
}

TEST(ProblemFileTest, FixtureShapes) {
  const LoadedProblem toy = LoadProblem(test::FixturePath("toy"));
  EXPECT_EQ(toy.problem.name, "toy");
  EXPECT_EQ(toy.problem.n_vars(), 2);
  EXPECT_EQ(toy.problem.system.degree(), 3);
  const LoadedProblem phyto = LoadProblem(test::FixturePath("phytoplankton"));
  EXPECT_EQ(phyto.problem.n_vars(), 3);
  EXPECT_EQ(phyto.problem.system.degree(), 2);
  EXPECT_EQ(phyto.options.order, 6);
  EXPECT_EQ(phyto.options.horizon, 100);
  EXPECT_EQ(ProblemHash(toy.problem), ProblemHash(LoadProblem(test::FixturePath("toy")).problem));
  EXPECT_NE(ProblemHash(toy.problem), ProblemHash(phyto.problem));
  EXPECT_EQ(ProblemHash(toy.problem).size(), 16u);
}

TEST(ProblemFileTest, DimensionMismatch) {
  const char* text = R"({
    "variables": ["a", "b"],
    "dynamics": ["a", "b", "a*b"],
    "init_set": {"inequalities": ["1 - a^2 - b^2"], "geometry": {"ball": {"center": [0, 0], "radius": 1}}},
    "state_set": {"inequalities": ["4 - a^2 - b^2"], "geometry": {"ball": {"center": [0, 0], "radius": 2}}}
  })";
  try {
    ParseProblem(text);
    FAIL() << "expected ProblemFileError";
  } catch (const ProblemFileError& e) {
    ASSERT_EQ(e.errors().size(), 1u);
    EXPECT_NE(e.errors()[0].find("3 expressions for 2 variables"), std::string::npos);
  }
}

TEST(ProblemFileTest, ReportsEveryError) {
  const char* text = R"({
    "variables": ["a", "a"],
    "dynamics": ["a"],
    "init_set": {"inequalities": []},
    "options": {"order": 5, "colour": 1}
  })";
  try {
    ParseProblem(text);
    FAIL() << "expected ProblemFileError";
  } catch (const ProblemFileError& e) {
    const auto has = [&](std::string_view s) {
      for (const auto& m : e.errors()) {
        if (m.find(s) != std::string::npos) return true;
      }
      return false;
    };
    EXPECT_TRUE(has("duplicate variable"));
    EXPECT_TRUE(has("state_set"));
    EXPECT_TRUE(has("must be even"));
    EXPECT_TRUE(has("colour"));
    EXPECT_GE(e.errors().size(), 4u);
  }
  EXPECT_THROW(ParseProblem("{not json"), ProblemFileError);
  EXPECT_THROW(LoadProblem("/nonexistent/problem.json"), ProblemFileError);
}

TEST(ProblemFileTest, ParseErrorsPointIntoExpressions) {
  const char* text = R"({
    "variables": ["a"],
    "dynamics": ["a + b"],
    "init_set": {"inequalities": ["1 - a^2"], "geometry": {"ball": {"center": [0], "radius": 1}}},
    "state_set": {"inequalities": ["4 - a^2"], "geometry": {"ball": {"center": [0], "radius": 2}}}
  })";
  try {
    ParseProblem(text);
    FAIL();
  } catch (const ProblemFileError& e) {
    ASSERT_EQ(e.errors().size(), 1u);
    EXPECT_NE(e.errors()[0].find("dynamics[0]"), std::string::npos);
  }
}

Certificate SampleCertificate() {
  Certificate cert;
  cert.variables = {"p", "q"};
  cert.r = 3;
  cert.horizon = 250;
  cert.u = 1.0 / 3.0;
  cert.v = ParsePolynomial("0.1 - p^2 - 0.7*p*q^3 + 1e-17*q", cert.variables);
  cert.w = ParsePolynomial("1 + 0.3333333333333333*p^6", cert.variables);
  cert.objective = std::nextafter(2.0, 3.0);
  cert.state_box = {Eigen::Vector2d(-1, -2), Eigen::Vector2d(1, 0.1)};
  cert.problem_hash = "0123456789abcdef";
  return cert;
}

TEST(CertificateIoTest, BitwiseRoundTrip) {
  const Certificate cert = SampleCertificate();
  const std::string text = CertificateToJson(cert);
  const Certificate back = CertificateFromJson(text);
  EXPECT_EQ(back.variables, cert.variables);
  EXPECT_EQ(back.r, 3);
  EXPECT_EQ(back.horizon, 250);
  EXPECT_EQ(back.u, cert.u);
  EXPECT_EQ(back.objective, cert.objective);
  EXPECT_EQ(back.v, cert.v);
  EXPECT_EQ(back.w, cert.w);
  EXPECT_EQ(back.state_box.lower, cert.state_box.lower);
  EXPECT_EQ(back.state_box.upper, cert.state_box.upper);
  EXPECT_EQ(back.problem_hash, cert.problem_hash);
  EXPECT_EQ(CertificateToJson(back), text);
  EXPECT_THROW(CertificateFromJson("{}"), std::invalid_argument);
  EXPECT_THROW(CertificateFromJson("[1, 2"), std::invalid_argument);
}

TEST(CertificateIoTest, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "reachsdp_io_test.cert.json";
  SaveCertificate(path, SampleCertificate());
  EXPECT_EQ(CertificateToJson(LoadCertificate(path)), CertificateToJson(SampleCertificate()));
  std::filesystem::remove(path);
}

TEST(GridFileTest, DefaultGridHasEveryPoint) {
  const Certificate cert = SampleCertificate();
  const GridSpec spec = GridSpec::Default(cert, 200);
  EXPECT_EQ(spec.rows(), 40000);
  std::stringstream ss;
  WriteGrid(ss, cert, spec);
  const GridData grid = ReadGrid(ss);
  EXPECT_EQ(grid.header, (std::vector<std::string>{"p", "q", "v", "w", "u", "T", "inside"}));
  ASSERT_EQ(grid.rows.size(), 40000u);
  int inside = 0;
  for (const auto& row : grid.rows) {
    ASSERT_EQ(row.size(), 7u);
    const Eigen::Vector2d x(row[0], row[1]);
    EXPECT_NEAR(row[2], cert.v.Evaluate(x), 1e-12);
    EXPECT_EQ(row[6] != 0.0, GridInside(row[2], row[4], row[5]));
    inside += row[6] != 0.0;
  }
  EXPECT_GT(inside, 0);
  EXPECT_EQ(grid.rows.front()[0], -1.0);
  EXPECT_EQ(grid.rows.back()[0], 1.0);
  EXPECT_EQ(grid.rows[1][1], grid.rows[0][1]);
  EXPECT_EQ(grid.rows.back()[1], 0.1);
}

TEST(GridFileTest, UZeroUsesZeroHorizon) {
  Certificate cert = SampleCertificate();
  cert.u = 0.0;
  cert.u_zero = true;
  std::stringstream ss;
  WriteGrid(ss, cert, GridSpec::Default(cert, 5));
  const GridData grid = ReadGrid(ss);
  for (const auto& row : grid.rows) EXPECT_EQ(row[5], 0.0);
  EXPECT_TRUE(GridInside(0.0, 0.0, 0.0));
  EXPECT_FALSE(GridInside(-1.0, 0.001, 100.0));
  EXPECT_TRUE(GridInside(-0.1, 0.001, 100.0));
  std::stringstream bad("x,v\n1,2,3\n");
  EXPECT_THROW(ReadGrid(bad), std::invalid_argument);
}

CertReport SampleReport() {
  CertReport r;
  r.problem = "toy";
  r.order = 6;
  r.status = "optimal";
  r.u = 1e-9;
  r.objective = 2.058512345678901;
  r.reconstruction = 3e-10;
  r.containment = {8000, 0, 0.0123};
  r.volume = {1.25, 0.01, 100000};
  return r;
}

TEST(ReportIoTest, DeterministicAndRuntimeOptional) {
  const std::string a = ReportToJson({SampleReport()}, true);
  EXPECT_EQ(a, ReportToJson({SampleReport()}, true));
  EXPECT_EQ(a.find("runtime"), std::string::npos);
  EXPECT_NE(a.find("2.058512345678901"), std::string::npos);
  EXPECT_NE(a.find("objective_non_increasing"), std::string::npos);
  CertReport timed = SampleReport();
  timed.runtime_seconds = 1.5;
  EXPECT_NE(ReportToJson({timed}).find("runtime"), std::string::npos);
}

}  // namespace
}  // namespace reachsdp
