#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.h"
#include "reachsdp/certificate_io.h"
#include "reachsdp/grid_file.h"
#include "test_support.h"

namespace reachsdp {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = 0;
  std::string out, err;
};

CliRun Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "reach_sos");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string ErrorKind(const CliRun& r) {
  const auto line = r.err.substr(r.err.rfind('{', r.err.find("\"error\"")));
  return nlohmann::json::parse(line)["error"]["kind"].get<std::string>();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("reachsdp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string Path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

TEST_F(CliTest, SolveCertifyAndGrid) {
  const std::string cert = Path("toy.cert.json"), report = Path("toy.report.json");
  const CliRun solve = Invoke({"solve", test::FixturePath("toy"), "--order", "4", "--u-zero",
                            "--samples", "200", "--volume-samples", "10000", "--out", cert,
                            "--report", report});
  ASSERT_EQ(solve.code, 0) << solve.err;
  ASSERT_TRUE(fs::exists(cert));
  ASSERT_TRUE(fs::exists(report));
  const Certificate c = LoadCertificate(cert);
  EXPECT_EQ(c.r, 2);
  EXPECT_TRUE(c.u_zero);
  EXPECT_EQ(c.u, 0.0);
  std::ifstream rin(report);
  const auto rep = nlohmann::json::parse(rin);
  EXPECT_EQ(rep.dump().find("runtime"), std::string::npos);

  const CliRun check = Invoke({"certify", test::FixturePath("toy"), cert, "--report",
                            Path("check.json")});
  EXPECT_EQ(check.code, 0) << check.err;

  const CliRun grid = Invoke({"grid", cert, "--res", "200", "--out", Path("toy.csv")});
  ASSERT_EQ(grid.code, 0) << grid.err;
  std::ifstream gin(Path("toy.csv"));
  const GridData data = ReadGrid(gin);
  EXPECT_EQ(data.rows.size(), 40000u);

  const CliRun mismatch = Invoke({"certify", test::FixturePath("julia"), cert});
  EXPECT_NE(mismatch.code, 0);
}

TEST_F(CliTest, UsageErrorsAreJson) {
  const CliRun none = Invoke({});
  EXPECT_EQ(none.code, 2);
  EXPECT_EQ(ErrorKind(none), "usage");
  const CliRun bad = Invoke({"solve", test::FixturePath("toy"), "--order", "four"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_EQ(ErrorKind(bad), "usage");
  const CliRun both = Invoke({"solve", test::FixturePath("toy"), "--T", "10", "--u-zero"});
  EXPECT_EQ(both.code, 2);
  const CliRun unknown = Invoke({"frobnicate"});
  EXPECT_EQ(unknown.code, 2);
}

TEST_F(CliTest, MissingFilesFail) {
  const CliRun missing = Invoke({"solve", Path("absent.problem"), "--order", "4"});
  EXPECT_NE(missing.code, 0);
  EXPECT_EQ(ErrorKind(missing), "problem_file");
  const CliRun no_cert = Invoke({"grid", Path("absent.cert.json"), "--out", Path("g.csv")});
  EXPECT_NE(no_cert.code, 0);
  EXPECT_FALSE(fs::exists(Path("g.csv")));
}

TEST_F(CliTest, OddOrderIsRejected) {
  const CliRun odd = Invoke({"solve", test::FixturePath("toy"), "--order", "5", "--u-zero"});
  EXPECT_NE(odd.code, 0);
  EXPECT_NE(odd.err.find("even"), std::string::npos);
}

}  // namespace
}  // namespace reachsdp
