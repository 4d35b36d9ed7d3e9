#include "cli.hpp"

#include "robl1/io.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Invocation {
  int code;
  std::string out, err;
};

Invocation run(std::vector<std::string> args) {
  args.insert(args.begin(), "robl1");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = robl1::cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

json load(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("robl1_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  fs::path dir;
};

}  // namespace

TEST_F(Cli, CleanRoundTrip) {
  write(path("spec.json"), R"({"n": 3, "N": 40, "regressor_kind": "gaussian", "seed": 7})");
  ASSERT_EQ(run({"generate", "--spec", path("spec.json"), "--out", path("data.csv")}).code, 0);
  EXPECT_TRUE(fs::exists(path("theta0.csv")));
  std::ifstream csv(path("data.csv"));
  std::string first;
  std::getline(csv, first);
  EXPECT_EQ(first.rfind("# invocation: robl1 generate", 0), 0u);

  ASSERT_EQ(run({"estimate", "--data", path("data.csv"), "--out", path("est.json")}).code, 0);
  const json est = load(path("est.json"));
  EXPECT_EQ(est["schema_version"], 1);
  EXPECT_NE(est["invocation"].get<std::string>().find("estimate"), std::string::npos);
  EXPECT_TRUE(est["certificate"]["optimal"].get<bool>());

  const Eigen::VectorXd theta0 = robl1::io::read_vector(path("theta0.csv"));
  double err = 0.0;
  for (int i = 0; i < 3; ++i) err += std::pow(est["theta"][i].get<double>() - theta0(i), 2);
  EXPECT_LE(std::sqrt(err), 1e-8);

  ASSERT_EQ(run({"certify", "--data", path("data.csv"), "--theta", path("est.json"), "--out",
                 path("cert.json")}).code, 0);
  const json cert = load(path("cert.json"));
  EXPECT_TRUE(cert["optimal"].get<bool>());
  EXPECT_TRUE(cert["unique"].get<bool>());
  EXPECT_EQ(cert["uniqueness"], "unique");
  EXPECT_EQ(cert["s3_value"], 0.0);
}

TEST_F(Cli, PerturbedThetaIsNotOptimalButSucceeds) {
  write(path("spec.json"), R"({"n": 2, "N": 30, "seed": 3})");
  ASSERT_EQ(run({"generate", "--spec", path("spec.json"), "--out", path("data.csv")}).code, 0);
  const Eigen::VectorXd theta0 = robl1::io::read_vector(path("theta0.csv"));
  write(path("theta.json"), "[" + std::to_string(theta0(0) + 0.1) + ", " + std::to_string(theta0(1)) + "]");
  const Invocation r = run({"certify", "--data", path("data.csv"), "--theta", path("theta.json"), "--out",
                     path("cert.json")});
  EXPECT_EQ(r.code, 0);
  const json cert = load(path("cert.json"));
  EXPECT_FALSE(cert["optimal"].get<bool>());
  EXPECT_EQ(cert["uniqueness"], "not_evaluated");
}

TEST_F(Cli, EstimateMethods) {
  write(path("spec.json"), R"({"n": 3, "N": 50, "outlier_fraction": 0.2, "noise_snr_db": 30, "seed": 4})");
  ASSERT_EQ(run({"generate", "--spec", path("spec.json"), "--out", path("data.csv")}).code, 0);
  ASSERT_EQ(run({"estimate", "--data", path("data.csv"), "--method", "reweighted", "--rmax", "2",
                 "--out", path("rw.json")}).code, 0);
  EXPECT_EQ(load(path("rw.json"))["iterates"].size(), 3u);
  ASSERT_EQ(run({"estimate", "--data", path("data.csv"), "--method", "regularized", "--lambda", "0.1",
                 "--out", path("reg.json")}).code, 0);
  EXPECT_TRUE(load(path("reg.json"))["kkt"].get<bool>());
  ASSERT_EQ(run({"estimate", "--data", path("data.csv"), "--method", "sum-of-norms", "--out",
                 path("son.json")}).code, 0);
  EXPECT_TRUE(load(path("son.json")).contains("t3_value"));
  ASSERT_EQ(run({"estimate", "--data", path("data.csv"), "--solver", "first-order", "--out",
                 path("fo.json")}).code, 0);
}

TEST_F(Cli, BoundsFixtureCapBehavior) {
  const std::string fixture = std::string(ROBL1_FIXTURE_DIR) + "/bounds_4x30.csv";
  ASSERT_EQ(run({"bounds", "--data", fixture, "--exact-cap", "15", "--out", path("b.json")}).code, 0);
  const json b = load(path("b.json"));
  EXPECT_EQ(b["exactness"]["nu_n"], "exact");
  EXPECT_GE(b["nu_n"].get<int>(), 4);
  EXPECT_TRUE(b["k1"].is_null());
  EXPECT_TRUE(b["k2"].is_null());
  EXPECT_EQ(b["exactness"]["k1"], "not_computed");
  EXPECT_EQ(b["exactness"]["k2"], "not_computed");
  EXPECT_LT(b["threshold_r"].get<double>(), 30.0);

  ASSERT_EQ(run({"bounds", "--data", fixture, "--exact-cap", "15", "--normalize", "--out",
                 path("b2.json")}).code, 0);
}

TEST_F(Cli, SmallBoundsAreExact) {
  write(path("spec.json"), R"({"n": 2, "N": 10, "seed": 1})");
  ASSERT_EQ(run({"generate", "--spec", path("spec.json"), "--out", path("data.csv")}).code, 0);
  ASSERT_EQ(run({"bounds", "--data", path("data.csv"), "--out", path("b.json")}).code, 0);
  const json b = load(path("b.json"));
  EXPECT_EQ(b["exactness"]["k1"], "exact");
  EXPECT_TRUE(b["k1"].is_number_integer());
}

TEST_F(Cli, ExperimentCsvAndJson) {
  write(path("exp.json"), R"({"scenario": "static_linear", "gen": {"n": 3, "N": 40},
                              "fractions": [0, 0.3], "trials": 4, "seed": 2})");
  ASSERT_EQ(run({"experiment", "--config", path("exp.json"), "--out", path("t.csv")}).code, 0);
  std::ifstream csv(path("t.csv"));
  std::string l1, l2, l3, l4;
  std::getline(csv, l1);
  std::getline(csv, l2);
  std::getline(csv, l3);
  std::getline(csv, l4);
  EXPECT_EQ(l1.rfind("# invocation: robl1 experiment", 0), 0u);
  EXPECT_EQ(l2.rfind("# metadata: ", 0), 0u);
  EXPECT_EQ(l3.rfind("# run_id: ", 0), 0u);
  EXPECT_EQ(l4, "x,recovery_probability,certified_rate,failures");
  ASSERT_EQ(run({"experiment", "--config", path("exp.json"), "--threads", "2", "--out", path("t.json")}).code, 0);
  EXPECT_EQ(load(path("t.json"))["rows"].size(), 2u);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  const Invocation missing = run({"estimate", "--data", path("nope.csv"), "--out", path("e.json")});
  EXPECT_EQ(missing.code, 2);
  EXPECT_FALSE(missing.err.empty());
  EXPECT_EQ(missing.err.find('\n'), missing.err.size() - 1);

  write(path("bad.json"), R"({"n": 2, "N": 10, "outlier_fraction": 3})");
  EXPECT_EQ(run({"generate", "--spec", path("bad.json"), "--out", path("d.csv")}).code, 2);

  write(path("deficient.csv"), "y,x1,x2\n1,1,2\n2,2,4\n3,3,6\n");
  EXPECT_EQ(run({"estimate", "--data", path("deficient.csv"), "--out", path("e.json")}).code, 3);

  write(path("spec.json"), R"({"n": 2, "N": 18, "seed": 1})");
  ASSERT_EQ(run({"generate", "--spec", path("spec.json"), "--out", path("data.csv")}).code, 0);
  write(path("big_spec.json"), R"({"n": 5, "N": 120, "seed": 1})");
  ASSERT_EQ(run({"generate", "--spec", path("big_spec.json"), "--out", path("big.csv")}).code, 0);
  EXPECT_EQ(run({"bounds", "--data", path("big.csv"), "--out", path("b.json")}).code, 0);
  EXPECT_EQ(load(path("b.json"))["exactness"]["nu_n"], "sampled_lower_bound");
  const Invocation capped = run({"bounds", "--data", path("data.csv"), "--strict", "--out", path("b3.json")});
  EXPECT_EQ(capped.code, 4);
  EXPECT_EQ(capped.err.rfind("cap exceeded", 0), 0u);
  EXPECT_EQ(run({"bounds", "--data", path("data.csv"), "--strict", "--exact-cap", "18", "--out",
                 path("b4.json")}).code, 0);

  EXPECT_EQ(run({"estimate", "--data", path("data.csv"), "--method", "magic", "--out", path("e.json")}).code, 2);
  EXPECT_EQ(run({"estimate", "--data", path("data.csv"), "--method", "regularized", "--lambda", "-1",
                 "--out", path("e.json")}).code, 2);
  EXPECT_EQ(run({"estimate", "--data", path("data.csv"), "--out", (dir / "missing_dir" / "e.json").string()}).code, 2);
}
