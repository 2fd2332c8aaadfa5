#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "gridge/cli.hpp"
#include "test_util.hpp"

using namespace gridge;
using namespace gridge::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gridge_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

void write_data(const fs::path& p, const Matrix& x) {
  std::ofstream out(p);
  for (Eigen::Index j = 0; j < x.cols(); ++j) out << (j ? "," : "") << "v" << j + 1;
  out << "\n";
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) out << (j ? "," : "") << io::fmt(x(i, j));
    out << "\n";
  }
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an exception";
  return ErrorKind::InvalidInput;
}

CvSection small_cv() {
  CvSection cv;
  cv.lambda_grid = {0.05, 0.3, 1.0};
  cv.alpha_grid = {0.0, 0.5};
  return cv;
}

}  // namespace

TEST(Config, RoundTripIsLossless) {
  RunConfig rc;
  rc.seed = 987654321012345ULL;
  rc.threads = 3;
  rc.simulate.networks = {"star", "2"};
  rc.simulate.p = {20, 50};
  rc.simulate.cv.lambda_grid = {0.1, 0.30000000000000004, 1.0 / 3.0};
  rc.estimate.target = "gamma=1.5";
  rc.lda.mode = "sweep";
  rc.network.signed_strength = true;
  rc.dualcheck.p = 2;
  const json j = to_json(rc);
  const RunConfig back = config_from_json(json::parse(j.dump()));
  EXPECT_TRUE(back == rc);
  EXPECT_EQ(to_json(back).dump(), j.dump());
  EXPECT_TRUE(config_from_json(json::object()) == RunConfig{});
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_EQ(kind_of([] { config_from_json(json{{"sede", 1}}); }), ErrorKind::InvalidInput);
  EXPECT_EQ(kind_of([] { config_from_json(json{{"simulate", {{"reps", 3}}}}); }),
            ErrorKind::InvalidInput);
  EXPECT_EQ(kind_of([] { config_from_json(json{{"cv", {{"cv", {{"fold", 3}}}}}}); }),
            ErrorKind::InvalidInput);
  EXPECT_EQ(kind_of([] { config_from_json(json{{"threads", "many"}}); }), ErrorKind::InvalidInput);
  EXPECT_EQ(kind_of([] { config_from_json(json{{"threads", 0}}); }), ErrorKind::InvalidInput);
}

TEST(Config, Targets) {
  EXPECT_TRUE(std::holds_alternative<ZeroTarget>(parse_target("zero")));
  EXPECT_TRUE(std::holds_alternative<IdentityTarget>(parse_target("identity")));
  EXPECT_TRUE(std::holds_alternative<ScalarNuTarget>(parse_target("nu")));
  EXPECT_EQ(std::get<ScalarGammaTarget>(parse_target("gamma=2.5")).gamma, 2.5);
  EXPECT_THROW(parse_target("gamma=x"), Error);
  EXPECT_THROW(parse_target("ones"), Error);
}

TEST(Simulate, RowAccountingAndDeterminism) {
  RunConfig rc;
  rc.simulate.networks = {"compound_symmetry"};
  rc.simulate.p = {6};
  rc.simulate.n = 30;
  rc.simulate.replications = 3;
  rc.simulate.methods = {"glasso", "alt_ridge_I", "two_step"};
  rc.simulate.targets = {"identity", "nu"};
  rc.simulate.cv = small_cv();
  const fs::path a = scratch("sim_a"), b = scratch("sim_b");
  cmd_simulate(rc, a);
  rc.threads = 4;
  cmd_simulate(rc, b);
  const auto rows = lines(a / "losses.csv");
  ASSERT_EQ(rows.size(), 1u + 3 * 6 + 6);
  EXPECT_EQ(rows[0].rfind("method,target,network,p,replication,kl,l2,ql,sp", 0), 0u);
  int means = 0;
  for (const auto& r : rows)
    if (r.find(",mean,") != std::string::npos) ++means;
  EXPECT_EQ(means, 6);
  EXPECT_EQ(slurp(a / "losses.csv"), slurp(b / "losses.csv"));
}

TEST(Simulate, SingleReplicationHasZeroSd) {
  RunConfig rc;
  rc.simulate.p = {5};
  rc.simulate.n = 25;
  rc.simulate.replications = 1;
  rc.simulate.methods = {"alt_ridge_I"};
  rc.simulate.targets = {"identity"};
  rc.simulate.cv = small_cv();
  const fs::path out = scratch("sim_r1");
  cmd_simulate(rc, out);
  const auto rows = lines(out / "losses.csv");
  ASSERT_EQ(rows.size(), 3u);
  const auto fields = io::split_csv_line(rows[2]);
  EXPECT_EQ(fields[4], "mean");
  for (int k = 9; k < 13; ++k) EXPECT_EQ(fields[static_cast<std::size_t>(k)], "0");
}

TEST(Simulate, FailuresAreIsolatedPerRow) {
  RunConfig rc;
  rc.simulate.p = {8};
  rc.simulate.n = 6;  // folds of 4-5 training rows: archetype1 with a zero target is singular
  rc.simulate.replications = 2;
  rc.simulate.methods = {"archetype1", "alt_ridge_I"};
  rc.simulate.targets = {"zero", "identity"};
  rc.simulate.cv = small_cv();
  rc.simulate.cv.folds = 2;
  const fs::path out = scratch("sim_fail");
  cmd_simulate(rc, out);
  const auto rows = lines(out / "losses.csv");
  ASSERT_EQ(rows.size(), 1u + 2 * 4 + 4);
  EXPECT_NE(rows[1].find("SelectionFailure"), std::string::npos);
}

TEST(Estimate, IdentityDataGivesNearDiagonal) {
  const fs::path dir = scratch("estimate");
  write_data(dir / "x.csv", gridge::testing::random_matrix(400, 4, 3));
  RunConfig rc;
  rc.estimate.input = (dir / "x.csv").string();
  rc.estimate.method = "alt_ridge_I";
  rc.estimate.lambda = 1.0;
  cmd_estimate(rc, dir / "out");
  const Matrix theta = io::read_data_csv((dir / "out" / "theta.csv").string());
  ASSERT_EQ(theta.rows(), 4);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 4; ++j)
      if (i != j) {
        EXPECT_LT(std::abs(theta(i, j)), 0.1);
      }
  EXPECT_EQ(lines(dir / "out" / "edges.csv").front(), "source,target,weight");
}

TEST(Estimate, MalformedCellNamesLocation) {
  const fs::path dir = scratch("estimate_bad");
  {
    std::ofstream out(dir / "x.csv");
    out << "a,b\n1,2\n3,oops\n";
  }
  RunConfig rc;
  rc.estimate.input = (dir / "x.csv").string();
  try {
    cmd_estimate(rc, dir / "out");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InputError);
    EXPECT_NE(std::string(e.what()).find("row 2, col 2"), std::string::npos) << e.what();
  }
}

TEST(Estimate, SingleVariable) {
  const fs::path dir = scratch("estimate_p1");
  write_data(dir / "x.csv", gridge::testing::random_matrix(20, 1, 1));
  RunConfig rc;
  rc.estimate.input = (dir / "x.csv").string();
  rc.estimate.method = "alt_ridge_I";
  cmd_estimate(rc, dir / "out");
  EXPECT_EQ(lines(dir / "out" / "theta.csv").size(), 2u);
  EXPECT_EQ(lines(dir / "out" / "edges.csv").size(), 1u);
}

TEST(Estimate, CovarianceInputAndAsymmetry) {
  const fs::path dir = scratch("estimate_cov");
  {
    std::ofstream out(dir / "s.csv");
    out << "2,0.5\n0.5,1\n";
    std::ofstream bad(dir / "bad.csv");
    bad << "2,0.5\n0.4,1\n";
  }
  RunConfig rc;
  rc.estimate.input = (dir / "s.csv").string();
  rc.estimate.input_kind = "covariance";
  rc.estimate.method = "archetype2";
  rc.estimate.lambda = 0.5;
  cmd_estimate(rc, dir / "out");
  const Matrix theta = io::read_data_csv((dir / "out" / "theta.csv").string());
  Matrix s(2, 2);
  s << 2.5, 0.5, 0.5, 1.5;
  EXPECT_LT(max_abs(theta * s - Matrix::Identity(2, 2)), 1e-10);
  rc.estimate.input = (dir / "bad.csv").string();
  EXPECT_EQ(kind_of([&] { cmd_estimate(rc, dir / "out2"); }), ErrorKind::InputError);
}

TEST(Cv, WritesSurface) {
  const fs::path dir = scratch("cv");
  write_data(dir / "x.csv", gridge::testing::random_matrix(40, 3, 2));
  RunConfig rc;
  rc.cv.input = (dir / "x.csv").string();
  rc.cv.cv = small_cv();
  cmd_cv(rc, dir / "out");
  const auto rows = lines(dir / "out" / "score_surface.csv");
  EXPECT_EQ(rows.size(), 1u + 3 * 2);
  EXPECT_EQ(rows[0].rfind("lambda,alpha,mean_score,sd_score", 0), 0u);
  const json best = json::parse(slurp(dir / "out" / "cv.json"));
  EXPECT_TRUE(best.contains("best_lambda"));
}

TEST(Lda, SweepAndCvModes) {
  const fs::path dir = scratch("lda");
  {
    const Matrix x = gridge::testing::random_matrix(120, 3, 4);
    std::ofstream out(dir / "d.csv");
    out << "a,b,c,k,class\n";
    for (Eigen::Index i = 0; i < 120; ++i) {
      const bool g = i % 2 == 0;
      out << x(i, 0) + (g ? 1.5 : 0.0) << "," << x(i, 1) << "," << x(i, 2) << ",1,"
          << (g ? "g" : "b") << "\n";
    }
  }
  RunConfig rc;
  rc.lda.input = (dir / "d.csv").string();
  rc.lda.repetitions = 4;
  rc.lda.lambda_grid = {0.1, 1.0};
  rc.lda.mode = "sweep";
  cmd_lda(rc, dir / "sweep");
  EXPECT_EQ(lines(dir / "sweep" / "misclassification_sweep.csv").size(), 1u + 2 * 50);
  rc.lda.mode = "cv";
  cmd_lda(rc, dir / "cv1");
  cmd_lda(rc, dir / "cv2");
  EXPECT_EQ(lines(dir / "cv1" / "misclassification.csv").size(), 1u + 2 * 4);
  EXPECT_EQ(slurp(dir / "cv1" / "misclassification.csv"),
            slurp(dir / "cv2" / "misclassification.csv"));
}

TEST(Network, WindowsYearsAndErrors) {
  const fs::path dir = scratch("network");
  {
    const Matrix inc = 0.01 * gridge::testing::random_matrix(1095, 3, 5);
    std::ofstream out(dir / "prices.csv");
    out << "date,A,B,C\n";
    Vector level = Vector::Constant(3, 50.0);
    Date d = parse_date("2019-01-01");
    for (int t = 0; t < 1095; ++t) {
      if (t) level.array() *= inc.row(t).transpose().array().exp();
      out << format_date(d + std::chrono::days(t)) << "," << io::fmt(level(0)) << ","
          << io::fmt(level(1)) << "," << io::fmt(level(2)) << "\n";
    }
  }
  RunConfig rc;
  rc.network.input = (dir / "prices.csv").string();
  rc.network.cv = small_cv();
  cmd_network(rc, dir / "out");
  EXPECT_EQ(lines(dir / "out" / "strength.csv").size(), 1u + 25);
  EXPECT_TRUE(fs::exists(dir / "out" / "edges_2019.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "edges_full.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "edges" / "window_000.csv"));

  rc.network.window_days = 2000;
  EXPECT_EQ(kind_of([&] { cmd_network(rc, dir / "out2"); }), ErrorKind::SpanError);
}

TEST(Network, ConstantPricesAreSkippedNotFatal) {
  const fs::path dir = scratch("network_flat");
  {
    std::ofstream out(dir / "prices.csv");
    out << "date,A,B\n";
    const Date d = parse_date("2020-01-01");
    for (int t = 0; t < 400; ++t) out << format_date(d + std::chrono::days(t)) << ",10,20\n";
  }
  RunConfig rc;
  rc.network.input = (dir / "prices.csv").string();
  rc.network.cv = small_cv();
  cmd_network(rc, dir / "out");
  const auto rows = lines(dir / "out" / "strength.csv");
  ASSERT_GE(rows.size(), 2u);
  EXPECT_NE(rows[1].find("zero-variance"), std::string::npos);
}

TEST(Dualcheck, LayoutAndDimensions) {
  RunConfig rc;
  rc.dualcheck.p = 2;
  rc.dualcheck.iterations = 3;
  const fs::path out = scratch("dual");
  cmd_dualcheck(rc, out);
  auto rows = lines(out / "dualcheck.csv");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], "iteration,u12_diff,theta_diff");
  rc.dualcheck.p = 3;
  cmd_dualcheck(rc, out);
  rows = lines(out / "dualcheck.csv");
  EXPECT_EQ(rows[0], "iteration,u12_diff,u13_diff,u23_diff,theta_diff");
  rc.dualcheck.p = 4;
  EXPECT_EQ(kind_of([&] { cmd_dualcheck(rc, out); }), ErrorKind::UnsupportedDimension);
}

TEST(Commands, UnknownCommand) {
  EXPECT_THROW(run_command("plot", RunConfig{}, scratch("unknown")), Error);
  const json e = json::parse(error_json("InputError", "bad \"cell\""));
  EXPECT_EQ(e["error"], "InputError");
  EXPECT_EQ(e["message"], "bad \"cell\"");
}
