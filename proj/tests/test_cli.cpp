#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mim/csv.hpp"
#include "mim/experiment.hpp"

using namespace mim;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mim_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

ExperimentConfig quick_config() {
  ExperimentConfig c = default_config();
  c.m = {8};
  c.N = {128};
  c.optimizer.steps = 40;
  c.optimizer.log_interval = 10;
  c.derivatives.points = 10;
  c.inequalities.ab_points = 21;
  c.inequalities.ab_step = 0.5;
  c.rademacher.d = {2};
  c.rademacher.N = {64, 128};
  c.rademacher.gap_resamples = 4;
  return c;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(MIM_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, CommandNames) {
  EXPECT_EQ(command_names(),
            (std::vector<std::string>{"train", "study-convergence", "verify-derivatives", "verify-coercivity",
                                      "verify-approximation", "estimate-rademacher", "check-inequalities"}));
}

TEST(Cli, ConfigRoundTrip) {
  auto c = quick_config();
  c.seed = 99;
  c.coercivity.kinds = {BoundaryKind::robin};
  const std::string text = config_json(c);
  EXPECT_EQ(config_json(parse_config(text)), text);
  EXPECT_EQ(config_json(parse_config("{}")), config_json(default_config()));
}

TEST(Cli, SeedReachesOptimizer) {
  const auto c = parse_config(R"({"seed": 12})");
  EXPECT_EQ(c.seed, 12u);
  EXPECT_EQ(c.optimizer.seed, 12u);
}

TEST(Cli, MalformedConfigsAreRejected) {
  for (const char* bad : {"{", "[1, 2]", R"({"m": []})", R"({"m": "x"})", R"({"system": "third"})",
                          R"({"problem": {"kind": "cauchy"}})", R"({"optimizer": {"method": "lbfgs"}})",
                          R"({"convergence": {"mode": "guess"}})", R"({"inequalities": {"delta": [1.5]}})",
                          R"({"N_hat": -1})"}) {
    EXPECT_THROW(parse_config(bad), ConfigError) << bad;
  }
}

TEST(Cli, UnknownCommandIsUsageError) {
  const auto dir = fresh_dir("unknown");
  const auto r = run_command("solve", quick_config(), dir);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_FALSE(r.error.empty());
  EXPECT_FALSE(fs::exists(dir));
}

TEST(Cli, CheckInequalitiesWritesYoungCsv) {
  const auto dir = fresh_dir("young");
  const auto r = run_command("check-inequalities", quick_config(), dir);
  ASSERT_EQ(r.exit_code, 0) << r.error;
  const auto csv = lines(slurp(dir / "young.csv"));
  ASSERT_GE(csv.size(), 3u);
  EXPECT_EQ(csv[0].rfind("# config_hash=", 0), 0u);
  EXPECT_EQ(csv[1], "delta,n,k,points,violations");
  for (std::size_t i = 2; i < csv.size(); ++i) EXPECT_EQ(csv[i].substr(csv[i].rfind(',') + 1), "0");
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(report["results"]["violations"], 0);
  EXPECT_TRUE(report["passed"].get<bool>());
  EXPECT_EQ(csv[0], "# config_hash=" + report["config_hash"].get<std::string>());
}

TEST(Cli, VerifyDerivativesPasses) {
  const auto dir = fresh_dir("deriv");
  const auto r = run_command("verify-derivatives", quick_config(), dir);
  ASSERT_EQ(r.exit_code, 0) << r.error;
  const auto report = nlohmann::json::parse(r.report_json);
  EXPECT_EQ(report["results"]["failures"], 0);
  EXPECT_TRUE(fs::exists(dir / "derivatives.csv"));
}

TEST(Cli, FailedCheckExitsThreeAndKeepsOutputs) {
  auto c = quick_config();
  c.derivatives.tolerance = 0.0;
  const auto dir = fresh_dir("fail");
  const auto r = run_command("verify-derivatives", c, dir);
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_TRUE(fs::exists(dir / "derivatives.csv"));
  EXPECT_FALSE(nlohmann::json::parse(r.report_json)["passed"].get<bool>());
}

TEST(Cli, BadProblemIsInputErrorWithoutOutputs) {
  auto c = quick_config();
  c.problem.d = 2;  // modes are still one-dimensional
  const auto dir = fresh_dir("badproblem");
  const auto r = run_command("train", c, dir);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_FALSE(fs::exists(dir));
}

TEST(Cli, UnwritableOutputIsRuntimeError) {
  const auto blocker = fresh_dir("blocker");
  { std::ofstream(blocker) << "x"; }
  const auto r = run_command("check-inequalities", quick_config(), blocker / "sub");
  EXPECT_EQ(r.exit_code, 1);
  fs::remove(blocker);
}

TEST(Cli, RerunsAreByteIdentical) {
  for (const char* cmd : {"train", "check-inequalities", "estimate-rademacher", "verify-derivatives"}) {
    const auto d1 = fresh_dir(std::string("rerun1_") + cmd);
    const auto d2 = fresh_dir(std::string("rerun2_") + cmd);
    const auto r1 = run_command(cmd, quick_config(), d1);
    const auto r2 = run_command(cmd, quick_config(), d2);
    ASSERT_EQ(r1.exit_code, r2.exit_code) << cmd;
    int csvs = 0;
    for (const auto& entry : fs::directory_iterator(d1)) {
      if (entry.path().extension() != ".csv") continue;
      ++csvs;
      EXPECT_EQ(slurp(entry.path()), slurp(d2 / entry.path().filename())) << cmd;
    }
    EXPECT_GT(csvs, 0) << cmd;
  }
}

TEST(Cli, SeedChangesHashAndRows) {
  auto a = quick_config();
  auto b = quick_config();
  set_seed(b, 5);
  const auto ra = run_command("train", a, fresh_dir("seed_a"));
  const auto rb = run_command("train", b, fresh_dir("seed_b"));
  ASSERT_EQ(ra.exit_code, 0);
  ASSERT_EQ(rb.exit_code, 0);
  EXPECT_NE(ra.files.at("train_log.csv"), rb.files.at("train_log.csv"));
  EXPECT_NE(lines(ra.files.at("train_log.csv"))[0], lines(rb.files.at("train_log.csv"))[0]);
}

TEST(Cli, ConvergenceSingleCellHasNoSlope) {
  auto c = quick_config();
  c.convergence.mode = "approximation";
  c.problem = default_config().problem;
  const auto r = run_command("study-convergence", c, fresh_dir("single"));
  ASSERT_EQ(r.exit_code, 0) << r.error;
  const auto rows = lines(r.files.at("convergence.csv"));
  EXPECT_EQ(rows.size(), 3u);
  EXPECT_TRUE(nlohmann::json::parse(r.report_json)["results"]["along_m"]["slope"].is_null());
}

TEST(Cli, CsvHelpers) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1e300), "1e+300");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(hash_hex(""), "cbf29ce484222325");
  EXPECT_EQ(hash_hex("a"), "af63dc4c8601ec8c");
  CsvTable t({"x", "y"});
  t.add_row(row({1, 2.5}));
  EXPECT_EQ(t.render("abc"), "# config_hash=abc\nx,y\n1,2.5\n");
  EXPECT_THROW(t.add_row(row({1})), std::invalid_argument);
}

TEST(Cli, AtomicWriteReplacesContent) {
  const auto dir = fresh_dir("atomic");
  fs::create_directories(dir);
  write_file_atomic(dir / "f.txt", "one");
  write_file_atomic(dir / "f.txt", "two");
  EXPECT_EQ(slurp(dir / "f.txt"), "two");
  int files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1);
}

TEST(Cli, BinaryExitCodes) {
  const auto dir = fresh_dir("binary");
  fs::create_directories(dir);
  { std::ofstream(dir / "bad.json") << "{ not json"; }
  EXPECT_EQ(run_cli("check-inequalities --config " + (dir / "bad.json").string() + " --out " +
                    (dir / "o1").string()),
            2);
  EXPECT_FALSE(fs::exists(dir / "o1"));
  EXPECT_EQ(run_cli("check-inequalities --config " + (dir / "missing.json").string()), 2);
  { std::ofstream(dir / "ok.json") << R"({"inequalities": {"ab_points": 11, "ab_step": 1.0}})"; }
  EXPECT_EQ(run_cli("check-inequalities --config " + (dir / "ok.json").string() + " --out " +
                    (dir / "o2").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "o2" / "young.csv"));
  EXPECT_EQ(run_cli("no-such-command"), 2);
  EXPECT_EQ(run_cli("train --bogus-flag"), 2);
}
