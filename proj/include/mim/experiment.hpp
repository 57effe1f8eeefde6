#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mim/analysis.hpp"
#include "mim/problem.hpp"
#include "mim/train.hpp"

namespace mim {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ConvergenceSettings {
  std::string mode = "train";  // or "approximation"
  int seeds = 1;
  int partition = 64;
};

struct DerivativeSettings {
  int points = 100;
  double step = 1e-5;
  double tolerance = 1e-5;
  int width = 8;
};

struct CoercivitySettings {
  int trials = 200;
  int seeds = 2;
  double delta = 0.1;
  std::vector<int> n{1, 2};
  std::vector<int> d{1, 2};
  std::vector<BoundaryKind> kinds{BoundaryKind::dirichlet, BoundaryKind::neumann, BoundaryKind::robin};
  std::vector<System> systems{System::first_order, System::second_order};
  CoercivityOptions options;
};

struct ApproximationSettings {
  std::vector<int> m{16, 32, 64, 128, 256};
  std::vector<int> k1{1, 2};
  double B = 1.0;
};

struct RademacherSettings {
  std::vector<int> d{2, 3, 4, 5};
  std::vector<int> N{64, 128, 256, 512, 1024, 2048, 4096};
  int sign_draws = 64;
  int candidates = 256;
  int x_draws = 4;
  int gap_resamples = 64;
  int gap_width = 16;
  ProblemSpec gap_problem;
};

struct InequalitySettings {
  std::vector<double> delta{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<int> n{1, 2, 3};
  int ab_points = 101;  // a, b in {0, 0.1, ..., 10}
  double ab_step = 0.1;
};

struct ExperimentConfig {
  ProblemSpec problem;
  System system = System::first_order;
  std::vector<int> m{64};
  std::vector<int> N{4096};
  int N_hat = 0;
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  int jobs = 0;
  ConvergenceSettings convergence;
  DerivativeSettings derivatives;
  CoercivitySettings coercivity;
  ApproximationSettings approximation;
  RademacherSettings rademacher;
  InequalitySettings inequalities;
};

/// Defaults: Poisson with u* = cos(pi x) on [0, 1], Dirichlet, first-order system.
ExperimentConfig default_config();
/// Parses a JSON config; missing keys keep their defaults. Throws ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
/// Canonical JSON of the full config (defaults filled in).
std::string config_json(const ExperimentConfig& cfg);
void set_seed(ExperimentConfig& cfg, std::uint64_t seed);

const std::vector<std::string>& command_names();

struct RunResult {
  int exit_code = 0;
  std::string error;
  std::string report_json;  // report.json contents
  std::map<std::string, std::string> files;  // name -> contents, as written
};

/// Runs one subcommand and writes its outputs into `out_dir` only when the
/// whole run succeeded. Exit codes: 0 ok, 1 runtime error, 2 bad input,
/// 3 a verification check failed (outputs are still written).
RunResult run_command(const std::string& command, const ExperimentConfig& cfg,
                      const std::filesystem::path& out_dir);

}  // namespace mim
