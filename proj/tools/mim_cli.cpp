// Command-line front end: mim <command> [--config file] [--out dir] [--seed n] [--jobs n]

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mim/experiment.hpp"

namespace {

int fail(const std::string& command, int code, const std::string& message) {
  nlohmann::json line{{"status", "error"}, {"command", command}, {"code", code}, {"message", message}};
  std::cerr << line.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed residual solver for high-order elliptic problems on the unit cube"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  int jobs = 0;
  for (const auto& name : mim::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", seed, "Master seed (overrides the config)");
    sub->add_option("--jobs", jobs, "OpenMP threads (0 = runtime default)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << app.help();
    return fail(argc > 1 ? argv[1] : "", 2, e.what());
  }
  const std::string command = app.get_subcommands().front()->get_name();
  auto* sub = app.get_subcommands().front();

  mim::ExperimentConfig cfg;
  try {
    if (config_path.empty()) {
      cfg = mim::default_config();
    } else {
      std::ifstream f(config_path);
      if (!f) return fail(command, 2, "cannot read config: " + config_path);
      std::stringstream ss;
      ss << f.rdbuf();
      cfg = mim::parse_config(ss.str());
    }
  } catch (const std::exception& e) {
    return fail(command, 2, e.what());
  }
  if (sub->count("--seed") > 0) mim::set_seed(cfg, seed);
  if (sub->count("--jobs") > 0) cfg.jobs = jobs;

  const auto result = mim::run_command(command, cfg, out_dir);
  if (result.exit_code != 0) {
    if (!result.report_json.empty()) std::cout << result.report_json;
    return fail(command, result.exit_code, result.error);
  }
  std::cout << result.report_json;
  return 0;
}
