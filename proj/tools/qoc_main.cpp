#include <CLI11.hpp>
#include <iostream>

#include "qoc/run.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  int seed = -1;
  std::string out_dir;
  int max_iters = -1;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--config", flags->config_path, "Path to the run configuration file")
      ->required();
  cmd->add_option("--seed", flags->seed, "Override [output] seed");
  cmd->add_option("--out", flags->out_dir, "Override [output] dir");
  cmd->add_option("--max-iters", flags->max_iters, "Override [method] max_iters");
  cmd->add_flag("--quiet", flags->quiet, "Suppress progress output");
}

int execute(const std::string& command, const CommonFlags& flags) {
  try {
    qoc::Config config = qoc::Config::parse_file(flags.config_path);
    if (flags.seed >= 0) config.set("output", "seed", std::to_string(flags.seed));
    if (!flags.out_dir.empty()) config.set("output", "dir", flags.out_dir);
    if (flags.max_iters >= 0)
      config.set("method", "max_iters", std::to_string(flags.max_iters));
    if (flags.quiet) config.set("output", "quiet", "true");
    const qoc::RunResult result = qoc::run_command(command, std::move(config));
    if (result.exit_code != 0 && !result.message.empty())
      std::cerr << "error: " << result.message << "\n";
    return result.exit_code;
  } catch (const qoc::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch front end for the quantum optimal control toolkit"};
  app.require_subcommand(1);

  const std::vector<std::string> commands = {"propagate",       "optimize", "controllability",
                                             "spectrum",        "compare",  "gpe-optimize"};
  std::map<std::string, CommonFlags> flags;
  std::string chosen;
  for (const auto& name : commands) {
    CLI::App* cmd = app.add_subcommand(name, name + " run");
    add_common(cmd, &flags[name]);
    cmd->callback([&chosen, name] { chosen = name; });
  }

  CLI11_PARSE(app, argc, argv);
  return execute(chosen, flags[chosen]);
}
