#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace shearless::cli;
  CLI::App app{"Shearless transport barrier extraction"};
  app.require_subcommand(1);

  Invocation inv;
  std::string out, log_level = "info";
  unsigned threads = 0;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", inv.config_path, "JSON run config or run manifest")->required();
    cmd->add_option("--out", out, "Output directory (overrides the config)");
    cmd->add_option("--threads", threads, "Worker cap; 0 uses SHEARLESS_THREADS or all cores");
    cmd->add_option("--log-level", log_level, "error, warn, info or debug")
        ->check(CLI::IsMember({"error", "warn", "info", "debug"}));
  };
  for (const auto& name : command_names()) add_common(app.add_subcommand(name, "Run the " + name + " stage"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  inv.command = app.get_subcommands().front()->get_name();
  if (!out.empty()) inv.out = out;
  if (app.get_subcommands().front()->count("--threads")) inv.threads = threads;
  inv.log_level = log_level_from_string(log_level);
  return run(inv);
}
