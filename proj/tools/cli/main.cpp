#include <cstdlib>
#include <iostream>

#include "commands.h"
#include "socialmotion/error.h"
#include "socialmotion/manifest.h"

using namespace socialmotion;
using namespace socialmotion::cli;

namespace {

int report_error(const std::string& subcommand, const std::string& code, const std::string& message, int status) {
  nlohmann::json j;
  j["error"] = {{"code", code}, {"message", message}, {"subcommand", subcommand}};
  std::cerr << j.dump() << std::endl;
  return status;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-person motion tokenization, language modeling and evaluation.\n"
               "Default data root: $" + std::string(kDataRootEnv) + " (\"data\" when unset)."};
  app.require_subcommand(1);
  app.fallthrough();

  RunContext ctx;
  app.add_option("--config", ctx.config_path, "JSON configuration file for the subcommand");
  app.add_option("--seed", ctx.seed, "Random seed, recorded in every output sidecar");
  app.add_option("--out", ctx.out_dir, "Output directory");
  app.add_flag("--json", ctx.json, "Machine-readable JSON on standard output");
  app.set_version_flag("--version", std::string(SOCIALMOTION_VERSION));

  std::vector<Command> commands;
  add_data_commands(app, commands);
  add_model_commands(app, commands);
  add_eval_commands(app, commands);

  for (int i = 0; i < argc; ++i) {
    ctx.argv.emplace_back(argv[i]);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(app.get_subcommands().empty() ? "" : app.get_subcommands().front()->get_name(),
                        "usage", e.what(), 2);
  }

  for (const Command& c : commands) {
    if (!c.app->parsed()) {
      continue;
    }
    ctx.subcommand = c.app->get_name();
    try {
      c.run(ctx);
      return 0;
    } catch (const Error& e) {
      return report_error(ctx.subcommand, std::string(error_code_name(e.code())), e.what(), 1);
    } catch (const std::exception& e) {
      return report_error(ctx.subcommand, "internal", e.what(), 1);
    }
  }
  return report_error("", "usage", "no subcommand given", 2);
}
