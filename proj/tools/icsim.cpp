// icsim <subcommand> --config <file> [--run-id ID] [--port N]

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "icsim/config.hpp"
#include "icsim/error.hpp"
#include "icsim/pipeline.hpp"

namespace {

// Exit statuses, so scripts can tell a bad config from a missing stage.
constexpr int kFailure = 1;
constexpr int kBadConfig = 2;
constexpr int kMissingArtifact = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"icsim: individualized author simulation evaluation"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::string> run_id;
  std::optional<int> port;
  bool quiet = false;
  // Every subcommand takes the same flags, before or after its name.
  auto add_flags = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--run-id", run_id, "run directory name under output_dir");
    cmd->add_option("--port", port, "study service port (serve)")->check(CLI::Range(0, 65535));
    cmd->add_flag("-q,--quiet", quiet, "only log warnings and errors");
  };
  for (auto stage : icsim::pipeline::kAllStages) {
    const std::string name(icsim::pipeline::to_string(stage));
    add_flags(app.add_subcommand(name, "run the " + name + " stage"));
  }
  add_flags(app.add_subcommand("all", "run every stage in order"));
  add_flags(app.add_subcommand("serve", "serve the human study of a run over HTTP"));

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(quiet ? spdlog::level::warn : spdlog::level::info);
  const std::string sub = app.get_subcommands().front()->get_name();

  try {
    auto config = icsim::RunConfig::load(config_path);
    if (run_id) {
      config.run_id = *run_id;
      config.validate();
    }
    icsim::pipeline::Pipeline pipeline(std::move(config));
    if (sub == "all") {
      pipeline.run_all();
    } else if (sub == "serve") {
      pipeline.serve(port);
    } else {
      pipeline.run(*icsim::pipeline::parse_stage(sub));
    }
  } catch (const icsim::ConfigError& e) {
    spdlog::error("config: {}", e.what());
    return kBadConfig;
  } catch (const icsim::MissingArtifact& e) {
    spdlog::error("missing artifact: {}", e.what());
    return kMissingArtifact;
  } catch (const std::exception& e) {
    spdlog::error("{}: {}", sub, e.what());
    return kFailure;
  }
  return 0;
}
