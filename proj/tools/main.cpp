#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "annihilate/version.hpp"
#include "cli/commands.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("annihilate");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("ANNIHILATE_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept real ones.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
    else spdlog::warn("ignoring unknown ANNIHILATE_LOG level '{}'", env);
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Annihilating particle systems and their Hamilton-Jacobi limit"};
  app.set_version_flag("--version", std::string(annihilate::kVersion));
  app.require_subcommand(1);

  annihilate::cli::Options opt;
  const struct {
    const char* name;
    const char* help;
  } commands[] = {
      {"simulate", "Evolve the particle system from the 'initial' section"},
      {"hj", "Solve the level-set equation with the monotone scheme"},
      {"converge", "Run the particle-to-PDE convergence ladder"},
      {"verify", "Run the invariant battery; non-zero exit iff an invariant fails"},
      {"measure", "Measure diagnostics on a ladder of atomic measures"},
      {"moments", "Moments, elementary symmetric values and reconstruction"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", opt.config_path, "Config file (JSON)");
    sub->add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", opt.seed, "Random seed")->capture_default_str();
    sub->add_option("--threads", opt.threads, "Worker threads")
        ->check(CLI::Range(1u, 1024u))
        ->capture_default_str();
    sub->callback([&opt, name = std::string(c.name)] { opt.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    std::cout << R"({"status":"error","code":"UsageError","exit_code":2})" << std::endl;
    return annihilate::cli::kExitConfigError;
  }
  return annihilate::cli::run_command(opt, std::cout);
}
