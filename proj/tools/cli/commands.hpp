#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace annihilate::cli {

// Exit-code contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariantFailure = 1;  // verify only
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitSimulationError = 3;

struct Options {
  std::string command;
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

// Runs one subcommand. Prints a single-line JSON status (or error) object to
// `report` and returns the exit code. Output files are written only after
// the whole computation succeeded.
int run_command(const Options& options, std::ostream& report);

}  // namespace annihilate::cli
