#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "annihilate/harness.hpp"
#include "annihilate/hjsolver.hpp"
#include "annihilate/integrator.hpp"

namespace annihilate::cli {

// Initial particles for `simulate`, `verify` and `moments`.
struct InitialSection {
  bool present = false;
  std::vector<double> positions;
  std::vector<int> charges;
  std::optional<double> coupling;
  double time = 0.0;
};

struct HjSection {
  std::string datum = "sigmoid";
  double eps = 0.125;  // only pair_bump depends on it
};

struct VerifySection {
  std::vector<std::size_t> sizes = {4, 8, 16, 32};
  std::size_t runs = 100;
  std::size_t uniform_samples = 40;
  double stencil = 1e-6;
};

struct MeasureSection {
  // dirac_pair: delta_{1/n} - delta_0. sampled: particles of `datum`.
  std::string family = "dirac_pair";
  std::string datum = "sigmoid";
  std::vector<std::size_t> ladder = {4, 8, 16, 32, 64, 128, 256};
  double a = 0.5;
  double lo = -1.0;
  double hi = 1.0;
  int levels = 6;
  double omega_lipschitz = 1.0;  // omega(r) = omega_lipschitz * r
  double threshold = 0.05;
};

struct Config {
  nlohmann::json raw;  // as parsed, used for the hash
  std::string hash;

  IntegratorConfig integrator;
  std::size_t samples = 0;  // extra uniform sample times in (t0, t_end)
  SchemeConfig scheme;
  ExperimentSpec experiment;
  InitialSection initial;
  HjSection hj;
  VerifySection verify;
  MeasureSection measure;
  std::vector<double> moment_positions;
};

// Throws ConfigError on unreadable files, bad JSON, unknown keys, wrong types
// or out-of-range values.
Config load_config(const std::string& path);
Config parse_config(const nlohmann::json& j);

// First 16 hex digits of the SHA-256 of the canonical JSON dump.
std::string config_hash(const nlohmann::json& j);

}  // namespace annihilate::cli
