#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace annihilate {

// Discrete state of the particle system: positions x, charges b in {-1,0,+1},
// interaction prefactor gamma and the current time.
struct ParticleState {
  std::vector<double> positions;
  std::vector<int> charges;
  double coupling = 0.0;
  double time = 0.0;

  std::size_t size() const { return positions.size(); }
};

// Builds a state, checking lengths, charge values and finiteness. The
// coupling defaults to 1/n. Ordering is not checked here (see validate_state).
ParticleState make_state(std::vector<double> positions, std::vector<int> charges,
                         std::optional<double> coupling = std::nullopt,
                         double time = 0.0);

struct ValidityReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Checks membership in the state space: charged particles strictly ordered
// by index, charges in {-1,0,+1}, finite positions, positive coupling.
ValidityReport validate_state(const ParticleState& state);

// Velocity of particle i. Exactly 0 for neutral particles.
double force(const ParticleState& state, std::size_t i);

// All velocities at once, summing over charged particles only.
std::vector<double> velocities(const ParticleState& state);

// (gamma^2 / 2) sum_{i != j} b_i b_j (-log|x_i - x_j|).
double energy(const ParticleState& state);

std::vector<std::size_t> charged_indices(const ParticleState& state);
int net_charge(const ParticleState& state);
std::size_t count_charge(const ParticleState& state, int sign);

// Minimal gaps between consecutive charged particles (neutral ones are
// skipped). +inf when no such pair exists.
struct NeighborGaps {
  double plus = std::numeric_limits<double>::infinity();
  double minus = std::numeric_limits<double>::infinity();
  double opposite = std::numeric_limits<double>::infinity();
};
NeighborGaps neighbor_gaps(const ParticleState& state);

}  // namespace annihilate
